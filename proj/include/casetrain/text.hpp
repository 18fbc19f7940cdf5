#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace casetrain::text {

/// Canonical matching form: ASCII-lowercased, punctuation replaced by spaces,
/// internal whitespace collapsed to single spaces, trimmed. Bytes outside the
/// ASCII range pass through untouched.
std::string normalize(std::string_view raw);

/// normalize() followed by a whitespace split.
std::vector<std::string> tokenize(std::string_view raw);

/// Whether `needle` (already normalized) occurs as a substring of the
/// normalized form of `haystack`.
bool contains_normalized(std::string_view haystack, std::string_view needle);

/// First index at which `phrase` occurs in `tokens` as a contiguous run,
/// or -1 if absent.
int find_token_sequence(const std::vector<std::string>& tokens,
                        const std::vector<std::string>& phrase);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace casetrain::text
