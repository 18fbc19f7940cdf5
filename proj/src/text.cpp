#include "casetrain/text.hpp"

#include <cctype>

namespace casetrain::text {

std::string normalize(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    bool pending_space = false;
    for (unsigned char c : raw) {
        char mapped;
        if (c < 0x80 && (std::isspace(c) || std::ispunct(c))) {
            pending_space = true;
            continue;
        }
        mapped = (c < 0x80) ? static_cast<char>(std::tolower(c)) : static_cast<char>(c);
        if (pending_space && !out.empty()) out.push_back(' ');
        pending_space = false;
        out.push_back(mapped);
    }
    return out;
}

std::vector<std::string> tokenize(std::string_view raw) {
    std::vector<std::string> tokens;
    std::string norm = normalize(raw);
    std::size_t start = 0;
    while (start < norm.size()) {
        std::size_t end = norm.find(' ', start);
        if (end == std::string::npos) end = norm.size();
        if (end > start) tokens.emplace_back(norm.substr(start, end - start));
        start = end + 1;
    }
    return tokens;
}

bool contains_normalized(std::string_view haystack, std::string_view needle) {
    if (needle.empty()) return true;
    return normalize(haystack).find(needle) != std::string::npos;
}

int find_token_sequence(const std::vector<std::string>& tokens,
                        const std::vector<std::string>& phrase) {
    if (phrase.empty() || phrase.size() > tokens.size()) return -1;
    for (std::size_t i = 0; i + phrase.size() <= tokens.size(); ++i) {
        bool match = true;
        for (std::size_t j = 0; j < phrase.size(); ++j) {
            if (tokens[i + j] != phrase[j]) {
                match = false;
                break;
            }
        }
        if (match) return static_cast<int>(i);
    }
    return -1;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) out.append(sep);
        out.append(parts[i]);
    }
    return out;
}

}  // namespace casetrain::text
