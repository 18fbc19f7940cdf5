#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "casetrain/case_types.hpp"
#include "casetrain/corpus.hpp"

namespace casetrain {

/// Fixed clarification sentence returned when a question names no known
/// symptom.
inline constexpr std::string_view kClarificationSentence =
    "Could you please specify the symptom you are inquiring about?";

enum class Verdict { Present, Denied, NotInRecord };

std::string_view to_string(Verdict v);
std::optional<Verdict> parse_verdict(std::string_view s);

struct SymptomVerdict {
    std::string term;     ///< canonical term
    Verdict verdict;
    std::string details;  ///< nonempty for Present, denial sentence for Denied

    bool operator==(const SymptomVerdict&) const = default;
};

struct InquiryResponse {
    std::vector<SymptomVerdict> verdicts;
    bool needs_clarification = false;
    std::string clarification_text;

    bool operator==(const InquiryResponse&) const = default;
};

/// Maps every finding term and synonym in a corpus to its canonical term.
/// Matching is by whole-token sequence on normalized text.
class Lexicon {
public:
    struct Entry {
        std::vector<std::string> tokens;  ///< normalized surface form
        std::string canonical;            ///< normalized canonical term
    };

    /// First mapping for a surface form wins; later duplicates are ignored.
    void add(std::string_view surface, std::string_view canonical);
    void add_finding(const Finding& finding);
    void add_case(const CaseRecord& record);

    static Lexicon from_corpus(const Corpus& corpus);
    static Lexicon from_case(const CaseRecord& record);

    [[nodiscard]] const std::vector<Entry>& entries() const { return entries_; }

    /// Canonical term for an exact (normalized) surface form, if known.
    [[nodiscard]] std::optional<std::string> canonical_of(std::string_view surface) const;

    /// All canonical terms, sorted and deduplicated.
    [[nodiscard]] std::vector<std::string> canonical_terms() const;

private:
    std::vector<Entry> entries_;
};

/// Canonical terms whose surface forms occur in `raw_text` as whole-token
/// sequences, ordered by first occurrence (ties: longer match first, then
/// lexicographic), deduplicated.
std::vector<std::string> extract_terms(std::string_view raw_text, const Lexicon& lexicon);

/// Deterministic verdict for one canonical term against the structured record.
SymptomVerdict evaluate_symptom(const CaseRecord& record, std::string_view canonical_term);

/// The structured-QA oracle: extracts terms, evaluates each individually, and
/// falls back to the fixed clarification sentence when nothing was named.
InquiryResponse answer_inquiry(const CaseRecord& record, const Lexicon& lexicon,
                               std::string_view raw_text);

/// Transcript rendering of a response in the protocol's line format
/// ("term: Yes" / "Relevant Data: ..." / "term: Irrelevant").
std::string render_response_text(const InquiryResponse& response);

struct RenderedPrompt {
    std::string text;
};

/// The guideline portion of the QA system prompt. Byte-stable; pinned by a
/// golden file in the test suite.
std::string_view fixed_prompt_text();

/// Full system prompt: fixed guideline text plus a canonical serialization of
/// the record's findings and packets. Same record, same bytes.
RenderedPrompt render_case_prompt(const CaseRecord& record);

}  // namespace casetrain
