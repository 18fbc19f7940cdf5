#include "casetrain/inquiry.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "casetrain/text.hpp"

namespace casetrain {

namespace {

constexpr std::string_view kFixedPromptText =
    "You are a medical assistant. Based on the following patient case data, respond to the "
    "user's symptom inquiries by adhering to the following guidelines:\n"
    "\n"
    "1. Single Symptom Evaluation:\n"
    "   - If the patient's case data includes the mentioned symptom, respond with \"Yes\" and "
    "provide relevant details (e.g., severity, duration, related measurements).\n"
    "   - If the symptom is not present in the case data, respond with \"Irrelevant\".\n"
    "\n"
    "2. Multiple Symptoms Evaluation:\n"
    "   - If the user mentions multiple symptoms, evaluate each symptom individually.\n"
    "   - Present the results in a clear, organized list format. For example:\n"
    "     Symptom 1: Yes\n"
    "     Relevant Data: [Details]\n"
    "\n"
    "     Symptom 2: Irrelevant\n"
    "\n"
    "     Symptom 3: Yes\n"
    "     Relevant Data: [Details]\n"
    "\n"
    "3. Response Format:\n"
    "   - Ensure responses are clear, concise, and professionally formatted.\n"
    "   - Use bullet points or numbered lists for multiple symptoms to enhance readability.\n"
    "\n"
    "4. Language and Tone:\n"
    "   - Maintain a professional and objective tone.\n"
    "   - Avoid subjective judgments or ambiguous language.\n"
    "\n"
    "5. Error Handling:\n"
    "   - If the user's input is unclear or does not specify a symptom, respond with a "
    "clarifying question. For example: \"Could you please specify the symptom you are "
    "inquiring about?\"\n"
    "\n"
    "Example Scenario:\n"
    "\n"
    "- User Input: \"Does the patient have a fever and headache?\"\n"
    "\n"
    "- Possible Response:\n"
    "  Fever: Yes\n"
    "  Relevant Data: Temperature is 38.5°C, duration of 3 days.\n"
    "\n"
    "  Headache: Irrelevant\n"
    "\n"
    "Ensure that all responses strictly follow the above guidelines to maintain consistency "
    "and reliability.\n";

}  // namespace

std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::Present: return "present";
        case Verdict::Denied: return "denied";
        case Verdict::NotInRecord: return "not_in_record";
    }
    return "not_in_record";
}

std::optional<Verdict> parse_verdict(std::string_view s) {
    if (s == "present") return Verdict::Present;
    if (s == "denied") return Verdict::Denied;
    if (s == "not_in_record") return Verdict::NotInRecord;
    return std::nullopt;
}

void Lexicon::add(std::string_view surface, std::string_view canonical) {
    std::vector<std::string> tokens = text::tokenize(surface);
    if (tokens.empty()) return;
    for (const auto& entry : entries_) {
        if (entry.tokens == tokens) return;  // first mapping wins
    }
    entries_.push_back({std::move(tokens), text::normalize(canonical)});
}

void Lexicon::add_finding(const Finding& finding) {
    add(finding.term, finding.term);
    for (const auto& synonym : finding.synonyms) add(synonym, finding.term);
}

void Lexicon::add_case(const CaseRecord& record) {
    for (const auto& finding : record.findings) add_finding(finding);
}

Lexicon Lexicon::from_corpus(const Corpus& corpus) {
    Lexicon lexicon;
    for (const auto& record : corpus.cases()) lexicon.add_case(record);
    return lexicon;
}

Lexicon Lexicon::from_case(const CaseRecord& record) {
    Lexicon lexicon;
    lexicon.add_case(record);
    return lexicon;
}

std::optional<std::string> Lexicon::canonical_of(std::string_view surface) const {
    std::vector<std::string> tokens = text::tokenize(surface);
    for (const auto& entry : entries_) {
        if (entry.tokens == tokens) return entry.canonical;
    }
    return std::nullopt;
}

std::vector<std::string> Lexicon::canonical_terms() const {
    std::set<std::string> unique;
    for (const auto& entry : entries_) unique.insert(entry.canonical);
    return {unique.begin(), unique.end()};
}

std::vector<std::string> extract_terms(std::string_view raw_text, const Lexicon& lexicon) {
    const std::vector<std::string> tokens = text::tokenize(raw_text);

    struct Occurrence {
        int position;
        int length;
        std::string canonical;
    };
    // Best (earliest, then longest) occurrence per canonical term.
    std::vector<Occurrence> best;
    for (const auto& entry : lexicon.entries()) {
        int pos = text::find_token_sequence(tokens, entry.tokens);
        if (pos < 0) continue;
        auto it = std::find_if(best.begin(), best.end(), [&](const Occurrence& o) {
            return o.canonical == entry.canonical;
        });
        Occurrence occ{pos, static_cast<int>(entry.tokens.size()), entry.canonical};
        if (it == best.end()) {
            best.push_back(std::move(occ));
        } else if (occ.position < it->position ||
                   (occ.position == it->position && occ.length > it->length)) {
            *it = std::move(occ);
        }
    }
    std::sort(best.begin(), best.end(), [](const Occurrence& a, const Occurrence& b) {
        if (a.position != b.position) return a.position < b.position;
        if (a.length != b.length) return a.length > b.length;
        return a.canonical < b.canonical;
    });

    std::vector<std::string> terms;
    terms.reserve(best.size());
    for (auto& occ : best) terms.push_back(std::move(occ.canonical));
    return terms;
}

SymptomVerdict evaluate_symptom(const CaseRecord& record, std::string_view canonical_term) {
    const std::string wanted = text::normalize(canonical_term);
    for (const auto& finding : record.findings) {
        if (text::normalize(finding.term) != wanted) continue;
        if (finding.polarity == Polarity::Present) {
            // Present verdicts always carry details.
            std::string details = finding.details.empty()
                                      ? "Patient reports " + finding.term + "."
                                      : finding.details;
            return {wanted, Verdict::Present, std::move(details)};
        }
        return {wanted, Verdict::Denied, "Patient denies " + finding.term + "."};
    }
    return {wanted, Verdict::NotInRecord, ""};
}

InquiryResponse answer_inquiry(const CaseRecord& record, const Lexicon& lexicon,
                               std::string_view raw_text) {
    InquiryResponse response;
    const std::vector<std::string> terms = extract_terms(raw_text, lexicon);
    if (terms.empty()) {
        response.needs_clarification = true;
        response.clarification_text = std::string(kClarificationSentence);
        return response;
    }
    for (const auto& term : terms) {
        response.verdicts.push_back(evaluate_symptom(record, term));
    }
    return response;
}

std::string render_response_text(const InquiryResponse& response) {
    if (response.needs_clarification) return response.clarification_text;
    std::ostringstream out;
    bool first = true;
    for (const auto& verdict : response.verdicts) {
        if (!first) out << "\n";
        first = false;
        switch (verdict.verdict) {
            case Verdict::Present:
                out << verdict.term << ": Yes\nRelevant Data: " << verdict.details;
                break;
            case Verdict::Denied:
                out << verdict.term << ": Denied\nRelevant Data: " << verdict.details;
                break;
            case Verdict::NotInRecord:
                out << verdict.term << ": Irrelevant";
                break;
        }
    }
    return out.str();
}

std::string_view fixed_prompt_text() { return kFixedPromptText; }

RenderedPrompt render_case_prompt(const CaseRecord& record) {
    std::ostringstream out;
    out << kFixedPromptText;
    out << "\nPatient Case Data:\n\nFindings:\n";
    if (record.findings.empty()) {
        out << "(none)\n";
    }
    for (const auto& finding : record.findings) {
        out << "- " << finding.term;
        if (!finding.synonyms.empty()) {
            out << " (also known as: " << text::join(finding.synonyms, ", ") << ")";
        }
        out << " | " << to_string(finding.polarity);
        if (finding.polarity == Polarity::Present && !finding.details.empty()) {
            out << " | details: " << finding.details;
        }
        out << "\n";
    }
    out << "\nEvidence:\n";
    if (record.packets.empty()) {
        out << "(none)\n";
    }
    for (const EvidencePacket* packet : record.packets_in_reveal_order()) {
        out << "- " << packet->title << " [" << to_string(packet->kind) << "]\n";
        switch (packet->kind) {
            case PacketKind::ExamText:
                out << "  " << packet->text << "\n";
                break;
            case PacketKind::ImagingStudy:
                out << "  " << packet->report << "\n";
                break;
            case PacketKind::LabPanel:
                for (const auto& lab : packet->labs) {
                    out << "  " << lab.item << ": ";
                    if (lab.numeric()) {
                        out << std::get<double>(lab.value) << " " << lab.unit << " (normal range "
                            << lab.range_lo << " to " << lab.range_hi << ")";
                    } else {
                        out << std::get<std::string>(lab.value) << " (expected " << lab.expected
                            << ")";
                    }
                    out << "\n";
                }
                break;
        }
    }
    return {out.str()};
}

}  // namespace casetrain
