#include <doctest.h>

#include <set>

#include "casetrain/inquiry.hpp"
#include "casetrain/text.hpp"
#include "testutil.hpp"

using namespace casetrain;
using casetrain::test::CaseGenerator;

namespace {

struct Fixture {
    Corpus corpus = casetrain::test::load_fixture_corpus();
    Lexicon lexicon = Lexicon::from_corpus(corpus);

    const CaseRecord& record(const std::string& id) const {
        const CaseRecord* r = corpus.find_case(id);
        REQUIRE(r != nullptr);
        return *r;
    }
};

/// Independent term extraction: scan every lexicon entry against every token
/// position, then order by (first position, longer match, term).
std::vector<std::string> brute_force_extract(const std::string& raw, const Lexicon& lexicon) {
    const auto tokens = text::tokenize(raw);
    struct Hit {
        int pos;
        int len;
        std::string canonical;
    };
    std::vector<Hit> hits;
    for (const auto& entry : lexicon.entries()) {
        for (std::size_t start = 0; start + entry.tokens.size() <= tokens.size(); ++start) {
            bool match = true;
            for (std::size_t k = 0; k < entry.tokens.size(); ++k) {
                if (tokens[start + k] != entry.tokens[k]) {
                    match = false;
                    break;
                }
            }
            if (!match) continue;
            const int pos = static_cast<int>(start);
            const int len = static_cast<int>(entry.tokens.size());
            auto existing = std::find_if(hits.begin(), hits.end(), [&](const Hit& h) {
                return h.canonical == entry.canonical;
            });
            if (existing == hits.end()) {
                hits.push_back({pos, len, entry.canonical});
            } else if (pos < existing->pos || (pos == existing->pos && len > existing->len)) {
                *existing = {pos, len, entry.canonical};
            }
            break;  // later starts cannot improve this entry's first position
        }
    }
    std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
        if (a.pos != b.pos) return a.pos < b.pos;
        if (a.len != b.len) return a.len > b.len;
        return a.canonical < b.canonical;
    });
    std::vector<std::string> out;
    for (const auto& h : hits) out.push_back(h.canonical);
    return out;
}

}  // namespace

TEST_CASE("extract_terms finds fever and headache in the classic question") {
    const Fixture fx;
    const auto terms = extract_terms("Does the patient have a fever and headache?", fx.lexicon);
    REQUIRE(terms.size() == 2);
    CHECK(terms[0] == "fever");
    CHECK(terms[1] == "headache");
}

TEST_CASE("extract_terms returns nothing for small talk") {
    const Fixture fx;
    CHECK(extract_terms("How are you today?", fx.lexicon).empty());
}

TEST_CASE("extract_terms deduplicates and keeps first-occurrence order") {
    const Fixture fx;
    const auto terms =
        extract_terms("any dizziness, blackouts or dizziness?", fx.lexicon);
    REQUIRE(terms.size() == 2);
    CHECK(terms[0] == "dizziness");
    CHECK(terms[1] == "blackouts");
}

TEST_CASE("extract_terms resolves synonyms to the canonical term") {
    const Fixture fx;
    const auto terms = extract_terms("Does she have pyrexia or vertigo?", fx.lexicon);
    REQUIRE(terms.size() == 2);
    CHECK(terms[0] == "fever");
    CHECK(terms[1] == "dizziness");
}

TEST_CASE("extract_terms matches the brute-force scan on random questions") {
    const Fixture fx;
    CaseGenerator generator(4242);
    auto& rng = generator.rng();
    const auto& pool = CaseGenerator::term_pool();

    Lexicon lexicon;
    for (std::size_t i = 0; i < pool.size(); i += 2) lexicon.add(pool[i], pool[i]);
    lexicon.add("fever", "fever");
    lexicon.add("high temperature", "fever");

    const std::vector<std::string> filler = {"does", "the", "patient", "report", "any",
                                             "or",   "and", "also",    "について", "neck"};
    for (int trial = 0; trial < 300; ++trial) {
        std::string question;
        const int words = 1 + static_cast<int>(rng() % 12);
        for (int w = 0; w < words; ++w) {
            if (!question.empty()) question += " ";
            if (rng() % 3 == 0) {
                question += pool[rng() % pool.size()];
            } else if (rng() % 5 == 0) {
                question += "high temperature";
            } else {
                question += filler[rng() % filler.size()];
            }
        }
        CAPTURE(question);
        CHECK(extract_terms(question, lexicon) == brute_force_extract(question, lexicon));
    }
}

TEST_CASE("evaluate_symptom verdicts for the fever case") {
    const Fixture fx;
    const CaseRecord& fever_case = fx.record("case-fever-001");

    const SymptomVerdict present = evaluate_symptom(fever_case, "fever");
    CHECK(present.verdict == Verdict::Present);
    CHECK(present.details == "Temperature is 38.5°C, duration of 3 days.");

    const SymptomVerdict missing = evaluate_symptom(fever_case, "headache");
    CHECK(missing.verdict == Verdict::NotInRecord);
    CHECK(missing.details.empty());

    const SymptomVerdict denied = evaluate_symptom(fx.record("case-cervical-001"), "blackouts");
    CHECK(denied.verdict == Verdict::Denied);
    CHECK(denied.details == "Patient denies blackouts.");
}

TEST_CASE("answer_inquiry mirrors the worked scenario") {
    const Fixture fx;
    const CaseRecord& fever_case = fx.record("case-fever-001");

    const InquiryResponse response =
        answer_inquiry(fever_case, fx.lexicon, "Does the patient have a fever and headache?");
    CHECK_FALSE(response.needs_clarification);
    REQUIRE(response.verdicts.size() == 2);
    CHECK(response.verdicts[0].term == "fever");
    CHECK(response.verdicts[0].verdict == Verdict::Present);
    CHECK(response.verdicts[1].term == "headache");
    CHECK(response.verdicts[1].verdict == Verdict::NotInRecord);
}

TEST_CASE("empty or unparseable questions get the fixed clarification sentence") {
    const Fixture fx;
    const CaseRecord& fever_case = fx.record("case-fever-001");
    for (const char* question : {"", "How are you feeling about all this?"}) {
        const InquiryResponse response = answer_inquiry(fever_case, fx.lexicon, question);
        CHECK(response.needs_clarification);
        CHECK(response.verdicts.empty());
        CHECK(response.clarification_text ==
              "Could you please specify the symptom you are inquiring about?");
    }
}

TEST_CASE("the walkthrough denial inquiry yields three denied verdicts") {
    const Fixture fx;
    const InquiryResponse response = answer_inquiry(
        fx.record("case-cervical-001"), fx.lexicon, "blackouts, sudden falls, dizziness");
    REQUIRE(response.verdicts.size() == 3);
    for (const auto& verdict : response.verdicts) CHECK(verdict.verdict == Verdict::Denied);
}

TEST_CASE("answer_inquiry is a pure function of record and text") {
    const Fixture fx;
    const CaseRecord& record = fx.record("case-cervical-001");
    const std::string question = "Any dizziness or neck pain?";
    const InquiryResponse a = answer_inquiry(record, fx.lexicon, question);
    const InquiryResponse b = answer_inquiry(record, fx.lexicon, question);
    CHECK(a == b);
}

TEST_CASE("oracle soundness across the whole fixture corpus") {
    const Fixture fx;
    for (const auto& record : fx.corpus.cases()) {
        std::set<std::string> case_terms;
        for (const auto& finding : record.findings) {
            case_terms.insert(text::normalize(finding.term));
        }
        for (const auto& term : fx.lexicon.canonical_terms()) {
            const SymptomVerdict verdict = evaluate_symptom(record, term);
            if (case_terms.contains(term)) {
                CHECK(verdict.verdict != Verdict::NotInRecord);
            } else {
                CHECK(verdict.verdict == Verdict::NotInRecord);
            }
        }
    }
}

TEST_CASE("render_case_prompt carries the fixed guideline text") {
    const Fixture fx;
    const RenderedPrompt prompt = render_case_prompt(fx.record("case-fever-001"));
    CHECK(prompt.text.find("respond with \"Irrelevant\"") != std::string::npos);
    CHECK(prompt.text.find("Could you please specify the symptom you are inquiring about?") !=
          std::string::npos);
    CHECK(prompt.text.rfind(fixed_prompt_text(), 0) == 0);
}

TEST_CASE("render_case_prompt is byte-stable") {
    const Fixture fx;
    const CaseRecord& record = fx.record("case-cervical-001");
    const std::string first = render_case_prompt(record).text;
    for (int i = 0; i < 20; ++i) CHECK(render_case_prompt(record).text == first);
}

TEST_CASE("render_case_prompt handles an empty record") {
    CaseRecord record;
    record.id = "empty";
    const RenderedPrompt prompt = render_case_prompt(record);
    CHECK(prompt.text.find("Findings:\n(none)") != std::string::npos);
    CHECK(prompt.text.find("Evidence:\n(none)") != std::string::npos);
}

TEST_CASE("negative symptoms are absent from the narrative yet reachable by asking") {
    const Fixture fx;
    for (const auto& record : fx.corpus.cases()) {
        for (const auto& finding : record.findings) {
            if (finding.polarity != Polarity::Denied) continue;
            CHECK_FALSE(
                text::contains_normalized(record.initial_narrative, text::normalize(finding.term)));
            CHECK(evaluate_symptom(record, text::normalize(finding.term)).verdict ==
                  Verdict::Denied);
        }
    }
}
