#include <doctest.h>

#include "casetrain/errors.hpp"
#include "casetrain/inquiry.hpp"
#include "casetrain/prompts.hpp"
#include "testutil.hpp"

using namespace casetrain;

namespace {

SlotBindings full_bindings() {
    SlotBindings bindings;
    bindings.bind("symptoms", {"neck pain", "ulnar numbness"})
        .bind("facts", {"neck pain", "ulnar numbness"})
        .bind("findings", {"MRI examination"})
        .bind("updated data", {"MRI examination"})
        .bind("inferences and hypotheses", {"Cervical Disc Herniation", "Stroke"})
        .bind("descriptions", {"the case card"})
        .bind("prognosis", {"the prognosis notes"});
    return bindings;
}

/// Independent template fill used to cross-check instantiation.
std::string naive_fill(std::string text, const SlotBindings& bindings) {
    for (const auto& [slot, values] : bindings.values) {
        std::string joined;
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i > 0) joined += ", ";
            joined += values[i];
        }
        const std::string token = "<" + slot + ">";
        std::size_t pos;
        while ((pos = text.find(token)) != std::string::npos) {
            text.replace(pos, token.size(), joined);
        }
    }
    return text;
}

}  // namespace

TEST_CASE("eleven cells hold questions and one is deliberately empty") {
    int non_empty = 0;
    for (Step step : {Step::ProblemFormulation, Step::DiagnosisAnalysis, Step::PrognosisReflection}) {
        for (FilaFactor factor : kFilaFactors) {
            non_empty += static_cast<int>(!question_templates(step, factor).empty());
        }
    }
    CHECK(non_empty == 11);
    CHECK(question_templates(Step::ProblemFormulation, FilaFactor::LearningIssues).empty());
}

TEST_CASE("the problem-formulation ideas question names the symptoms") {
    const auto questions = instantiate_prompting_question(
        Step::ProblemFormulation, FilaFactor::Ideas, full_bindings());
    REQUIRE(questions.size() == 1);
    CHECK(questions[0] ==
          "Based on the fact that the patient exhibits neck pain, ulnar numbness, what "
          "inferences and hypotheses do you have?");
}

TEST_CASE("the empty cell instantiates to an empty list") {
    CHECK(instantiate_prompting_question(Step::ProblemFormulation, FilaFactor::LearningIssues,
                                         full_bindings())
              .empty());
}

TEST_CASE("the analysis facts question carries the updated data") {
    const auto questions = instantiate_prompting_question(Step::DiagnosisAnalysis,
                                                          FilaFactor::Facts, full_bindings());
    REQUIRE(questions.size() == 1);
    CHECK(questions[0].find("MRI examination") != std::string::npos);
}

TEST_CASE("instantiation agrees with a naive template fill on every cell") {
    const SlotBindings bindings = full_bindings();
    for (Step step : {Step::ProblemFormulation, Step::DiagnosisAnalysis, Step::PrognosisReflection}) {
        for (FilaFactor factor : kFilaFactors) {
            const auto& templates = question_templates(step, factor);
            const auto filled = instantiate_prompting_question(step, factor, bindings);
            REQUIRE(filled.size() == templates.size());
            for (std::size_t i = 0; i < templates.size(); ++i) {
                CHECK(filled[i] == naive_fill(templates[i], bindings));
            }
        }
    }
}

TEST_CASE("a missing binding raises MissingSlot") {
    SlotBindings empty;
    try {
        instantiate_prompting_question(Step::ProblemFormulation, FilaFactor::Ideas, empty);
        FAIL("expected MissingSlot");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MissingSlot);
        CHECK(e.detail() == "symptoms");
    }
}

TEST_CASE("a slot bound to an empty list renders as an empty insertion") {
    SlotBindings bindings = full_bindings();
    bindings.bind("findings", {});
    const auto questions =
        instantiate_prompting_question(Step::DiagnosisAnalysis, FilaFactor::Ideas, bindings);
    REQUIRE(questions.size() == 1);
    CHECK(questions[0].rfind("What can we infer from ,", 0) == 0);
}

TEST_CASE("the fixed prompt text matches the golden file byte for byte") {
    const std::string golden = casetrain::test::read_file(
        std::filesystem::path(CASETRAIN_TESTS_DIR) / "data" / "prompt_fixed_golden.txt");
    REQUIRE(!golden.empty());
    CHECK(std::string(fixed_prompt_text()) == golden);
}
