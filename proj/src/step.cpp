#include "casetrain/step.hpp"

namespace casetrain {

std::string_view to_string(Step step) {
    switch (step) {
        case Step::ProblemFormulation: return "problem_formulation";
        case Step::DiagnosisAnalysis: return "diagnosis_analysis";
        case Step::PrognosisReflection: return "prognosis_reflection";
    }
    return "problem_formulation";
}

std::optional<Step> parse_step(std::string_view s) {
    if (s == "problem_formulation") return Step::ProblemFormulation;
    if (s == "diagnosis_analysis") return Step::DiagnosisAnalysis;
    if (s == "prognosis_reflection") return Step::PrognosisReflection;
    return std::nullopt;
}

}  // namespace casetrain
