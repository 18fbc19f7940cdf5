#pragma once

#include <optional>
#include <string_view>

namespace casetrain {

/// The three analysis steps a session moves through, in order. The two
/// browsing steps before them (status identification, case selection) are
/// stateless and live in the corpus module.
enum class Step {
    ProblemFormulation,
    DiagnosisAnalysis,
    PrognosisReflection,
};

std::string_view to_string(Step step);
std::optional<Step> parse_step(std::string_view s);

}  // namespace casetrain
