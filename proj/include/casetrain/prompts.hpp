#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "casetrain/step.hpp"

namespace casetrain {

/// The four scaffold branches shared by the prompting questions and the
/// mind map.
enum class FilaFactor { Facts, Ideas, LearningIssues, ActionPlans };

inline constexpr FilaFactor kFilaFactors[] = {
    FilaFactor::Facts,
    FilaFactor::Ideas,
    FilaFactor::LearningIssues,
    FilaFactor::ActionPlans,
};

std::string_view to_string(FilaFactor factor);
std::optional<FilaFactor> parse_fila_factor(std::string_view s);

/// Slot values for question instantiation. A slot bound to an empty list
/// renders as an empty string; only an absent slot is an error.
struct SlotBindings {
    std::map<std::string, std::vector<std::string>> values;

    SlotBindings& bind(std::string slot, std::vector<std::string> vals) {
        values[std::move(slot)] = std::move(vals);
        return *this;
    }
};

/// Built-in question templates per (step, factor) cell. Each populated cell
/// holds one template; the (ProblemFormulation, LearningIssues) cell is empty.
/// Slot tokens look like `<symptoms>` and are replaced verbatim by the
/// comma-joined bound values.
const std::vector<std::string>& question_templates(Step step, FilaFactor factor);

/// Instantiates every template of the cell. Throws Error(MissingSlot) when a
/// template references a slot with no binding.
std::vector<std::string> instantiate_prompting_question(Step step, FilaFactor factor,
                                                        const SlotBindings& bindings);

}  // namespace casetrain
