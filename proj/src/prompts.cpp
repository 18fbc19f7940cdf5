#include "casetrain/prompts.hpp"

#include "casetrain/errors.hpp"
#include "casetrain/text.hpp"

namespace casetrain {

namespace {

struct Cell {
    Step step;
    FilaFactor factor;
    const char* question;  // nullptr marks the deliberately empty cell
};

// clang-format off
const Cell kCells[] = {
    {Step::ProblemFormulation, FilaFactor::Facts,
     "What facts are described in the current case? How can the <facts> be described in "
     "clinical syndrome descriptions?"},
    {Step::DiagnosisAnalysis, FilaFactor::Facts,
     "What results do the <updated data> present, and what facts and findings do they indicate?"},
    {Step::PrognosisReflection, FilaFactor::Facts,
     "What key points about prognosis are mentioned in the case? Are the <facts> related to "
     "diagnosis and treatment consistent with your previous analysis? What inconsistencies or "
     "overlooked aspects exist?"},

    {Step::ProblemFormulation, FilaFactor::Ideas,
     "Based on the fact that the patient exhibits <symptoms>, what inferences and hypotheses "
     "do you have?"},
    {Step::DiagnosisAnalysis, FilaFactor::Ideas,
     "What can we infer from <findings>, and how do they help you update the problem "
     "representation and reasoning?"},
    {Step::PrognosisReflection, FilaFactor::Ideas,
     "What caused the inconsistencies and overlooked of <facts>? Which part of the constructed "
     "logical chain caused these problems?"},

    {Step::ProblemFormulation, FilaFactor::LearningIssues, nullptr},
    {Step::DiagnosisAnalysis, FilaFactor::LearningIssues,
     "Are the <descriptions> of the patient consistent with your problem representation? Is "
     "the <updated data> consistent with your previous action plans?"},
    {Step::PrognosisReflection, FilaFactor::LearningIssues,
     "What aspects were previously overlooked and needs consideration during <prognosis>? What "
     "was learned and strengthened from the analysis? What issues were identified and need "
     "further improvement?"},

    {Step::ProblemFormulation, FilaFactor::ActionPlans,
     "According to the <inferences and hypotheses>, what should the next action plans be? You "
     "may consider conducting specific examinations or treatments."},
    {Step::DiagnosisAnalysis, FilaFactor::ActionPlans,
     "Based on the above analysis and reasoning, what further action plans should be "
     "considered? You may consider conducting specific examinations or treatments."},
    {Step::PrognosisReflection, FilaFactor::ActionPlans,
     "What are the targeted plans for further improvement and practice identified from the "
     "analysis?"},
};
// clang-format on

}  // namespace

std::string_view to_string(FilaFactor factor) {
    switch (factor) {
        case FilaFactor::Facts: return "facts";
        case FilaFactor::Ideas: return "ideas";
        case FilaFactor::LearningIssues: return "learning_issues";
        case FilaFactor::ActionPlans: return "action_plans";
    }
    return "facts";
}

std::optional<FilaFactor> parse_fila_factor(std::string_view s) {
    if (s == "facts") return FilaFactor::Facts;
    if (s == "ideas") return FilaFactor::Ideas;
    if (s == "learning_issues") return FilaFactor::LearningIssues;
    if (s == "action_plans") return FilaFactor::ActionPlans;
    return std::nullopt;
}

const std::vector<std::string>& question_templates(Step step, FilaFactor factor) {
    static const auto* table = [] {
        auto* t = new std::map<std::pair<Step, FilaFactor>, std::vector<std::string>>;
        for (const Cell& cell : kCells) {
            auto& bucket = (*t)[{cell.step, cell.factor}];
            if (cell.question != nullptr) bucket.emplace_back(cell.question);
        }
        return t;
    }();
    return table->at({step, factor});
}

std::vector<std::string> instantiate_prompting_question(Step step, FilaFactor factor,
                                                        const SlotBindings& bindings) {
    std::vector<std::string> out;
    for (const std::string& tmpl : question_templates(step, factor)) {
        std::string result;
        std::size_t pos = 0;
        while (pos < tmpl.size()) {
            std::size_t open = tmpl.find('<', pos);
            if (open == std::string::npos) {
                result.append(tmpl, pos, std::string::npos);
                break;
            }
            std::size_t close = tmpl.find('>', open);
            if (close == std::string::npos) {
                result.append(tmpl, pos, std::string::npos);
                break;
            }
            result.append(tmpl, pos, open - pos);
            const std::string slot = tmpl.substr(open + 1, close - open - 1);
            auto it = bindings.values.find(slot);
            if (it == bindings.values.end()) {
                throw Error(ErrorCode::MissingSlot, "no binding for slot <" + slot + ">", slot);
            }
            result.append(text::join(it->second, ", "));
            pos = close + 1;
        }
        out.push_back(std::move(result));
    }
    return out;
}

}  // namespace casetrain
