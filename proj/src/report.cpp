#include "casetrain/report.hpp"

#include <numeric>
#include <sstream>

#include <json.hpp>

#include "casetrain/errors.hpp"
#include "casetrain/text.hpp"

namespace casetrain {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string join_lines(const std::vector<std::string>& lines) {
    return text::join(lines, "\n");
}

ExactMean make_mean(long long num, long long den) {
    const long long g = std::gcd(num, den);
    return {g == 0 ? num : num / g, g == 0 ? den : den / g};
}

// clang-format off
const std::array<RubricCriterion, kCriterionCount> kRubric = {{
    {1, CrcDimension::ConsiderSituation, "Description of Patient Situation",
     "Does the student describe the patient's condition, including chief complaint, symptoms, "
     "and background in a clinical context?"},
    {2, CrcDimension::ConsiderSituation, "Extraction of Key Information",
     "Does the student identify key issues, highlighting symptoms or signs relevant to the "
     "diagnosis?"},
    {3, CrcDimension::CollectCues, "Completeness of Information Collection",
     "Has the student gathered relevant clinical information (history, exam, labs)? Is it "
     "comprehensive?"},
    {4, CrcDimension::CollectCues, "Organization and Analysis of Information",
     "Is the information well-organized and integrated for analysis?"},
    {5, CrcDimension::ProcessInformation, "Depth of Information Processing",
     "Does the student analyze the information and extract diagnostic clues? Is reasoning "
     "clear?"},
    {6, CrcDimension::ProcessInformation, "Logical Consistency of Reasoning",
     "Does the student explain relationships between data points in a logical manner?"},
    {7, CrcDimension::IdentifyProblems, "Accuracy of Problem Identification",
     "Does the student accurately identify the core problem and explain differential "
     "diagnoses?"},
    {8, CrcDimension::IdentifyProblems, "Completeness of Differential Diagnosis",
     "Has the student proposed multiple diagnoses based on available data?"},
    {9, CrcDimension::EstablishGoals, "Reasonableness of Goal Setting",
     "Does the student set clear goals based on identified issues and the patient's needs?"},
    {10, CrcDimension::EstablishGoals, "Specificity and Feasibility of Goals",
     "Are the treatment goals specific, actionable, and achievable (e.g., symptom improvement, "
     "ruling out conditions)?"},
    {11, CrcDimension::TakeAction, "Appropriateness of Actions Taken",
     "Has the student developed an appropriate plan (e.g., treatment, further tests, "
     "follow-up)?"},
    {12, CrcDimension::TakeAction, "Evidence Support for Actions",
     "Does the student provide strong supporting evidence for chosen actions (e.g., "
     "literature, guidelines)?"},
    {13, CrcDimension::EvaluateOutcomes, "Comprehensiveness of Outcome Evaluation",
     "Does the student evaluate the outcomes comprehensively, considering treatment effects "
     "and patient responses?"},
    {14, CrcDimension::EvaluateOutcomes, "Reflection and Plan Adjustment",
     "Does the student reflect on the outcomes and adjust the plan if necessary?"},
    {15, CrcDimension::Reflect, "Depth of Reflection and Self-assessment",
     "Does the student self-reflect on strengths and weaknesses in their reasoning process?"},
    {16, CrcDimension::Reflect, "Integration and Application of Learning",
     "Can the student apply new learning to improve future clinical reasoning?"},
}};
// clang-format on

}  // namespace

std::string_view to_string(CrcDimension dimension) {
    switch (dimension) {
        case CrcDimension::ConsiderSituation: return "consider_situation";
        case CrcDimension::CollectCues: return "collect_cues";
        case CrcDimension::ProcessInformation: return "process_information";
        case CrcDimension::IdentifyProblems: return "identify_problems";
        case CrcDimension::EstablishGoals: return "establish_goals";
        case CrcDimension::TakeAction: return "take_action";
        case CrcDimension::EvaluateOutcomes: return "evaluate_outcomes";
        case CrcDimension::Reflect: return "reflect";
    }
    return "consider_situation";
}

std::optional<CrcDimension> parse_crc_dimension(std::string_view s) {
    for (CrcDimension d : kCrcDimensions) {
        if (to_string(d) == s) return d;
    }
    return std::nullopt;
}

std::string_view crc_dimension_title(CrcDimension dimension) {
    switch (dimension) {
        case CrcDimension::ConsiderSituation: return "Consider the Patient Situation";
        case CrcDimension::CollectCues: return "Collect Cues and Information";
        case CrcDimension::ProcessInformation: return "Process Information";
        case CrcDimension::IdentifyProblems: return "Identify Problems/Issues";
        case CrcDimension::EstablishGoals: return "Establish Goals";
        case CrcDimension::TakeAction: return "Take Action";
        case CrcDimension::EvaluateOutcomes: return "Evaluate Outcomes";
        case CrcDimension::Reflect: return "Reflect on the Process and New Learning";
    }
    return "";
}

CaseReport generate_report(const Session& session, const CaseRecord& record) {
    if (session.step != Step::PrognosisReflection) {
        throw Error(ErrorCode::WrongStep, "reports are generated at the reflection step",
                    std::string(to_string(session.step)));
    }

    CaseReport report;
    report.session_id = session.id;
    for (std::size_t i = 0; i < kCrcDimensionCount; ++i) {
        report.sections[i].dimension = kCrcDimensions[i];
    }

    // Consider the situation: the case card and presenting narrative.
    {
        std::vector<std::string> lines;
        if (!record.description.empty()) lines.push_back(record.description);
        if (!record.initial_narrative.empty()) lines.push_back(record.initial_narrative);
        report.section(CrcDimension::ConsiderSituation).auto_content = join_lines(lines);
    }

    // Collect cues: every verdict obtained through inquiry, then the evidence
    // that was revealed.
    {
        std::vector<std::string> lines;
        for (const auto& entry : session.transcript) {
            if (!entry.response || entry.response->needs_clarification) continue;
            for (const auto& verdict : entry.response->verdicts) {
                switch (verdict.verdict) {
                    case Verdict::Present:
                        lines.push_back(verdict.term + ": present (" + verdict.details + ")");
                        break;
                    case Verdict::Denied:
                        lines.push_back(verdict.term + ": denied");
                        break;
                    case Verdict::NotInRecord:
                        lines.push_back(verdict.term + ": not in record");
                        break;
                }
            }
        }
        for (const auto& packet_id : session.revealed_packet_ids) {
            if (const EvidencePacket* packet = record.packet_by_id(packet_id)) {
                lines.push_back("Evidence reviewed: " + packet->title);
            }
        }
        report.section(CrcDimension::CollectCues).auto_content = join_lines(lines);
    }

    // Process information: the facts and ideas branches of the mind map.
    {
        std::vector<std::string> lines;
        for (const auto& node : session.mind_map.branch(FilaFactor::Facts)) {
            lines.push_back("Fact: " + node.text);
        }
        for (const auto& node : session.mind_map.branch(FilaFactor::Ideas)) {
            lines.push_back("Idea: " + node.text);
        }
        report.section(CrcDimension::ProcessInformation).auto_content = join_lines(lines);
    }

    // Identify problems: the full diagnosis list, tombstones included.
    {
        std::vector<std::string> lines;
        for (const auto& entry : session.diagnosis_list) {
            std::string line = entry.label + " [" + std::string(to_string(entry.category)) + "]";
            if (entry.removed) line += " [removed]";
            if (!entry.rationale.empty()) line += " - " + entry.rationale;
            if (!entry.evidence_refs.empty()) {
                line += " (evidence: " + text::join(entry.evidence_refs, ", ") + ")";
            }
            lines.push_back(std::move(line));
        }
        report.section(CrcDimension::IdentifyProblems).auto_content = join_lines(lines);
    }

    // Goals and actions: action-plan nodes split by the step they were
    // created at.
    {
        std::vector<std::string> goals;
        std::vector<std::string> actions;
        for (const auto& node : session.mind_map.branch(FilaFactor::ActionPlans)) {
            if (node.created_at_step == Step::ProblemFormulation) {
                goals.push_back(node.text);
            } else if (node.created_at_step == Step::DiagnosisAnalysis) {
                actions.push_back(node.text);
            }
        }
        report.section(CrcDimension::EstablishGoals).auto_content = join_lines(goals);
        report.section(CrcDimension::TakeAction).auto_content = join_lines(actions);
    }

    // Evaluate outcomes: the final list measured against the ground truth,
    // plus every category move on record.
    {
        std::vector<std::string> lines;
        lines.push_back("Ground truth: " + record.ground_truth.diagnosis + ". Treatment: " +
                        record.ground_truth.treatment);
        std::vector<std::string> final_most_likely;
        bool matched = false;
        for (const auto& entry : session.diagnosis_list) {
            if (entry.removed || entry.category != DiagnosisCategory::MostLikely) continue;
            final_most_likely.push_back(entry.label);
            if (text::normalize(entry.label) == text::normalize(record.ground_truth.diagnosis)) {
                matched = true;
            }
        }
        lines.push_back("Final most likely: " +
                        (final_most_likely.empty() ? std::string("(none)")
                                                   : text::join(final_most_likely, ", ")));
        lines.push_back(matched
                            ? "The ground-truth diagnosis was ranked most likely."
                            : "The ground-truth diagnosis was not ranked most likely.");
        for (const auto& entry : session.diagnosis_list) {
            for (std::size_t i = 1; i < entry.history.size(); ++i) {
                const HistoryRecord& h = entry.history[i];
                if (h.removal) {
                    lines.push_back(entry.label + ": removed (" + h.note + ")");
                } else if (h.category != entry.history[i - 1].category) {
                    lines.push_back(entry.label + ": " +
                                    std::string(to_string(entry.history[i - 1].category)) +
                                    " -> " + std::string(to_string(h.category)) + " (" + h.note +
                                    ")");
                }
            }
        }
        report.section(CrcDimension::EvaluateOutcomes).auto_content = join_lines(lines);
    }

    // Reflect: learning issues plus whatever the learner changed after the
    // prognosis was shown.
    {
        std::vector<std::string> lines;
        for (const auto& node : session.mind_map.branch(FilaFactor::LearningIssues)) {
            lines.push_back("Learning issue: " + node.text);
        }
        for (const auto& entry : session.diagnosis_list) {
            for (const auto& h : entry.history) {
                if (h.step != Step::PrognosisReflection) continue;
                lines.push_back("Post-reveal diagnosis change: " + entry.label + " -> " +
                                std::string(to_string(h.category)) +
                                (h.removal ? " [removed]" : "") +
                                (h.note.empty() ? "" : " (" + h.note + ")"));
            }
        }
        for (FilaFactor factor : kFilaFactors) {
            for (const auto& node : session.mind_map.branch(factor)) {
                for (const auto& edit : node.edit_history) {
                    if (edit.step != Step::PrognosisReflection) continue;
                    if (factor == FilaFactor::LearningIssues &&
                        node.created_at_step == Step::PrognosisReflection &&
                        edit.text == node.edit_history.front().text) {
                        continue;  // already listed as a learning issue
                    }
                    lines.push_back("Post-reveal note (" + std::string(to_string(factor)) +
                                    "): " + edit.text);
                }
            }
        }
        report.section(CrcDimension::Reflect).auto_content = join_lines(lines);
    }

    return report;
}

std::string report_to_text(const CaseReport& report) {
    std::ostringstream out;
    out << "Case Analysis Report (session " << report.session_id << ")\n";
    for (std::size_t i = 0; i < kCrcDimensionCount; ++i) {
        const CrcSection& section = report.sections[i];
        out << "\n" << (i + 1) << ". " << crc_dimension_title(section.dimension) << "\n";
        if (!section.auto_content.empty()) out << section.auto_content << "\n";
        if (!section.learner_content.empty()) {
            out << "Learner notes:\n" << section.learner_content << "\n";
        }
        if (section.auto_content.empty() && section.learner_content.empty()) out << "(empty)\n";
    }
    return out.str();
}

nlohmann::ordered_json report_to_json(const CaseReport& report) {
    ordered_json j;
    j["session_id"] = report.session_id;
    j["sections"] = ordered_json::array();
    for (const auto& section : report.sections) {
        j["sections"].push_back({{"dimension", to_string(section.dimension)},
                                 {"title", crc_dimension_title(section.dimension)},
                                 {"auto_content", section.auto_content},
                                 {"learner_content", section.learner_content}});
    }
    return j;
}

CaseReport report_from_json(const nlohmann::ordered_json& j) {
    CaseReport report;
    report.session_id = j.at("session_id").get<std::string>();
    const auto& sections = j.at("sections");
    if (!sections.is_array() || sections.size() != kCrcDimensionCount) {
        throw Error(ErrorCode::SchemaError, "report must have exactly 8 sections");
    }
    for (std::size_t i = 0; i < kCrcDimensionCount; ++i) {
        const auto& sj = sections[i];
        auto dimension = parse_crc_dimension(sj.at("dimension").get<std::string>());
        if (!dimension || *dimension != kCrcDimensions[i]) {
            throw Error(ErrorCode::SchemaError, "report sections out of order",
                        sj.at("dimension").get<std::string>());
        }
        report.sections[i].dimension = *dimension;
        report.sections[i].auto_content = sj.at("auto_content").get<std::string>();
        report.sections[i].learner_content = sj.at("learner_content").get<std::string>();
    }
    return report;
}

const std::array<RubricCriterion, kCriterionCount>& rubric_criteria() { return kRubric; }

RaterSheet parse_rater_sheet(const std::string& document) {
    ordered_json j;
    try {
        j = ordered_json::parse(document);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::SchemaError, std::string("sheet is not valid JSON: ") + e.what());
    }
    RaterSheet sheet;
    try {
        sheet.rater_id = j.at("rater_id").get<std::string>();
        for (const auto& [key, value] : j.at("scores").items()) {
            int id = 0;
            try {
                id = std::stoi(key);
            } catch (...) {
                throw Error(ErrorCode::SchemaError, "criterion key is not a number", key);
            }
            if (!value.is_number_integer()) {
                throw Error(ErrorCode::SchemaError, "score must be an integer", key);
            }
            sheet.scores[id] = value.get<int>();
        }
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw Error(ErrorCode::SchemaError, std::string("malformed rater sheet: ") + e.what());
    }
    return sheet;
}

std::string ExactMean::display() const {
    // Round half up at two decimals, exactly.
    const long long scaled = num * 100;
    long long q = scaled / den;
    const long long r = scaled % den;
    if (2 * r >= den) ++q;
    std::ostringstream out;
    out << (q / 100) << "." << (q % 100 < 10 ? "0" : "") << (q % 100);
    return out.str();
}

AggregateScore aggregate_scores(const std::vector<RaterSheet>& sheets) {
    if (sheets.empty()) {
        throw Error(ErrorCode::InvalidScore, "at least one rater sheet is required");
    }
    for (const auto& sheet : sheets) {
        for (const auto& [id, score] : sheet.scores) {
            if (id < 1 || id > kCriterionCount) {
                throw Error(ErrorCode::InvalidScore,
                            "rater \"" + sheet.rater_id + "\" scored unknown criterion " +
                                std::to_string(id));
            }
            if (score < 0 || score > kMaxScore) {
                throw Error(ErrorCode::InvalidScore,
                            "rater \"" + sheet.rater_id + "\" criterion " + std::to_string(id) +
                                ": score " + std::to_string(score) + " outside 0.." +
                                std::to_string(kMaxScore));
            }
        }
        for (int id = 1; id <= kCriterionCount; ++id) {
            if (!sheet.scores.contains(id)) {
                throw Error(ErrorCode::InvalidScore, "rater \"" + sheet.rater_id +
                                                         "\" is missing criterion " +
                                                         std::to_string(id));
            }
        }
    }

    const long long raters = static_cast<long long>(sheets.size());
    AggregateScore aggregate;
    std::array<long long, kCriterionCount> sums{};
    for (int id = 1; id <= kCriterionCount; ++id) {
        long long sum = 0;
        for (const auto& sheet : sheets) sum += sheet.scores.at(id);
        sums[id - 1] = sum;
        aggregate.per_criterion[id - 1] = make_mean(sum, raters);
    }
    long long total = 0;
    for (std::size_t d = 0; d < kCrcDimensionCount; ++d) {
        const long long pair_sum = sums[2 * d] + sums[2 * d + 1];
        total += pair_sum;
        aggregate.per_dimension[d] = make_mean(pair_sum, 2 * raters);
    }
    aggregate.overall = make_mean(total, kCriterionCount * raters);
    return aggregate;
}

}  // namespace casetrain
