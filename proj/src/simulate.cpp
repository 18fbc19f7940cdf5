#include "casetrain/simulate.hpp"

#include <map>
#include <sstream>

#include "casetrain/errors.hpp"
#include "casetrain/text.hpp"

namespace casetrain {

namespace {

using ordered_json = nlohmann::ordered_json;

DiagnosisCategory category_arg(const ordered_json& step, const char* key) {
    const std::string s = step.at(key).get<std::string>();
    auto category = parse_diagnosis_category(s);
    if (!category) {
        throw Error(ErrorCode::SchemaError, "unknown diagnosis category \"" + s + "\"");
    }
    return *category;
}

std::string verdict_summary(const InquiryResponse& response) {
    if (response.needs_clarification) return "clarification requested";
    std::vector<std::string> parts;
    for (const auto& v : response.verdicts) {
        parts.push_back(v.term + "=" + std::string(to_string(v.verdict)));
    }
    return text::join(parts, ", ");
}

}  // namespace

SimulationScript parse_simulation_script(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::SchemaError, std::string("script is not valid JSON: ") + e.what());
    }
    SimulationScript script;
    try {
        script.case_id = j.at("case_id").get<std::string>();
        for (const auto& step : j.at("actions")) {
            if (!step.is_object() || !step.contains("op")) {
                throw Error(ErrorCode::SchemaError, "script step needs an \"op\" key");
            }
            script.steps.push_back(step);
        }
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw Error(ErrorCode::SchemaError, std::string("malformed script: ") + e.what());
    }
    return script;
}

SimulationResult run_simulation(Store& store, const SimulationScript& script) {
    SimulationResult result;
    auto corpus = store.corpus();
    const CaseRecord* record = corpus->find_case(script.case_id);
    if (record == nullptr) {
        throw Error(ErrorCode::NotFound, "script case is not in the corpus", script.case_id);
    }
    auto lexicon = store.lexicon();

    Session session = store.create_session(script.case_id);
    result.session_id = session.id;

    std::map<std::string, std::string> entry_ids;  // diagnosis label -> entry id
    auto entry_id_for = [&](const ordered_json& step) {
        const std::string label = step.at("label").get<std::string>();
        auto it = entry_ids.find(text::normalize(label));
        if (it == entry_ids.end()) {
            throw Error(ErrorCode::SchemaError,
                        "script references diagnosis \"" + label + "\" before adding it");
        }
        return it->second;
    };

    auto fail = [&](int step_number, std::string message) {
        result.ok = false;
        result.failed_step = step_number;
        result.message = std::move(message);
    };

    for (std::size_t i = 0; i < script.steps.size() && result.ok; ++i) {
        const ordered_json& step = script.steps[i];
        const int step_number = static_cast<int>(i) + 1;
        const std::string op = step.at("op").get<std::string>();
        std::ostringstream note;
        note << "step " << step_number << " [" << op << "] ";

        if (op == "inquire") {
            const std::string question = step.at("text").get<std::string>();
            InquireAction action = make_oracle_inquiry(*record, *lexicon, question);
            session = store.commit_action(session.id, action);
            note << verdict_summary(action.response);
            if (step.contains("expect")) {
                for (const auto& expectation : step.at("expect")) {
                    const std::string term =
                        text::normalize(expectation.at("term").get<std::string>());
                    const std::string wanted = expectation.at("verdict").get<std::string>();
                    const SymptomVerdict* found = nullptr;
                    for (const auto& v : action.response.verdicts) {
                        if (v.term == term) found = &v;
                    }
                    if (found == nullptr) {
                        fail(step_number, "no verdict for term \"" + term + "\"");
                        break;
                    }
                    if (to_string(found->verdict) != wanted) {
                        fail(step_number, "term \"" + term + "\": expected " + wanted + ", got " +
                                              std::string(to_string(found->verdict)));
                        break;
                    }
                }
            }
        } else if (op == "diagnosis_add") {
            DiagnosisAdd action;
            action.label = step.at("label").get<std::string>();
            action.category = category_arg(step, "category");
            action.rationale = step.value("rationale", std::string{});
            session = store.commit_action(session.id, action);
            entry_ids[text::normalize(action.label)] = session.diagnosis_list.back().id;
            note << action.label;
        } else if (op == "diagnosis_move") {
            DiagnosisMove action;
            action.entry_id = entry_id_for(step);
            action.new_category = category_arg(step, "category");
            action.note = step.value("note", std::string{});
            session = store.commit_action(session.id, action);
            note << action.entry_id << " -> " << to_string(action.new_category);
        } else if (op == "diagnosis_attach") {
            DiagnosisAttachEvidence action;
            action.entry_id = entry_id_for(step);
            action.ref = step.at("ref").get<std::string>();
            session = store.commit_action(session.id, action);
            note << action.entry_id << " += " << action.ref;
        } else if (op == "diagnosis_remove") {
            DiagnosisRemove action;
            action.entry_id = entry_id_for(step);
            action.note = step.value("note", std::string{});
            session = store.commit_action(session.id, action);
            note << action.entry_id;
        } else if (op == "mindmap_add") {
            MindMapAddNode action;
            const std::string factor = step.at("factor").get<std::string>();
            auto parsed = parse_fila_factor(factor);
            if (!parsed) {
                throw Error(ErrorCode::UnknownFactor, "unknown mind map factor \"" + factor + "\"");
            }
            action.factor = *parsed;
            action.text = step.at("text").get<std::string>();
            action.source_ref = step.value("source_ref", std::string{});
            session = store.commit_action(session.id, action);
            note << factor;
        } else if (op == "advance") {
            session = store.commit_action(session.id, AdvanceStepAction{});
            note << "now at " << to_string(session.step);
        } else if (op == "evidence") {
            session = store.commit_action(session.id, RequestEvidenceAction{});
            const EvidencePacket* packet = record->packet_by_id(session.revealed_packet_ids.back());
            note << "revealed " << (packet ? packet->title : std::string("?"));
            if (step.contains("expect_title") && packet != nullptr &&
                packet->title != step.at("expect_title").get<std::string>()) {
                fail(step_number, "expected packet \"" +
                                      step.at("expect_title").get<std::string>() + "\", got \"" +
                                      packet->title + "\"");
            }
        } else if (op == "annotate") {
            Annotation annotation;
            annotation.packet_id = step.at("packet_id").get<std::string>();
            if (step.contains("rect")) {
                const auto& r = step.at("rect");
                annotation.shape = RectShape{r.at(0).get<double>(), r.at(1).get<double>(),
                                             r.at(2).get<double>(), r.at(3).get<double>()};
            } else {
                PolylineShape poly;
                for (const auto& p : step.at("points")) {
                    poly.points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
                }
                annotation.shape = std::move(poly);
            }
            annotation.label = step.at("label").get<std::string>();
            annotation.note = step.value("note", std::string{});
            session = store.commit_action(session.id, AnnotateAction{annotation});
            note << annotation.label;
        } else if (op == "assert_step") {
            const std::string wanted = step.at("step").get<std::string>();
            note << "step is " << to_string(session.step);
            if (to_string(session.step) != wanted) {
                fail(step_number, "expected step " + wanted + ", got " +
                                      std::string(to_string(session.step)));
            }
        } else if (op == "assert_diagnosis") {
            const std::string label = step.at("label").get<std::string>();
            const DiagnosisEntry* found = nullptr;
            for (const auto& entry : session.diagnosis_list) {
                if (text::normalize(entry.label) == text::normalize(label)) found = &entry;
            }
            note << label;
            if (found == nullptr) {
                fail(step_number, "diagnosis \"" + label + "\" not on the list");
            } else if (step.contains("category") &&
                       to_string(found->category) != step.at("category").get<std::string>()) {
                fail(step_number, "diagnosis \"" + label + "\": expected " +
                                      step.at("category").get<std::string>() + ", got " +
                                      std::string(to_string(found->category)));
            } else if (found->removed != step.value("removed", false)) {
                fail(step_number, "diagnosis \"" + label + "\": unexpected removal state");
            }
        } else if (op == "report") {
            store.generate_and_store_report(session.id);
            note << "report generated";
        } else {
            throw Error(ErrorCode::SchemaError, "unknown script op \"" + op + "\"");
        }
        result.notes.push_back(note.str());
    }
    return result;
}

}  // namespace casetrain
