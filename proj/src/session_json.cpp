#include "casetrain/session_json.hpp"

#include "casetrain/errors.hpp"

namespace casetrain {

namespace {

[[noreturn]] void bad(const std::string& what) {
    throw Error(ErrorCode::SchemaError, what);
}

template <typename Parser>
auto parse_enum(const ordered_json& j, const char* key, Parser parser, const char* what) {
    const std::string s = j.at(key).get<std::string>();
    auto value = parser(s);
    if (!value) bad(std::string("unknown ") + what + " \"" + s + "\"");
    return *value;
}

ordered_json shape_to_json(const Annotation& annotation) {
    ordered_json j;
    if (const auto* rect = std::get_if<RectShape>(&annotation.shape)) {
        j["type"] = "rect";
        j["x"] = rect->x;
        j["y"] = rect->y;
        j["w"] = rect->w;
        j["h"] = rect->h;
    } else {
        const auto& poly = std::get<PolylineShape>(annotation.shape);
        j["type"] = "polyline";
        j["points"] = ordered_json::array();
        for (const auto& p : poly.points) j["points"].push_back({p[0], p[1]});
    }
    return j;
}

Annotation annotation_from_json(const ordered_json& j) {
    Annotation annotation;
    annotation.packet_id = j.at("packet_id").get<std::string>();
    const ordered_json& shape = j.at("shape");
    const std::string type = shape.at("type").get<std::string>();
    if (type == "rect") {
        annotation.shape = RectShape{shape.at("x").get<double>(), shape.at("y").get<double>(),
                                     shape.at("w").get<double>(), shape.at("h").get<double>()};
    } else if (type == "polyline") {
        PolylineShape poly;
        for (const auto& p : shape.at("points")) {
            poly.points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
        }
        annotation.shape = std::move(poly);
    } else {
        bad("unknown annotation shape \"" + type + "\"");
    }
    annotation.label = j.at("label").get<std::string>();
    annotation.note = j.at("note").get<std::string>();
    return annotation;
}

ordered_json annotation_to_json(const Annotation& annotation) {
    ordered_json j;
    j["packet_id"] = annotation.packet_id;
    j["shape"] = shape_to_json(annotation);
    j["label"] = annotation.label;
    j["note"] = annotation.note;
    return j;
}

}  // namespace

ordered_json inquiry_response_to_json(const InquiryResponse& response) {
    ordered_json j;
    j["needs_clarification"] = response.needs_clarification;
    j["clarification_text"] = response.clarification_text;
    j["verdicts"] = ordered_json::array();
    for (const auto& verdict : response.verdicts) {
        j["verdicts"].push_back({{"term", verdict.term},
                                 {"verdict", to_string(verdict.verdict)},
                                 {"details", verdict.details}});
    }
    return j;
}

InquiryResponse inquiry_response_from_json(const ordered_json& j) {
    InquiryResponse response;
    response.needs_clarification = j.at("needs_clarification").get<bool>();
    response.clarification_text = j.at("clarification_text").get<std::string>();
    for (const auto& vj : j.at("verdicts")) {
        SymptomVerdict verdict;
        verdict.term = vj.at("term").get<std::string>();
        verdict.verdict = parse_enum(vj, "verdict", parse_verdict, "verdict");
        verdict.details = vj.at("details").get<std::string>();
        response.verdicts.push_back(std::move(verdict));
    }
    return response;
}

ordered_json action_to_json(const Action& action) {
    ordered_json j;
    std::visit(
        [&](const auto& a) {
            using T = std::decay_t<decltype(a)>;
            if constexpr (std::is_same_v<T, InquireAction>) {
                j["type"] = "inquire";
                j["text"] = a.text;
                j["response"] = inquiry_response_to_json(a.response);
            } else if constexpr (std::is_same_v<T, AdvanceStepAction>) {
                j["type"] = "advance_step";
            } else if constexpr (std::is_same_v<T, RequestEvidenceAction>) {
                j["type"] = "request_evidence";
            } else if constexpr (std::is_same_v<T, DiagnosisAdd>) {
                j["type"] = "diagnosis_add";
                j["label"] = a.label;
                j["category"] = to_string(a.category);
                j["rationale"] = a.rationale;
            } else if constexpr (std::is_same_v<T, DiagnosisMove>) {
                j["type"] = "diagnosis_move";
                j["entry_id"] = a.entry_id;
                j["new_category"] = to_string(a.new_category);
                j["note"] = a.note;
            } else if constexpr (std::is_same_v<T, DiagnosisAttachEvidence>) {
                j["type"] = "diagnosis_attach_evidence";
                j["entry_id"] = a.entry_id;
                j["ref"] = a.ref;
            } else if constexpr (std::is_same_v<T, DiagnosisRemove>) {
                j["type"] = "diagnosis_remove";
                j["entry_id"] = a.entry_id;
                j["note"] = a.note;
            } else if constexpr (std::is_same_v<T, MindMapAddNode>) {
                j["type"] = "mindmap_add_node";
                j["factor"] = to_string(a.factor);
                j["text"] = a.text;
                j["source_ref"] = a.source_ref;
            } else if constexpr (std::is_same_v<T, MindMapEditNode>) {
                j["type"] = "mindmap_edit_node";
                j["node_id"] = a.node_id;
                j["text"] = a.text;
            } else if constexpr (std::is_same_v<T, MindMapRemoveNode>) {
                j["type"] = "mindmap_remove_node";
                j["node_id"] = a.node_id;
            } else if constexpr (std::is_same_v<T, AnnotateAction>) {
                j["type"] = "annotate";
                j["annotation"] = annotation_to_json(a.annotation);
            }
        },
        action);
    return j;
}

Action action_from_json(const ordered_json& j) {
    if (!j.is_object() || !j.contains("type")) bad("action payload needs a \"type\" key");
    const std::string type = j.at("type").get<std::string>();
    if (type == "inquire") {
        InquireAction a;
        a.text = j.at("text").get<std::string>();
        if (j.contains("response")) a.response = inquiry_response_from_json(j.at("response"));
        return a;
    }
    if (type == "advance_step") return AdvanceStepAction{};
    if (type == "request_evidence") return RequestEvidenceAction{};
    if (type == "diagnosis_add") {
        DiagnosisAdd a;
        a.label = j.at("label").get<std::string>();
        a.category = parse_enum(j, "category", parse_diagnosis_category, "diagnosis category");
        a.rationale = j.value("rationale", std::string{});
        return a;
    }
    if (type == "diagnosis_move") {
        DiagnosisMove a;
        a.entry_id = j.at("entry_id").get<std::string>();
        a.new_category =
            parse_enum(j, "new_category", parse_diagnosis_category, "diagnosis category");
        a.note = j.value("note", std::string{});
        return a;
    }
    if (type == "diagnosis_attach_evidence") {
        DiagnosisAttachEvidence a;
        a.entry_id = j.at("entry_id").get<std::string>();
        a.ref = j.at("ref").get<std::string>();
        return a;
    }
    if (type == "diagnosis_remove") {
        DiagnosisRemove a;
        a.entry_id = j.at("entry_id").get<std::string>();
        a.note = j.value("note", std::string{});
        return a;
    }
    if (type == "mindmap_add_node") {
        MindMapAddNode a;
        const std::string factor = j.at("factor").get<std::string>();
        auto parsed = parse_fila_factor(factor);
        if (!parsed) {
            throw Error(ErrorCode::UnknownFactor, "unknown mind map factor \"" + factor + "\"");
        }
        a.factor = *parsed;
        a.text = j.at("text").get<std::string>();
        a.source_ref = j.value("source_ref", std::string{});
        return a;
    }
    if (type == "mindmap_edit_node") {
        MindMapEditNode a;
        a.node_id = j.at("node_id").get<std::string>();
        a.text = j.at("text").get<std::string>();
        return a;
    }
    if (type == "mindmap_remove_node") {
        return MindMapRemoveNode{j.at("node_id").get<std::string>()};
    }
    if (type == "annotate") {
        return AnnotateAction{annotation_from_json(j.at("annotation"))};
    }
    bad("unknown action type \"" + type + "\"");
}

ordered_json session_to_json(const Session& session) {
    ordered_json j;
    j["id"] = session.id;
    j["case_id"] = session.case_id;
    j["step"] = to_string(session.step);
    j["created_at"] = session.created_at;
    j["updated_at"] = session.updated_at;
    j["next_entry_seq"] = session.next_entry_seq;
    j["next_node_seq"] = session.next_node_seq;

    j["transcript"] = ordered_json::array();
    for (const auto& entry : session.transcript) {
        ordered_json ej;
        ej["timestamp"] = entry.timestamp;
        ej["role"] = entry.role;
        ej["text"] = entry.text;
        ej["response"] =
            entry.response ? inquiry_response_to_json(*entry.response) : ordered_json(nullptr);
        j["transcript"].push_back(std::move(ej));
    }

    j["diagnosis_list"] = ordered_json::array();
    for (const auto& entry : session.diagnosis_list) {
        ordered_json ej;
        ej["id"] = entry.id;
        ej["label"] = entry.label;
        ej["category"] = to_string(entry.category);
        ej["rationale"] = entry.rationale;
        ej["removed"] = entry.removed;
        ej["evidence_refs"] = entry.evidence_refs;
        ej["history"] = ordered_json::array();
        for (const auto& h : entry.history) {
            ej["history"].push_back({{"timestamp", h.timestamp},
                                     {"category", to_string(h.category)},
                                     {"note", h.note},
                                     {"step", to_string(h.step)},
                                     {"removal", h.removal}});
        }
        j["diagnosis_list"].push_back(std::move(ej));
    }

    j["mind_map"] = ordered_json::object();
    for (FilaFactor factor : kFilaFactors) {
        ordered_json branch = ordered_json::array();
        for (const auto& node : session.mind_map.branch(factor)) {
            ordered_json nj;
            nj["id"] = node.id;
            nj["text"] = node.text;
            nj["source_ref"] = node.source_ref;
            nj["created_at_step"] = to_string(node.created_at_step);
            nj["edit_history"] = ordered_json::array();
            for (const auto& edit : node.edit_history) {
                nj["edit_history"].push_back({{"timestamp", edit.timestamp},
                                              {"text", edit.text},
                                              {"step", to_string(edit.step)}});
            }
            branch.push_back(std::move(nj));
        }
        j["mind_map"][std::string(to_string(factor))] = std::move(branch);
    }

    j["annotations"] = ordered_json::array();
    for (const auto& annotation : session.annotations) {
        j["annotations"].push_back(annotation_to_json(annotation));
    }

    j["revealed_packet_ids"] = session.revealed_packet_ids;
    return j;
}

Session session_from_json(const ordered_json& j) {
    Session session;
    session.id = j.at("id").get<std::string>();
    session.case_id = j.at("case_id").get<std::string>();
    session.step = parse_enum(j, "step", parse_step, "step");
    session.created_at = j.at("created_at").get<std::int64_t>();
    session.updated_at = j.at("updated_at").get<std::int64_t>();
    session.next_entry_seq = j.at("next_entry_seq").get<int>();
    session.next_node_seq = j.at("next_node_seq").get<int>();

    for (const auto& ej : j.at("transcript")) {
        TranscriptEntry entry;
        entry.timestamp = ej.at("timestamp").get<std::int64_t>();
        entry.role = ej.at("role").get<std::string>();
        entry.text = ej.at("text").get<std::string>();
        if (!ej.at("response").is_null()) {
            entry.response = inquiry_response_from_json(ej.at("response"));
        }
        session.transcript.push_back(std::move(entry));
    }

    for (const auto& ej : j.at("diagnosis_list")) {
        DiagnosisEntry entry;
        entry.id = ej.at("id").get<std::string>();
        entry.label = ej.at("label").get<std::string>();
        entry.category = parse_enum(ej, "category", parse_diagnosis_category, "diagnosis category");
        entry.rationale = ej.at("rationale").get<std::string>();
        entry.removed = ej.at("removed").get<bool>();
        entry.evidence_refs = ej.at("evidence_refs").get<std::vector<std::string>>();
        for (const auto& hj : ej.at("history")) {
            HistoryRecord h;
            h.timestamp = hj.at("timestamp").get<std::int64_t>();
            h.category = parse_enum(hj, "category", parse_diagnosis_category, "diagnosis category");
            h.note = hj.at("note").get<std::string>();
            h.step = parse_enum(hj, "step", parse_step, "step");
            h.removal = hj.at("removal").get<bool>();
            entry.history.push_back(std::move(h));
        }
        session.diagnosis_list.push_back(std::move(entry));
    }

    for (FilaFactor factor : kFilaFactors) {
        for (const auto& nj : j.at("mind_map").at(std::string(to_string(factor)))) {
            MindMapNode node;
            node.id = nj.at("id").get<std::string>();
            node.text = nj.at("text").get<std::string>();
            node.source_ref = nj.at("source_ref").get<std::string>();
            node.created_at_step = parse_enum(nj, "created_at_step", parse_step, "step");
            for (const auto& edit_j : nj.at("edit_history")) {
                NodeEdit edit;
                edit.timestamp = edit_j.at("timestamp").get<std::int64_t>();
                edit.text = edit_j.at("text").get<std::string>();
                edit.step = parse_enum(edit_j, "step", parse_step, "step");
                node.edit_history.push_back(std::move(edit));
            }
            session.mind_map.branch(factor).push_back(std::move(node));
        }
    }

    for (const auto& aj : j.at("annotations")) {
        session.annotations.push_back(annotation_from_json(aj));
    }
    session.revealed_packet_ids = j.at("revealed_packet_ids").get<std::vector<std::string>>();
    return session;
}

std::string session_snapshot_text(const Session& session) {
    return session_to_json(session).dump(2) + "\n";
}

std::string log_record_to_line(const LogRecord& record) {
    ordered_json j;
    j["seq"] = record.seq;
    j["timestamp"] = record.timestamp;
    j["actor"] = record.actor;
    if (record.is_start()) {
        j["action"] = "start";
        j["payload"] = {{"case_id", *record.start_case_id}};
    } else {
        ordered_json payload = action_to_json(*record.action);
        const std::string type = payload.at("type").get<std::string>();
        payload.erase("type");
        j["action"] = type;
        j["payload"] = std::move(payload);
    }
    return j.dump();
}

LogRecord log_record_from_line(const std::string& line, std::int64_t expected_seq) {
    ordered_json j;
    try {
        j = ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ReplayError,
                    "corrupt log line at seq " + std::to_string(expected_seq), e.what());
    }
    try {
        LogRecord record;
        record.seq = j.at("seq").get<std::int64_t>();
        if (record.seq != expected_seq) {
            throw Error(ErrorCode::ReplayError,
                        "log sequence gap: expected " + std::to_string(expected_seq) + ", found " +
                            std::to_string(record.seq));
        }
        record.timestamp = j.at("timestamp").get<std::int64_t>();
        record.actor = j.at("actor").get<std::string>();
        const std::string action = j.at("action").get<std::string>();
        ordered_json payload = j.at("payload");
        if (action == "start") {
            record.start_case_id = payload.at("case_id").get<std::string>();
        } else {
            payload["type"] = action;
            record.action = action_from_json(payload);
        }
        return record;
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw Error(ErrorCode::ReplayError,
                    "corrupt log record at seq " + std::to_string(expected_seq), e.what());
    }
}

Session replay_session_log(const CaseRecord& record, const std::string& session_id,
                           const std::vector<std::string>& lines) {
    if (lines.empty()) {
        throw Error(ErrorCode::ReplayError, "session log is empty", session_id);
    }
    LogRecord first = log_record_from_line(lines[0], 1);
    if (!first.is_start()) {
        throw Error(ErrorCode::ReplayError, "log does not begin with a start record", session_id);
    }
    if (*first.start_case_id != record.id) {
        throw Error(ErrorCode::ReplayError,
                    "log case id \"" + *first.start_case_id + "\" does not match \"" + record.id +
                        "\"");
    }
    Session session = start_session(session_id, record, first.timestamp);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        LogRecord rec = log_record_from_line(lines[i], static_cast<std::int64_t>(i + 1));
        if (rec.is_start()) {
            throw Error(ErrorCode::ReplayError,
                        "unexpected start record at seq " + std::to_string(rec.seq));
        }
        try {
            session = apply_action(record, std::move(session), *rec.action, rec.timestamp);
        } catch (const Error& e) {
            throw Error(ErrorCode::ReplayError,
                        "action at seq " + std::to_string(rec.seq) + " failed to replay: " +
                            e.what(),
                        e.detail());
        }
    }
    return session;
}

}  // namespace casetrain
