#include "casetrain/session.hpp"

#include <algorithm>
#include <set>

#include "casetrain/errors.hpp"
#include "casetrain/text.hpp"

namespace casetrain {

namespace {

void bump(Session& session, std::int64_t timestamp) {
    session.updated_at = std::max(session.updated_at, timestamp);
}

DiagnosisEntry* mutable_entry(Session& session, const std::string& entry_id) {
    for (auto& entry : session.diagnosis_list) {
        if (entry.id == entry_id) return &entry;
    }
    return nullptr;
}

MindMapNode* mutable_node(Session& session, const std::string& node_id) {
    for (auto& branch : session.mind_map.branches) {
        for (auto& node : branch) {
            if (node.id == node_id) return &node;
        }
    }
    return nullptr;
}

/// Refs have the form "transcript:<index>", "finding:<term>" or "packet:<id>".
void check_ref(const Session& session, const CaseRecord& record, const std::string& ref) {
    const auto colon = ref.find(':');
    const std::string kind = ref.substr(0, colon == std::string::npos ? ref.size() : colon);
    const std::string rest = colon == std::string::npos ? "" : ref.substr(colon + 1);
    if (kind == "transcript") {
        std::size_t index = 0;
        try {
            index = static_cast<std::size_t>(std::stoul(rest));
        } catch (...) {
            throw Error(ErrorCode::NotFound, "bad transcript reference", ref);
        }
        if (index >= session.transcript.size()) {
            throw Error(ErrorCode::NotFound, "transcript reference out of range", ref);
        }
        return;
    }
    if (kind == "finding") {
        const std::string wanted = text::normalize(rest);
        for (const auto& finding : record.findings) {
            if (text::normalize(finding.term) == wanted) return;
        }
        throw Error(ErrorCode::NotFound, "finding reference does not resolve", ref);
    }
    if (kind == "packet") {
        if (record.packet_by_id(rest) != nullptr) return;
        throw Error(ErrorCode::NotFound, "packet reference does not resolve", ref);
    }
    throw Error(ErrorCode::NotFound, "unknown reference kind", ref);
}

void check_geometry(const Annotation& annotation) {
    auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (const auto* rect = std::get_if<RectShape>(&annotation.shape)) {
        if (!in_unit(rect->x) || !in_unit(rect->y) || !in_unit(rect->w) || !in_unit(rect->h) ||
            rect->x + rect->w > 1.0 || rect->y + rect->h > 1.0) {
            throw Error(ErrorCode::GeometryError, "rectangle outside normalized image bounds");
        }
        return;
    }
    const auto& poly = std::get<PolylineShape>(annotation.shape);
    if (poly.points.size() < 2) {
        throw Error(ErrorCode::GeometryError, "polyline needs at least two points");
    }
    for (const auto& p : poly.points) {
        if (!in_unit(p[0]) || !in_unit(p[1])) {
            throw Error(ErrorCode::GeometryError, "polyline point outside normalized bounds");
        }
    }
}

struct Applier {
    const CaseRecord& record;
    Session& session;
    std::int64_t timestamp;

    void operator()(const InquireAction& action) {
        session.transcript.push_back({timestamp, "learner", action.text, std::nullopt});
        session.transcript.push_back(
            {timestamp, "system", render_response_text(action.response), action.response});
    }

    void operator()(const AdvanceStepAction&) {
        switch (session.step) {
            case Step::ProblemFormulation: {
                const bool has_hypothesis =
                    std::any_of(session.diagnosis_list.begin(), session.diagnosis_list.end(),
                                [](const DiagnosisEntry& e) { return !e.removed; });
                if (!has_hypothesis) {
                    throw Error(ErrorCode::PreconditionFailed, "diagnosis list empty",
                                "add at least one hypothesis before testing");
                }
                session.step = Step::DiagnosisAnalysis;
                break;
            }
            case Step::DiagnosisAnalysis:
                if (session.revealed_packet_ids.size() < record.packets.size()) {
                    throw Error(ErrorCode::PreconditionFailed, "unrevealed evidence",
                                std::to_string(record.packets.size() -
                                               session.revealed_packet_ids.size()) +
                                    " packet(s) left");
                }
                session.step = Step::PrognosisReflection;
                break;
            case Step::PrognosisReflection:
                throw Error(ErrorCode::InvalidTransition, "session already at the final step");
        }
    }

    void operator()(const RequestEvidenceAction&) {
        if (session.step != Step::DiagnosisAnalysis) {
            throw Error(ErrorCode::PreconditionFailed, "evidence is revealed during analysis",
                        std::string(to_string(session.step)));
        }
        const auto ordered = record.packets_in_reveal_order();
        if (session.revealed_packet_ids.size() >= ordered.size()) {
            throw Error(ErrorCode::Exhausted, "all evidence packets revealed");
        }
        const EvidencePacket* next = ordered[session.revealed_packet_ids.size()];
        session.revealed_packet_ids.push_back(next->id);
        session.transcript.push_back(
            {timestamp, "system", "Evidence revealed: " + next->title, std::nullopt});
    }

    void operator()(const DiagnosisAdd& action) {
        DiagnosisEntry entry;
        entry.id = "d" + std::to_string(session.next_entry_seq++);
        entry.label = action.label;
        entry.category = action.category;
        entry.rationale = action.rationale;
        entry.history.push_back(
            {timestamp, action.category, action.rationale, session.step, false});
        session.diagnosis_list.push_back(std::move(entry));
    }

    void operator()(const DiagnosisMove& action) {
        DiagnosisEntry* entry = mutable_entry(session, action.entry_id);
        if (entry == nullptr || entry->removed) {
            throw Error(ErrorCode::NotFound, "diagnosis entry not found", action.entry_id);
        }
        if (entry->category == action.new_category) {
            throw Error(ErrorCode::NoOpMove, "entry already in that category",
                        std::string(to_string(entry->category)));
        }
        entry->category = action.new_category;
        entry->history.push_back({timestamp, action.new_category, action.note, session.step, false});
    }

    void operator()(const DiagnosisAttachEvidence& action) {
        DiagnosisEntry* entry = mutable_entry(session, action.entry_id);
        if (entry == nullptr || entry->removed) {
            throw Error(ErrorCode::NotFound, "diagnosis entry not found", action.entry_id);
        }
        check_ref(session, record, action.ref);
        entry->evidence_refs.push_back(action.ref);
        entry->history.push_back(
            {timestamp, entry->category, "evidence attached: " + action.ref, session.step, false});
    }

    void operator()(const DiagnosisRemove& action) {
        DiagnosisEntry* entry = mutable_entry(session, action.entry_id);
        if (entry == nullptr || entry->removed) {
            throw Error(ErrorCode::NotFound, "diagnosis entry not found", action.entry_id);
        }
        entry->removed = true;
        entry->history.push_back({timestamp, entry->category, action.note, session.step, true});
    }

    void operator()(const MindMapAddNode& action) {
        if (!action.source_ref.empty()) check_ref(session, record, action.source_ref);
        MindMapNode node;
        node.id = "n" + std::to_string(session.next_node_seq++);
        node.text = action.text;
        node.source_ref = action.source_ref;
        node.created_at_step = session.step;
        node.edit_history.push_back({timestamp, action.text, session.step});
        session.mind_map.branch(action.factor).push_back(std::move(node));
    }

    void operator()(const MindMapEditNode& action) {
        MindMapNode* node = mutable_node(session, action.node_id);
        if (node == nullptr) {
            throw Error(ErrorCode::NotFound, "mind map node not found", action.node_id);
        }
        node->text = action.text;
        node->edit_history.push_back({timestamp, action.text, session.step});
    }

    void operator()(const MindMapRemoveNode& action) {
        for (auto& branch : session.mind_map.branches) {
            auto it = std::find_if(branch.begin(), branch.end(),
                                   [&](const MindMapNode& n) { return n.id == action.node_id; });
            if (it != branch.end()) {
                branch.erase(it);
                return;
            }
        }
        throw Error(ErrorCode::NotFound, "mind map node not found", action.node_id);
    }

    void operator()(const AnnotateAction& action) {
        const Annotation& annotation = action.annotation;
        const bool revealed =
            std::find(session.revealed_packet_ids.begin(), session.revealed_packet_ids.end(),
                      annotation.packet_id) != session.revealed_packet_ids.end();
        if (!revealed) {
            throw Error(ErrorCode::NotRevealed, "packet has not been revealed",
                        annotation.packet_id);
        }
        const EvidencePacket* packet = record.packet_by_id(annotation.packet_id);
        if (packet == nullptr) {
            throw Error(ErrorCode::NotFound, "packet not found", annotation.packet_id);
        }
        if (packet->kind != PacketKind::ImagingStudy) {
            throw Error(ErrorCode::WrongKind, "annotations apply to imaging studies",
                        std::string(to_string(packet->kind)));
        }
        check_geometry(annotation);
        session.annotations.push_back(annotation);
    }
};

}  // namespace

std::string_view to_string(DiagnosisCategory c) {
    switch (c) {
        case DiagnosisCategory::MostLikely: return "most_likely";
        case DiagnosisCategory::NeedToRuleOut: return "need_to_rule_out";
        case DiagnosisCategory::NotLikely: return "not_likely";
    }
    return "most_likely";
}

std::optional<DiagnosisCategory> parse_diagnosis_category(std::string_view s) {
    if (s == "most_likely") return DiagnosisCategory::MostLikely;
    if (s == "need_to_rule_out") return DiagnosisCategory::NeedToRuleOut;
    if (s == "not_likely") return DiagnosisCategory::NotLikely;
    return std::nullopt;
}

const DiagnosisEntry* Session::find_entry(const std::string& entry_id) const {
    for (const auto& entry : diagnosis_list) {
        if (entry.id == entry_id) return &entry;
    }
    return nullptr;
}

const MindMapNode* Session::find_node(const std::string& node_id) const {
    for (const auto& branch : mind_map.branches) {
        for (const auto& node : branch) {
            if (node.id == node_id) return &node;
        }
    }
    return nullptr;
}

Session start_session(std::string session_id, const CaseRecord& record, std::int64_t now) {
    Session session;
    session.id = std::move(session_id);
    session.case_id = record.id;
    session.created_at = now;
    session.updated_at = now;
    return session;
}

Session apply_action(const CaseRecord& record, Session session, const Action& action,
                     std::int64_t timestamp) {
    std::visit(Applier{record, session, timestamp}, action);
    bump(session, timestamp);
    return session;
}

InquireAction make_oracle_inquiry(const CaseRecord& record, const Lexicon& lexicon,
                                  std::string_view text) {
    return {std::string(text), answer_inquiry(record, lexicon, text)};
}

std::string_view to_string(LabFlag flag) {
    switch (flag) {
        case LabFlag::InRange: return "in_range";
        case LabFlag::Low: return "low";
        case LabFlag::High: return "high";
        case LabFlag::Mismatch: return "mismatch";
    }
    return "in_range";
}

std::vector<LabFlagRow> flag_labs(const EvidencePacket& packet) {
    if (packet.kind != PacketKind::LabPanel) {
        throw Error(ErrorCode::WrongKind, "lab flags apply to lab panels",
                    std::string(to_string(packet.kind)));
    }
    std::vector<LabFlagRow> rows;
    rows.reserve(packet.labs.size());
    for (const auto& lab : packet.labs) {
        LabFlag flag = LabFlag::InRange;
        if (lab.numeric()) {
            const double v = std::get<double>(lab.value);
            if (v < lab.range_lo) {
                flag = LabFlag::Low;
            } else if (v > lab.range_hi) {
                flag = LabFlag::High;
            }
        } else {
            const std::string& v = std::get<std::string>(lab.value);
            if (text::normalize(v) != text::normalize(lab.expected)) flag = LabFlag::Mismatch;
        }
        rows.push_back({lab.item, flag});
    }
    return rows;
}

SlotBindings session_slot_bindings(const Session& session, const CaseRecord& record) {
    // Findings surfaced so far: the ones visible from the start, in case
    // order, then everything answered Present or Denied in the transcript.
    std::vector<std::string> surfaced;
    std::set<std::string> seen;
    auto add_surfaced = [&](const std::string& term) {
        const std::string norm = text::normalize(term);
        if (seen.insert(norm).second) surfaced.push_back(term);
    };
    for (const auto& finding : record.findings) {
        if (finding.step_visibility == StepVisibility::Initial) add_surfaced(finding.term);
    }
    for (const auto& entry : session.transcript) {
        if (!entry.response) continue;
        for (const auto& verdict : entry.response->verdicts) {
            if (verdict.verdict == Verdict::NotInRecord) continue;
            // Prefer the authored spelling when the term resolves to a finding.
            std::string display = verdict.term;
            for (const auto& finding : record.findings) {
                if (text::normalize(finding.term) == text::normalize(verdict.term)) {
                    display = finding.term;
                    break;
                }
            }
            add_surfaced(display);
        }
    }

    std::vector<std::string> revealed_titles;
    for (const auto& packet_id : session.revealed_packet_ids) {
        if (const EvidencePacket* packet = record.packet_by_id(packet_id)) {
            revealed_titles.push_back(packet->title);
        }
    }

    std::vector<std::string> hypotheses;
    for (auto category : {DiagnosisCategory::MostLikely, DiagnosisCategory::NeedToRuleOut}) {
        for (const auto& entry : session.diagnosis_list) {
            if (!entry.removed && entry.category == category) hypotheses.push_back(entry.label);
        }
    }

    SlotBindings bindings;
    bindings.bind("symptoms", surfaced)
        .bind("facts", surfaced)
        .bind("findings", revealed_titles)
        .bind("updated data", revealed_titles)
        .bind("inferences and hypotheses", hypotheses)
        .bind("descriptions", {record.description})
        .bind("prognosis", {record.prognosis});
    return bindings;
}

std::map<FilaFactor, std::vector<std::string>> current_prompts(const Session& session,
                                                               const CaseRecord& record) {
    const SlotBindings bindings = session_slot_bindings(session, record);
    std::map<FilaFactor, std::vector<std::string>> prompts;
    for (FilaFactor factor : kFilaFactors) {
        prompts[factor] = instantiate_prompting_question(session.step, factor, bindings);
    }
    return prompts;
}

}  // namespace casetrain
