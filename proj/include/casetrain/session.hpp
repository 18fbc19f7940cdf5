#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "casetrain/case_types.hpp"
#include "casetrain/inquiry.hpp"
#include "casetrain/prompts.hpp"
#include "casetrain/step.hpp"

namespace casetrain {

enum class DiagnosisCategory { MostLikely, NeedToRuleOut, NotLikely };

std::string_view to_string(DiagnosisCategory c);
std::optional<DiagnosisCategory> parse_diagnosis_category(std::string_view s);

/// One timestamped state of a diagnosis entry. The first record documents
/// creation; the entry's current category always equals the last record's.
struct HistoryRecord {
    std::int64_t timestamp = 0;
    DiagnosisCategory category = DiagnosisCategory::MostLikely;
    std::string note;
    Step step = Step::ProblemFormulation;  ///< step at which the change happened
    bool removal = false;

    bool operator==(const HistoryRecord&) const = default;
};

/// A hypothesis on the diagnosis list. Removal tombstones the entry instead
/// of deleting it so the reflection step can trace every hypothesis.
struct DiagnosisEntry {
    std::string id;
    std::string label;
    DiagnosisCategory category = DiagnosisCategory::MostLikely;
    std::string rationale;
    bool removed = false;
    std::vector<std::string> evidence_refs;  ///< "transcript:<i>" | "finding:<term>" | "packet:<id>"
    std::vector<HistoryRecord> history;      ///< nonempty once created

    bool operator==(const DiagnosisEntry&) const = default;
};

struct NodeEdit {
    std::int64_t timestamp = 0;
    std::string text;
    Step step = Step::ProblemFormulation;

    bool operator==(const NodeEdit&) const = default;
};

struct MindMapNode {
    std::string id;
    std::string text;
    std::string source_ref;  ///< optional evidence ref, empty when absent
    Step created_at_step = Step::ProblemFormulation;
    std::vector<NodeEdit> edit_history;

    bool operator==(const MindMapNode&) const = default;
};

/// The shared analysis map: exactly one branch per FILA factor, for the whole
/// session lifetime.
struct MindMap {
    std::array<std::vector<MindMapNode>, 4> branches;  ///< indexed by FilaFactor

    [[nodiscard]] std::vector<MindMapNode>& branch(FilaFactor f) {
        return branches[static_cast<std::size_t>(f)];
    }
    [[nodiscard]] const std::vector<MindMapNode>& branch(FilaFactor f) const {
        return branches[static_cast<std::size_t>(f)];
    }

    bool operator==(const MindMap&) const = default;
};

struct RectShape {
    double x = 0, y = 0, w = 0, h = 0;  ///< normalized [0,1] image coordinates

    bool operator==(const RectShape&) const = default;
};

struct PolylineShape {
    std::vector<std::array<double, 2>> points;  ///< normalized, at least two

    bool operator==(const PolylineShape&) const = default;
};

struct Annotation {
    std::string packet_id;
    std::variant<RectShape, PolylineShape> shape;
    std::string label;
    std::string note;

    bool operator==(const Annotation&) const = default;
};

struct TranscriptEntry {
    std::int64_t timestamp = 0;
    std::string role;  ///< "learner" or "system"
    std::string text;
    std::optional<InquiryResponse> response;  ///< set on system replies to inquiries

    bool operator==(const TranscriptEntry&) const = default;
};

/// Per-learner analysis state. Mutated only through apply_action, which takes
/// and returns values, so snapshots are cheap to keep and compare.
struct Session {
    std::string id;
    std::string case_id;
    Step step = Step::ProblemFormulation;
    std::vector<TranscriptEntry> transcript;
    std::vector<DiagnosisEntry> diagnosis_list;
    MindMap mind_map;
    std::vector<Annotation> annotations;
    std::vector<std::string> revealed_packet_ids;
    std::int64_t created_at = 0;
    std::int64_t updated_at = 0;
    int next_entry_seq = 1;  ///< diagnosis entry id counter
    int next_node_seq = 1;   ///< mind map node id counter

    [[nodiscard]] const DiagnosisEntry* find_entry(const std::string& entry_id) const;
    [[nodiscard]] const MindMapNode* find_node(const std::string& node_id) const;

    bool operator==(const Session&) const = default;
};

// ---------------------------------------------------------------------------
// Actions
// ---------------------------------------------------------------------------

/// A learner question plus the response that was committed with it. The
/// response is recorded in the log (whether it came from the oracle or the
/// model adapter), so replay never needs to recompute it.
struct InquireAction {
    std::string text;
    InquiryResponse response;
};

struct AdvanceStepAction {};

struct RequestEvidenceAction {};

struct DiagnosisAdd {
    std::string label;
    DiagnosisCategory category = DiagnosisCategory::MostLikely;
    std::string rationale;
};

struct DiagnosisMove {
    std::string entry_id;
    DiagnosisCategory new_category = DiagnosisCategory::MostLikely;
    std::string note;
};

struct DiagnosisAttachEvidence {
    std::string entry_id;
    std::string ref;
};

struct DiagnosisRemove {
    std::string entry_id;
    std::string note;
};

struct MindMapAddNode {
    FilaFactor factor = FilaFactor::Facts;
    std::string text;
    std::string source_ref;  ///< optional
};

struct MindMapEditNode {
    std::string node_id;
    std::string text;
};

struct MindMapRemoveNode {
    std::string node_id;
};

struct AnnotateAction {
    Annotation annotation;
};

using Action = std::variant<InquireAction, AdvanceStepAction, RequestEvidenceAction, DiagnosisAdd,
                            DiagnosisMove, DiagnosisAttachEvidence, DiagnosisRemove, MindMapAddNode,
                            MindMapEditNode, MindMapRemoveNode, AnnotateAction>;

/// Fresh session at ProblemFormulation with nothing revealed.
Session start_session(std::string session_id, const CaseRecord& record, std::int64_t now);

/// Applies one action and stamps updated_at. Pure in (record, session, action,
/// timestamp); every validation error from the session contract is thrown from
/// here. The record must be the session's case.
Session apply_action(const CaseRecord& record, Session session, const Action& action,
                     std::int64_t timestamp);

/// Convenience: builds an InquireAction by running the structured-QA oracle.
InquireAction make_oracle_inquiry(const CaseRecord& record, const Lexicon& lexicon,
                                  std::string_view text);

// ---------------------------------------------------------------------------
// Lab flags
// ---------------------------------------------------------------------------

enum class LabFlag { InRange, Low, High, Mismatch };

std::string_view to_string(LabFlag flag);

struct LabFlagRow {
    std::string item;
    LabFlag status;
};

/// Flags every result of a lab panel against its normal range or expected
/// value. Throws Error(WrongKind) for non-LabPanel packets.
std::vector<LabFlagRow> flag_labs(const EvidencePacket& packet);

// ---------------------------------------------------------------------------
// Prompting questions from session state
// ---------------------------------------------------------------------------

/// Slot values drawn from the current session state: surfaced findings,
/// revealed packet titles, active hypotheses, and the case narrative fields.
SlotBindings session_slot_bindings(const Session& session, const CaseRecord& record);

/// Instantiated prompting questions for the session's current step, one list
/// per FILA factor.
std::map<FilaFactor, std::vector<std::string>> current_prompts(const Session& session,
                                                               const CaseRecord& record);

}  // namespace casetrain
