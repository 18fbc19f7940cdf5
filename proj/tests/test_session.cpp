#include <doctest.h>

#include <functional>

#include "casetrain/errors.hpp"
#include "casetrain/session.hpp"
#include "casetrain/session_json.hpp"
#include "testutil.hpp"

using namespace casetrain;

namespace {

struct Fixture {
    Corpus corpus = casetrain::test::load_fixture_corpus();
    Lexicon lexicon = Lexicon::from_corpus(corpus);

    const CaseRecord& record(const std::string& id) const {
        const CaseRecord* r = corpus.find_case(id);
        REQUIRE(r != nullptr);
        return *r;
    }
};

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::StorageError;
}

}  // namespace

TEST_CASE("start_session begins at problem formulation with nothing revealed") {
    const Fixture fx;
    const Session session = start_session("s-1", fx.record("case-cervical-001"), 100);
    CHECK(session.step == Step::ProblemFormulation);
    CHECK(session.transcript.empty());
    CHECK(session.diagnosis_list.empty());
    CHECK(session.revealed_packet_ids.empty());
    CHECK(session.created_at == 100);
    CHECK(session.updated_at == 100);
    for (FilaFactor factor : kFilaFactors) CHECK(session.mind_map.branch(factor).empty());
}

TEST_CASE("advance requires a hypothesis before testing") {
    const Fixture fx;
    const CaseRecord& record = fx.record("case-cervical-001");
    Session session = start_session("s-1", record, 100);

    CHECK(code_of([&] { apply_action(record, session, AdvanceStepAction{}, 101); }) ==
          ErrorCode::PreconditionFailed);

    session = apply_action(record, session,
                           DiagnosisAdd{"Cervical Disc Herniation", DiagnosisCategory::MostLikely,
                                        "fits the pattern"},
                           101);
    session = apply_action(record, session, AdvanceStepAction{}, 102);
    CHECK(session.step == Step::DiagnosisAnalysis);
}

TEST_CASE("advance requires every packet revealed before reflection") {
    const Fixture fx;
    const CaseRecord& record = fx.record("case-cervical-001");
    Session session = start_session("s-1", record, 100);
    session = apply_action(record, session,
                           DiagnosisAdd{"x", DiagnosisCategory::MostLikely, ""}, 101);
    session = apply_action(record, session, AdvanceStepAction{}, 102);
    session = apply_action(record, session, RequestEvidenceAction{}, 103);

    CHECK(code_of([&] { apply_action(record, session, AdvanceStepAction{}, 104); }) ==
          ErrorCode::PreconditionFailed);

    session = apply_action(record, session, RequestEvidenceAction{}, 104);
    session = apply_action(record, session, AdvanceStepAction{}, 105);
    CHECK(session.step == Step::PrognosisReflection);

    CHECK(code_of([&] { apply_action(record, session, AdvanceStepAction{}, 106); }) ==
          ErrorCode::InvalidTransition);
}

TEST_CASE("evidence reveals strictly in authored order") {
    const Fixture fx;
    const CaseRecord& record = fx.record("case-cervical-001");
    Session session = start_session("s-1", record, 100);

    CHECK(code_of([&] { apply_action(record, session, RequestEvidenceAction{}, 101); }) ==
          ErrorCode::PreconditionFailed);

    session = apply_action(record, session,
                           DiagnosisAdd{"x", DiagnosisCategory::MostLikely, ""}, 101);
    session = apply_action(record, session, AdvanceStepAction{}, 102);

    session = apply_action(record, session, RequestEvidenceAction{}, 103);
    REQUIRE(session.revealed_packet_ids.size() == 1);
    CHECK(session.revealed_packet_ids[0] == "mri");
    CHECK(session.transcript.back().text == "Evidence revealed: MRI Examination");

    session = apply_action(record, session, RequestEvidenceAction{}, 104);
    CHECK(session.revealed_packet_ids[1] == "phys");

    CHECK(code_of([&] { apply_action(record, session, RequestEvidenceAction{}, 105); }) ==
          ErrorCode::Exhausted);
}

TEST_CASE("diagnosis actions keep a complete history and tombstone removals") {
    const Fixture fx;
    const CaseRecord& record = fx.record("case-cervical-001");
    Session session = start_session("s-1", record, 100);

    session = apply_action(
        record, session,
        DiagnosisAdd{"Stroke", DiagnosisCategory::NeedToRuleOut, "weakness"}, 101);
    const std::string entry_id = session.diagnosis_list[0].id;
    CHECK(session.diagnosis_list[0].history.size() == 1);
    CHECK(session.diagnosis_list[0].history[0].note == "weakness");

    CHECK(code_of([&] {
        apply_action(record, session,
                     DiagnosisMove{entry_id, DiagnosisCategory::NeedToRuleOut, "same"}, 102);
    }) == ErrorCode::NoOpMove);

    session = apply_action(
        record, session, DiagnosisMove{entry_id, DiagnosisCategory::NotLikely, "excluded"}, 103);
    CHECK(session.diagnosis_list[0].category == DiagnosisCategory::NotLikely);
    CHECK(session.diagnosis_list[0].history.size() == 2);

    session = apply_action(record, session,
                           DiagnosisAttachEvidence{entry_id, "finding:grip weakness"}, 104);
    CHECK(session.diagnosis_list[0].evidence_refs ==
          std::vector<std::string>{"finding:grip weakness"});

    CHECK(code_of([&] {
        apply_action(record, session, DiagnosisAttachEvidence{entry_id, "packet:nope"}, 105);
    }) == ErrorCode::NotFound);

    session = apply_action(record, session, DiagnosisRemove{entry_id, "superseded"}, 106);
    CHECK(session.diagnosis_list[0].removed);
    CHECK(session.diagnosis_list.size() == 1);  // tombstoned, not deleted
    CHECK(session.diagnosis_list[0].history.back().removal);

    CHECK(code_of([&] {
        apply_action(record, session, DiagnosisMove{entry_id, DiagnosisCategory::MostLikely, ""},
                     107);
    }) == ErrorCode::NotFound);
}

TEST_CASE("the current category always equals the last history record") {
    const Fixture fx;
    const CaseRecord& record = fx.record("case-cervical-001");
    Session session = start_session("s-1", record, 100);
    session = apply_action(record, session,
                           DiagnosisAdd{"A", DiagnosisCategory::MostLikely, ""}, 101);
    const std::string id = session.diagnosis_list[0].id;
    const DiagnosisCategory seq[] = {DiagnosisCategory::NotLikely,
                                     DiagnosisCategory::NeedToRuleOut,
                                     DiagnosisCategory::MostLikely};
    std::int64_t ts = 102;
    for (DiagnosisCategory category : seq) {
        session = apply_action(record, session, DiagnosisMove{id, category, "shift"}, ts++);
        CHECK(session.diagnosis_list[0].category ==
              session.diagnosis_list[0].history.back().category);
    }
}

TEST_CASE("mind map keeps exactly four branches and stamps the creating step") {
    const Fixture fx;
    const CaseRecord& record = fx.record("case-cervical-001");
    Session session = start_session("s-1", record, 100);

    session = apply_action(record, session,
                           MindMapAddNode{FilaFactor::Facts, "left-sided neck and shoulder pain",
                                          ""},
                           101);
    CHECK(session.mind_map.branch(FilaFactor::Facts).size() == 1);
    CHECK(session.mind_map.branch(FilaFactor::Facts)[0].created_at_step ==
          Step::ProblemFormulation);
    CHECK(session.mind_map.branches.size() == 4);

    session = apply_action(record, session,
                           DiagnosisAdd{"x", DiagnosisCategory::MostLikely, ""}, 102);
    session = apply_action(record, session, AdvanceStepAction{}, 103);
    session = apply_action(record, session, MindMapAddNode{FilaFactor::Ideas, "imaging idea", ""},
                           104);
    CHECK(session.mind_map.branch(FilaFactor::Ideas)[0].created_at_step ==
          Step::DiagnosisAnalysis);

    const std::string node_id = session.mind_map.branch(FilaFactor::Ideas)[0].id;
    session = apply_action(record, session, MindMapEditNode{node_id, "sharper idea"}, 105);
    CHECK(session.mind_map.branch(FilaFactor::Ideas)[0].text == "sharper idea");
    CHECK(session.mind_map.branch(FilaFactor::Ideas)[0].edit_history.size() == 2);

    CHECK(code_of([&] { apply_action(record, session, MindMapEditNode{"n999", "x"}, 106); }) ==
          ErrorCode::NotFound);

    session = apply_action(record, session, MindMapRemoveNode{node_id}, 107);
    CHECK(session.mind_map.branch(FilaFactor::Ideas).empty());
}

TEST_CASE("annotations are gated on revealed imaging packets and unit geometry") {
    const Fixture fx;
    const CaseRecord& record = fx.record("case-cervical-001");
    Session session = start_session("s-1", record, 100);
    session = apply_action(record, session,
                           DiagnosisAdd{"x", DiagnosisCategory::MostLikely, ""}, 101);

    Annotation annotation;
    annotation.packet_id = "mri";
    annotation.shape = RectShape{0.2, 0.3, 0.1, 0.1};
    annotation.label = "C5/6 herniation";

    CHECK(code_of([&] { apply_action(record, session, AnnotateAction{annotation}, 102); }) ==
          ErrorCode::NotRevealed);

    session = apply_action(record, session, AdvanceStepAction{}, 102);
    session = apply_action(record, session, RequestEvidenceAction{}, 103);  // mri
    session = apply_action(record, session, AnnotateAction{annotation}, 104);
    CHECK(session.annotations.size() == 1);

    session = apply_action(record, session, RequestEvidenceAction{}, 105);  // phys
    Annotation on_text = annotation;
    on_text.packet_id = "phys";
    CHECK(code_of([&] { apply_action(record, session, AnnotateAction{on_text}, 106); }) ==
          ErrorCode::WrongKind);

    Annotation out_of_range = annotation;
    out_of_range.shape = RectShape{1.2, 0.3, 0.1, 0.1};
    CHECK(code_of([&] { apply_action(record, session, AnnotateAction{out_of_range}, 107); }) ==
          ErrorCode::GeometryError);

    Annotation overflow = annotation;
    overflow.shape = RectShape{0.95, 0.95, 0.2, 0.2};
    CHECK(code_of([&] { apply_action(record, session, AnnotateAction{overflow}, 108); }) ==
          ErrorCode::GeometryError);

    Annotation short_line = annotation;
    short_line.shape = PolylineShape{{{0.5, 0.5}}};
    CHECK(code_of([&] { apply_action(record, session, AnnotateAction{short_line}, 109); }) ==
          ErrorCode::GeometryError);

    Annotation line = annotation;
    line.shape = PolylineShape{{{0.1, 0.1}, {0.4, 0.2}, {0.6, 0.25}}};
    session = apply_action(record, session, AnnotateAction{line}, 110);
    CHECK(session.annotations.size() == 2);
}

TEST_CASE("inquiries append the learner question and the recorded response") {
    const Fixture fx;
    const CaseRecord& record = fx.record("case-cervical-001");
    Session session = start_session("s-1", record, 100);

    const InquireAction action =
        make_oracle_inquiry(record, fx.lexicon, "Any blackouts or dizziness?");
    session = apply_action(record, session, action, 101);
    REQUIRE(session.transcript.size() == 2);
    CHECK(session.transcript[0].role == "learner");
    CHECK(session.transcript[1].role == "system");
    REQUIRE(session.transcript[1].response.has_value());
    CHECK(session.transcript[1].response->verdicts.size() == 2);
    CHECK(session.transcript[1].text.find("blackouts: Denied") != std::string::npos);
}

TEST_CASE("flag_labs matches a direct comparison over every fixture lab") {
    const Fixture fx;
    for (const auto& record : fx.corpus.cases()) {
        for (const auto& packet : record.packets) {
            if (packet.kind != PacketKind::LabPanel) continue;
            const auto rows = flag_labs(packet);
            REQUIRE(rows.size() == packet.labs.size());
            for (std::size_t i = 0; i < rows.size(); ++i) {
                const LabResult& lab = packet.labs[i];
                LabFlag expected = LabFlag::InRange;
                if (lab.numeric()) {
                    const double v = std::get<double>(lab.value);
                    if (v < lab.range_lo) expected = LabFlag::Low;
                    if (v > lab.range_hi) expected = LabFlag::High;
                } else if (std::get<std::string>(lab.value) != lab.expected) {
                    expected = LabFlag::Mismatch;
                }
                CHECK(rows[i].status == expected);
            }
        }
    }
}

TEST_CASE("lab flag verdicts on the fever panel") {
    const Fixture fx;
    const CaseRecord& record = fx.record("case-fever-001");
    const EvidencePacket* packet = record.packet_by_id("labs");
    REQUIRE(packet != nullptr);
    const auto rows = flag_labs(*packet);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].item == "Body temperature");
    CHECK(rows[0].status == LabFlag::High);     // 38.5 over [36.0, 37.5]
    CHECK(rows[1].status == LabFlag::High);     // WBC 12.3 over [4, 10]
    CHECK(rows[2].status == LabFlag::InRange);  // CRP exactly at the bound
    CHECK(rows[3].status == LabFlag::Mismatch); // positive vs expected negative
}

TEST_CASE("flag_labs rejects non-lab packets") {
    const Fixture fx;
    const CaseRecord& record = fx.record("case-cervical-001");
    CHECK(code_of([&] { flag_labs(*record.packet_by_id("mri")); }) == ErrorCode::WrongKind);
}

TEST_CASE("current_prompts draws slots from the live session state") {
    const Fixture fx;
    const CaseRecord& record = fx.record("case-cervical-001");
    Session session = start_session("s-1", record, 100);

    SUBCASE("a fresh session names the presenting symptoms in the ideas question") {
        const auto prompts = current_prompts(session, record);
        REQUIRE(prompts.at(FilaFactor::Ideas).size() == 1);
        const std::string& question = prompts.at(FilaFactor::Ideas)[0];
        CHECK(question.find("neck and shoulder pain") != std::string::npos);
        CHECK(question.find("ulnar numbness") != std::string::npos);
        CHECK(question.find("neck stiffness") == std::string::npos);  // inquiry-only
        CHECK(prompts.at(FilaFactor::LearningIssues).empty());
    }

    SUBCASE("after the MRI reveal the facts question names the packet") {
        session = apply_action(record, session,
                               DiagnosisAdd{"x", DiagnosisCategory::MostLikely, ""}, 101);
        session = apply_action(record, session, AdvanceStepAction{}, 102);
        session = apply_action(record, session, RequestEvidenceAction{}, 103);
        const auto prompts = current_prompts(session, record);
        REQUIRE(prompts.at(FilaFactor::Facts).size() == 1);
        CHECK(prompts.at(FilaFactor::Facts)[0].find("MRI Examination") != std::string::npos);
        CHECK(prompts.at(FilaFactor::LearningIssues).size() == 1);
    }

    SUBCASE("terms surfaced by inquiry join the symptom slot") {
        session = apply_action(record, session,
                               make_oracle_inquiry(record, fx.lexicon, "any neck stiffness?"),
                               101);
        const auto prompts = current_prompts(session, record);
        CHECK(prompts.at(FilaFactor::Ideas)[0].find("neck stiffness") != std::string::npos);
    }
}

TEST_CASE("an unknown mind map factor is rejected at the action boundary") {
    ordered_json payload{{"type", "mindmap_add_node"}, {"factor", "bogus"}, {"text", "x"}};
    try {
        (void)action_from_json(payload);
        FAIL("expected UnknownFactor");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UnknownFactor);
    }
}

TEST_CASE("actions survive a json round-trip") {
    const Fixture fx;
    const CaseRecord& record = fx.record("case-cervical-001");
    std::vector<Action> actions;
    actions.emplace_back(make_oracle_inquiry(record, fx.lexicon, "blackouts?"));
    actions.emplace_back(AdvanceStepAction{});
    actions.emplace_back(RequestEvidenceAction{});
    actions.emplace_back(DiagnosisAdd{"X", DiagnosisCategory::NeedToRuleOut, "r"});
    actions.emplace_back(DiagnosisMove{"d1", DiagnosisCategory::NotLikely, "n"});
    actions.emplace_back(DiagnosisAttachEvidence{"d1", "packet:mri"});
    actions.emplace_back(DiagnosisRemove{"d1", "n"});
    actions.emplace_back(MindMapAddNode{FilaFactor::ActionPlans, "t", "finding:dizziness"});
    actions.emplace_back(MindMapEditNode{"n1", "t2"});
    actions.emplace_back(MindMapRemoveNode{"n1"});
    Annotation annotation;
    annotation.packet_id = "mri";
    annotation.shape = PolylineShape{{{0.1, 0.2}, {0.3, 0.4}}};
    annotation.label = "l";
    annotation.note = "n";
    actions.emplace_back(AnnotateAction{annotation});

    for (const Action& action : actions) {
        const ordered_json j = action_to_json(action);
        const Action round = action_from_json(j);
        CHECK(action_to_json(round) == j);
    }
}

TEST_CASE("updated_at never decreases") {
    const Fixture fx;
    const CaseRecord& record = fx.record("case-migraine-001");
    Session session = start_session("s-1", record, 100);
    session = apply_action(record, session,
                           DiagnosisAdd{"a", DiagnosisCategory::MostLikely, ""}, 150);
    CHECK(session.updated_at == 150);
    session = apply_action(record, session, MindMapAddNode{FilaFactor::Facts, "f", ""}, 140);
    CHECK(session.updated_at == 150);
}
