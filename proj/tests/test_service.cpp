#include <doctest.h>

#include <thread>

#include <httplib.h>

#include "casetrain/service.hpp"
#include "casetrain/session_json.hpp"
#include "casetrain/simulate.hpp"
#include "testutil.hpp"

using namespace casetrain;
using casetrain::test::TempDir;
using ordered_json = nlohmann::ordered_json;

namespace {

class ScriptedClient final : public CompletionClient {
public:
    explicit ScriptedClient(std::string reply) : reply_(std::move(reply)) {}
    std::string complete(const std::string&, const std::string&) override { return reply_; }

private:
    std::string reply_;
};

/// In-process server on an ephemeral loopback port.
class TestServer {
public:
    TestServer(std::shared_ptr<Store> store, ServiceConfig config,
               std::shared_ptr<CompletionClient> client = nullptr)
        : service_(std::move(store), std::move(config), std::move(client)) {
        service_.register_routes(server_);
        port_ = server_.bind_to_any_port("127.0.0.1");
        REQUIRE(port_ > 0);
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~TestServer() {
        server_.stop();
        thread_.join();
    }

    httplib::Client client() const { return httplib::Client("127.0.0.1", port_); }

private:
    httplib::Server server_;
    Service service_;
    int port_ = 0;
    std::thread thread_;
};

ordered_json body_of(const httplib::Result& result) {
    REQUIRE(result);
    return ordered_json::parse(result->body);
}

}  // namespace

TEST_CASE("the api covers browsing, the session loop, reporting and export") {
    TempDir dir("svc");
    auto store = std::make_shared<Store>(casetrain::test::make_store_root(dir),
                                         std::make_shared<FixedClock>(5000));
    TestServer server(store, ServiceConfig{});
    auto client = server.client();

    SUBCASE("taxonomy drill-down") {
        auto root = body_of(client.Get("/v1/taxonomy"));
        CHECK(root.at("node").is_null());
        CHECK(root.at("children").size() == 2);
        CHECK(root.at("cases").empty());

        auto spine = body_of(
            client.Get("/v1/taxonomy?path=surgery/orthopedic_surgery/spine_surgery"));
        CHECK(spine.at("node").at("label") == "Spine Surgery");
        REQUIRE(spine.at("cases").size() == 1);
        CHECK(spine.at("cases")[0].at("id") == "case-cervical-001");

        auto missing = client.Get("/v1/taxonomy?path=surgery/nope");
        CHECK(missing->status == 404);
        CHECK(body_of(missing).at("code") == "not_found");
    }

    SUBCASE("search and case fetch") {
        auto results = body_of(client.Get("/v1/cases?query=neck%20pain"));
        REQUIRE(!results.at("cases").empty());
        CHECK(results.at("cases")[0].at("id") == "case-cervical-001");

        auto record = body_of(client.Get("/v1/cases/case-fever-001"));
        CHECK(record.at("id") == "case-fever-001");

        auto difficulty = body_of(client.Get("/v1/cases/case-cervical-001/difficulty"));
        CHECK(difficulty.at("incidence") == "high");
        CHECK(difficulty.at("chain") == "medium");
        CHECK(difficulty.at("relevance") == "low");
        CHECK(difficulty.at("aggregate") == 6);
    }

    SUBCASE("the full walkthrough over http") {
        auto created = client.Post("/v1/sessions", R"({"case_id": "case-cervical-001"})",
                                   "application/json");
        CHECK(created->status == 201);
        const std::string session_id = body_of(created).at("id").get<std::string>();

        auto inquiry = body_of(client.Post(
            "/v1/sessions/" + session_id + "/inquiry",
            R"({"text": "Does she have blackouts, sudden falls, or dizziness?"})",
            "application/json"));
        CHECK(inquiry.at("source") == "oracle");
        REQUIRE(inquiry.at("response").at("verdicts").size() == 3);
        for (const auto& verdict : inquiry.at("response").at("verdicts")) {
            CHECK(verdict.at("verdict") == "denied");
        }

        auto prompts = body_of(client.Get("/v1/sessions/" + session_id + "/prompts"));
        CHECK(prompts.at("learning_issues").empty());
        CHECK(prompts.at("ideas")[0].get<std::string>().find("neck and shoulder pain") !=
              std::string::npos);

        // Advancing without a hypothesis is a guarded conflict.
        auto premature = client.Post("/v1/sessions/" + session_id + "/advance", "", "");
        CHECK(premature->status == 409);
        CHECK(body_of(premature).at("code") == "precondition_failed");

        auto add = body_of(client.Post(
            "/v1/sessions/" + session_id + "/diagnosis",
            R"({"action": {"type": "diagnosis_add", "label": "Cervical Disc Herniation",
                "category": "most_likely", "rationale": "root pattern"}})",
            "application/json"));
        REQUIRE(add.at("diagnosis_list").size() == 1);
        const std::string entry_id = add.at("diagnosis_list")[0].at("id").get<std::string>();

        auto moved = client.Post(
            "/v1/sessions/" + session_id + "/diagnosis",
            R"({"action": {"type": "diagnosis_move", "entry_id": ")" + entry_id +
                R"(", "new_category": "most_likely", "note": "same"}})",
            "application/json");
        CHECK(moved->status == 409);
        CHECK(body_of(moved).at("code") == "noop_move");

        body_of(client.Post("/v1/sessions/" + session_id + "/mindmap",
                            R"({"action": {"type": "mindmap_add_node", "factor": "facts",
                                "text": "left-sided neck and shoulder pain"}})",
                            "application/json"));

        auto advanced = body_of(client.Post("/v1/sessions/" + session_id + "/advance", "", ""));
        CHECK(advanced.at("step") == "diagnosis_analysis");

        auto evidence = body_of(client.Post("/v1/sessions/" + session_id + "/evidence", "", ""));
        CHECK(evidence.at("packet").at("title") == "MRI Examination");

        auto annotated = client.Post(
            "/v1/sessions/" + session_id + "/annotations",
            R"({"packet_id": "mri", "shape": {"type": "rect", "x": 0.4, "y": 0.5,
                "w": 0.18, "h": 0.1}, "label": "C5/6", "note": "protrusion"})",
            "application/json");
        CHECK(annotated->status == 200);

        auto bad_geometry = client.Post(
            "/v1/sessions/" + session_id + "/annotations",
            R"({"packet_id": "mri", "shape": {"type": "rect", "x": 1.2, "y": 0.5,
                "w": 0.1, "h": 0.1}, "label": "x", "note": ""})",
            "application/json");
        CHECK(bad_geometry->status == 400);
        CHECK(body_of(bad_geometry).at("code") == "geometry_error");

        body_of(client.Post("/v1/sessions/" + session_id + "/evidence", "", ""));
        auto exhausted = client.Post("/v1/sessions/" + session_id + "/evidence", "", "");
        CHECK(exhausted->status == 409);
        CHECK(body_of(exhausted).at("code") == "exhausted");

        auto early_report = client.Post("/v1/sessions/" + session_id + "/report", "", "");
        CHECK(early_report->status == 409);
        CHECK(body_of(early_report).at("code") == "wrong_step");

        body_of(client.Post("/v1/sessions/" + session_id + "/advance", "", ""));
        auto report = body_of(client.Post(
            "/v1/sessions/" + session_id + "/report",
            R"({"learner_content": {"reflect": "ask about red flags sooner"}})",
            "application/json"));
        CHECK(report.at("sections").size() == 8);
        CHECK(report.at("sections")[7].at("learner_content") == "ask about red flags sooner");

        auto fetched = body_of(client.Get("/v1/sessions/" + session_id + "/report"));
        CHECK(fetched == report);

        auto scores = client.Post(
            "/v1/reports/" + session_id + "/scores",
            R"({"sheets": [
                {"rater_id": "T1", "scores": {"1":5,"2":5,"3":5,"4":5,"5":5,"6":5,"7":5,"8":5,
                 "9":5,"10":5,"11":5,"12":5,"13":5,"14":5,"15":5,"16":5}},
                {"rater_id": "T2", "scores": {"1":6,"2":6,"3":6,"4":6,"5":6,"6":6,"7":6,"8":6,
                 "9":6,"10":6,"11":6,"12":6,"13":6,"14":6,"15":6,"16":6}}]})",
            "application/json");
        CHECK(scores->status == 200);
        CHECK(body_of(scores).at("overall").at("display") == "5.50");

        auto aggregate = body_of(client.Get("/v1/reports/" + session_id + "/aggregate"));
        CHECK(aggregate.at("per_criterion").at("1").at("display") == "5.50");

        auto rejected = client.Post(
            "/v1/reports/" + session_id + "/scores",
            R"({"sheets": [{"rater_id": "T3", "scores": {"1":8,"2":5,"3":5,"4":5,"5":5,"6":5,
                "7":5,"8":5,"9":5,"10":5,"11":5,"12":5,"13":5,"14":5,"15":5,"16":5}}]})",
            "application/json");
        CHECK(rejected->status == 400);
        CHECK(body_of(rejected).at("code") == "invalid_score");

        auto exported = client.Get("/v1/sessions/" + session_id + "/export");
        CHECK(exported->status == 200);
        CHECK(exported->get_header_value("Content-Type") == "application/gzip");
        const CaseRecord& record = *store->corpus()->find_case("case-cervical-001");
        const ImportedBundle imported = import_bundle(exported->body, record);
        CHECK(imported.session == store->session(session_id));
        CHECK(imported.report.has_value());
    }

    SUBCASE("lab flags for the fever panel") {
        auto created = client.Post("/v1/sessions", R"({"case_id": "case-fever-001"})",
                                   "application/json");
        const std::string session_id = body_of(created).at("id").get<std::string>();
        auto flags = body_of(
            client.Get("/v1/sessions/" + session_id + "/labs/labs/flags"));
        REQUIRE(flags.at("flags").size() == 4);
        CHECK(flags.at("flags")[0].at("item") == "Body temperature");
        CHECK(flags.at("flags")[0].at("status") == "high");
        CHECK(flags.at("flags")[3].at("status") == "mismatch");
    }

    SUBCASE("pure reads repeat identically") {
        auto a = client.Get("/v1/cases?query=fever");
        auto b = client.Get("/v1/cases?query=fever");
        CHECK(a->body == b->body);
    }

    SUBCASE("model inquiries are refused while the adapter is disabled") {
        auto created = client.Post("/v1/sessions", R"({"case_id": "case-fever-001"})",
                                   "application/json");
        const std::string session_id = body_of(created).at("id").get<std::string>();
        auto refused = client.Post("/v1/sessions/" + session_id + "/inquiry",
                                   R"({"text": "fever?", "use_model": true})",
                                   "application/json");
        CHECK(refused->status == 403);
        CHECK(body_of(refused).at("code") == "oracle_only");
    }
}

TEST_CASE("a scripted model adapter answers over http and reconciles cleanly") {
    TempDir dir("svc_model");
    auto store = std::make_shared<Store>(casetrain::test::make_store_root(dir),
                                         std::make_shared<FixedClock>(5000));
    ServiceConfig config;
    config.adapter.endpoint = "http://scripted.local";
    config.adapter.model = "scripted";
    auto scripted = std::make_shared<ScriptedClient>(
        "Fever: Yes\nRelevant Data: Temperature is 38.5°C, duration of 3 days.\n\n"
        "Headache: Irrelevant\n");
    TestServer server(store, config, scripted);
    auto client = server.client();

    auto created =
        client.Post("/v1/sessions", R"({"case_id": "case-fever-001"})", "application/json");
    const std::string session_id = body_of(created).at("id").get<std::string>();

    auto answered = body_of(client.Post(
        "/v1/sessions/" + session_id + "/inquiry",
        R"({"text": "Does the patient have a fever and headache?", "use_model": true})",
        "application/json"));
    CHECK(answered.at("source") == "model");
    CHECK(answered.at("consistency").at("consistent") == true);
    CHECK(answered.at("consistency").at("disagreements").empty());
    REQUIRE(answered.at("response").at("verdicts").size() == 2);
    CHECK(answered.at("response").at("verdicts")[0].at("verdict") == "present");
    CHECK(answered.at("response").at("verdicts")[1].at("verdict") == "not_in_record");

    // The model transcript entry is in the log, so replay reproduces it.
    TempDir copy_dir("svc_model_copy");
    const Session live = store->session(session_id);
    const CaseRecord& record = *store->corpus()->find_case("case-fever-001");
    const Session replayed =
        replay_session_log(record, session_id, store->session_log(session_id));
    CHECK(session_snapshot_text(replayed) == session_snapshot_text(live));
}

TEST_CASE("a prose model reply surfaces as an upstream error") {
    TempDir dir("svc_prose");
    auto store = std::make_shared<Store>(casetrain::test::make_store_root(dir),
                                         std::make_shared<FixedClock>(5000));
    ServiceConfig config;
    config.adapter.endpoint = "http://scripted.local";
    config.adapter.model = "scripted";
    TestServer server(store, config,
                      std::make_shared<ScriptedClient>("The patient is doing fine overall."));
    auto client = server.client();

    auto created =
        client.Post("/v1/sessions", R"({"case_id": "case-fever-001"})", "application/json");
    const std::string session_id = body_of(created).at("id").get<std::string>();
    auto failed = client.Post("/v1/sessions/" + session_id + "/inquiry",
                              R"({"text": "fever?", "use_model": true})", "application/json");
    CHECK(failed->status == 502);
    CHECK(body_of(failed).at("code") == "parse_error");
    // The failed call committed nothing.
    CHECK(store->session(session_id).transcript.empty());
}

TEST_CASE("a configured bearer token gates mutating routes") {
    TempDir dir("svc_auth");
    auto store = std::make_shared<Store>(casetrain::test::make_store_root(dir),
                                         std::make_shared<FixedClock>(5000));
    ServiceConfig config;
    config.api_token = "sekrit";
    TestServer server(store, config);
    auto client = server.client();

    auto denied =
        client.Post("/v1/sessions", R"({"case_id": "case-fever-001"})", "application/json");
    CHECK(denied->status == 401);

    auto reads_ok = client.Get("/v1/cases?query=");
    CHECK(reads_ok->status == 200);

    httplib::Headers headers{{"Authorization", "Bearer sekrit"}};
    auto allowed = client.Post("/v1/sessions", headers,
                               R"({"case_id": "case-fever-001"})", "application/json");
    CHECK(allowed->status == 201);
}

TEST_CASE("the http path and the simulation runner build identical bundles") {
    // Same actions, same fixed clock: the exported bytes must match apart
    // from the manifest timestamp, which also matches here because both
    // paths consume exactly one clock tick per committed action.
    TempDir sim_dir("bundle_sim");
    Store sim_store(casetrain::test::make_store_root(sim_dir),
                    std::make_shared<FixedClock>(7000));
    const SimulationScript script = parse_simulation_script(casetrain::test::read_file(
        casetrain::test::fixtures_dir() / "scripts" / "cervical_walkthrough.json"));
    const SimulationResult sim = run_simulation(sim_store, script);
    REQUIRE(sim.ok);
    const std::string via_runner = sim_store.export_session(sim.session_id);

    TempDir http_dir("bundle_http");
    auto http_store = std::make_shared<Store>(casetrain::test::make_store_root(http_dir),
                                              std::make_shared<FixedClock>(7000));
    TestServer server(http_store, ServiceConfig{});
    auto client = server.client();
    const std::string session_id =
        body_of(client.Post("/v1/sessions", R"({"case_id": "case-cervical-001"})",
                            "application/json"))
            .at("id")
            .get<std::string>();

    // Drive the same action sequence the script produces, via the API.
    for (const auto& step : script.steps) {
        const std::string op = step.at("op").get<std::string>();
        if (op == "inquire") {
            client.Post("/v1/sessions/" + session_id + "/inquiry",
                        ordered_json{{"text", step.at("text")}}.dump(), "application/json");
        } else if (op == "diagnosis_add") {
            ordered_json action{{"type", "diagnosis_add"},
                                {"label", step.at("label")},
                                {"category", step.at("category")},
                                {"rationale", step.value("rationale", std::string{})}};
            client.Post("/v1/sessions/" + session_id + "/diagnosis",
                        ordered_json{{"action", action}}.dump(), "application/json");
        } else if (op == "diagnosis_move" || op == "diagnosis_attach" ||
                   op == "diagnosis_remove") {
            // Resolve the label exactly as the runner does.
            const Session session = http_store->session(session_id);
            std::string entry_id;
            for (const auto& entry : session.diagnosis_list) {
                if (entry.label == step.at("label").get<std::string>()) entry_id = entry.id;
            }
            REQUIRE(!entry_id.empty());
            ordered_json action;
            if (op == "diagnosis_move") {
                action = {{"type", "diagnosis_move"},
                          {"entry_id", entry_id},
                          {"new_category", step.at("category")},
                          {"note", step.value("note", std::string{})}};
            } else if (op == "diagnosis_attach") {
                action = {{"type", "diagnosis_attach_evidence"},
                          {"entry_id", entry_id},
                          {"ref", step.at("ref")}};
            } else {
                action = {{"type", "diagnosis_remove"},
                          {"entry_id", entry_id},
                          {"note", step.value("note", std::string{})}};
            }
            client.Post("/v1/sessions/" + session_id + "/diagnosis",
                        ordered_json{{"action", action}}.dump(), "application/json");
        } else if (op == "mindmap_add") {
            ordered_json action{{"type", "mindmap_add_node"},
                                {"factor", step.at("factor")},
                                {"text", step.at("text")},
                                {"source_ref", step.value("source_ref", std::string{})}};
            client.Post("/v1/sessions/" + session_id + "/mindmap",
                        ordered_json{{"action", action}}.dump(), "application/json");
        } else if (op == "advance") {
            client.Post("/v1/sessions/" + session_id + "/advance", "", "");
        } else if (op == "evidence") {
            client.Post("/v1/sessions/" + session_id + "/evidence", "", "");
        } else if (op == "annotate") {
            ordered_json annotation{{"packet_id", step.at("packet_id")},
                                    {"shape",
                                     {{"type", "rect"},
                                      {"x", step.at("rect")[0]},
                                      {"y", step.at("rect")[1]},
                                      {"w", step.at("rect")[2]},
                                      {"h", step.at("rect")[3]}}},
                                    {"label", step.at("label")},
                                    {"note", step.value("note", std::string{})}};
            client.Post("/v1/sessions/" + session_id + "/annotations", annotation.dump(),
                        "application/json");
        } else if (op == "report") {
            client.Post("/v1/sessions/" + session_id + "/report", "", "");
        }
        // assert_* steps consume no clock ticks in either path.
    }

    auto exported = client.Get("/v1/sessions/" + session_id + "/export");
    REQUIRE(exported->status == 200);
    CHECK(exported->body == via_runner);
}
