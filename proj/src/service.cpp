#include "casetrain/service.hpp"

#include <cstdlib>
#include <functional>
#include <iostream>

#include <httplib.h>
#include <json.hpp>

#include "casetrain/difficulty.hpp"
#include "casetrain/errors.hpp"
#include "casetrain/text.hpp"

namespace casetrain {

namespace {

using ordered_json = nlohmann::ordered_json;

int status_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::NotFound:
            return 404;
        case ErrorCode::PreconditionFailed:
        case ErrorCode::InvalidTransition:
        case ErrorCode::Exhausted:
        case ErrorCode::NoOpMove:
        case ErrorCode::NotRevealed:
        case ErrorCode::WrongKind:
        case ErrorCode::WrongStep:
            return 409;
        case ErrorCode::SchemaError:
        case ErrorCode::ValueError:
        case ErrorCode::GeometryError:
        case ErrorCode::UnknownFactor:
        case ErrorCode::MissingSlot:
        case ErrorCode::InvalidScore:
        case ErrorCode::DomainError:
            return 400;
        case ErrorCode::OracleOnly:
            return 403;
        case ErrorCode::TransportError:
        case ErrorCode::ParseError:
            return 502;
        default:
            return 500;
    }
}

void send_json(httplib::Response& res, const ordered_json& body, int status = 200) {
    res.status = status;
    res.set_content(body.dump(2) + "\n", "application/json");
}

void send_error(httplib::Response& res, const Error& error) {
    ordered_json body;
    body["code"] = error_code_name(error.code());
    body["message"] = error.what();
    body["detail"] = error.detail();
    send_json(res, body, status_for(error.code()));
}

ordered_json parse_body(const httplib::Request& req) {
    if (req.body.empty()) return ordered_json::object();
    try {
        return ordered_json::parse(req.body);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::SchemaError, std::string("request body is not valid JSON: ") +
                                                e.what());
    }
}

std::vector<std::string> split_path_param(const std::string& value) {
    std::vector<std::string> segments;
    std::size_t start = 0;
    while (start <= value.size()) {
        std::size_t end = value.find('/', start);
        if (end == std::string::npos) end = value.size();
        if (end > start) segments.push_back(value.substr(start, end - start));
        start = end + 1;
    }
    return segments;
}

ordered_json summary_to_json(const CaseSummary& summary) {
    return {{"id", summary.id},
            {"description", summary.description},
            {"taxonomy_path", summary.taxonomy_path}};
}

ordered_json difficulty_to_json(const DifficultyProfile& profile) {
    return {{"incidence", to_string(profile.incidence)},
            {"chain", to_string(profile.chain)},
            {"relevance", to_string(profile.relevance)},
            {"aggregate", profile.aggregate}};
}

ordered_json mean_to_json(const ExactMean& mean) {
    return {{"value", mean.value()}, {"display", mean.display()}};
}

ordered_json aggregate_to_json(const AggregateScore& aggregate) {
    ordered_json j;
    j["per_criterion"] = ordered_json::object();
    for (int id = 1; id <= kCriterionCount; ++id) {
        j["per_criterion"][std::to_string(id)] = mean_to_json(aggregate.per_criterion[id - 1]);
    }
    j["per_dimension"] = ordered_json::object();
    for (std::size_t d = 0; d < kCrcDimensionCount; ++d) {
        j["per_dimension"][std::string(to_string(kCrcDimensions[d]))] =
            mean_to_json(aggregate.per_dimension[d]);
    }
    j["overall"] = mean_to_json(aggregate.overall);
    return j;
}

}  // namespace

ServiceConfig ServiceConfig::from_env() {
    ServiceConfig config;
    if (const char* addr = std::getenv("LISTEN_ADDR")) {
        const std::string value = addr;
        const std::size_t colon = value.rfind(':');
        if (colon == std::string::npos) {
            config.listen_address = value;
        } else {
            config.listen_address = value.substr(0, colon);
            try {
                config.port = std::stoi(value.substr(colon + 1));
            } catch (...) {
            }
        }
    }
    if (const char* token = std::getenv("API_TOKEN")) config.api_token = token;
    config.adapter = AdapterConfig::from_env();
    return config;
}

Service::Service(std::shared_ptr<Store> store, ServiceConfig config,
                 std::shared_ptr<CompletionClient> completion_client)
    : store_(std::move(store)),
      config_(std::move(config)),
      completion_client_(std::move(completion_client)) {
    if (completion_client_ == nullptr && config_.adapter.enabled()) {
        completion_client_ = std::make_shared<HttpCompletionClient>(config_.adapter);
    }
}

void Service::register_routes(httplib::Server& server) {
    using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

    auto guarded = [this](bool mutating, Handler handler) {
        return [this, mutating, handler = std::move(handler)](const httplib::Request& req,
                                                              httplib::Response& res) {
            try {
                if (mutating && !config_.api_token.empty()) {
                    const std::string expected = "Bearer " + config_.api_token;
                    if (req.get_header_value("Authorization") != expected) {
                        res.status = 401;
                        send_json(res,
                                  {{"code", "unauthorized"},
                                   {"message", "missing or wrong bearer token"},
                                   {"detail", ""}},
                                  401);
                        return;
                    }
                }
                handler(req, res);
            } catch (const Error& e) {
                send_error(res, e);
            } catch (const std::exception& e) {
                send_error(res, Error(ErrorCode::StorageError, e.what()));
            }
        };
    };

    server.Get("/v1/taxonomy", guarded(false, [this](const httplib::Request& req,
                                                     httplib::Response& res) {
        const auto path = split_path_param(req.get_param_value("path"));
        const TaxonomyView view = store_->corpus()->resolve(path);
        ordered_json j;
        j["node"] = view.node == nullptr
                        ? ordered_json(nullptr)
                        : ordered_json{{"id", view.node->id}, {"label", view.node->label}};
        j["children"] = ordered_json::array();
        for (const TaxonomyNode* child : view.children) {
            j["children"].push_back({{"id", child->id}, {"label", child->label}});
        }
        j["cases"] = ordered_json::array();
        for (const auto& summary : view.cases) j["cases"].push_back(summary_to_json(summary));
        send_json(res, j);
    }));

    server.Get("/v1/cases", guarded(false, [this](const httplib::Request& req,
                                                  httplib::Response& res) {
        const auto results = store_->corpus()->search(req.get_param_value("query"),
                                                      split_path_param(req.get_param_value("path")));
        ordered_json j;
        j["cases"] = ordered_json::array();
        for (const auto& summary : results) j["cases"].push_back(summary_to_json(summary));
        send_json(res, j);
    }));

    server.Get("/v1/cases/:id", guarded(false, [this](const httplib::Request& req,
                                                      httplib::Response& res) {
        const CaseRecord* record = store_->corpus()->find_case(req.path_params.at("id"));
        if (record == nullptr) {
            throw Error(ErrorCode::NotFound, "unknown case", req.path_params.at("id"));
        }
        send_json(res, case_to_json(*record));
    }));

    server.Get("/v1/cases/:id/difficulty", guarded(false, [this](const httplib::Request& req,
                                                                 httplib::Response& res) {
        const CaseRecord* record = store_->corpus()->find_case(req.path_params.at("id"));
        if (record == nullptr) {
            throw Error(ErrorCode::NotFound, "unknown case", req.path_params.at("id"));
        }
        send_json(res, difficulty_to_json(profile_case(*record)));
    }));

    server.Post("/v1/sessions", guarded(true, [this](const httplib::Request& req,
                                                     httplib::Response& res) {
        const ordered_json body = parse_body(req);
        if (!body.contains("case_id")) {
            throw Error(ErrorCode::SchemaError, "missing field", "case_id");
        }
        const Session session = store_->create_session(body.at("case_id").get<std::string>());
        send_json(res, session_to_json(session), 201);
    }));

    server.Get("/v1/sessions/:id", guarded(false, [this](const httplib::Request& req,
                                                         httplib::Response& res) {
        send_json(res, session_to_json(store_->session(req.path_params.at("id"))));
    }));

    server.Post("/v1/sessions/:id/inquiry", guarded(true, [this](const httplib::Request& req,
                                                                 httplib::Response& res) {
        const std::string session_id = req.path_params.at("id");
        const ordered_json body = parse_body(req);
        if (!body.contains("text")) throw Error(ErrorCode::SchemaError, "missing field", "text");
        const std::string question = body.at("text").get<std::string>();
        const bool use_model = body.value("use_model", false);

        const Session session = store_->session(session_id);
        auto corpus = store_->corpus();
        const CaseRecord* record = corpus->find_case(session.case_id);
        if (record == nullptr) {
            throw Error(ErrorCode::NotFound, "session case disappeared", session.case_id);
        }
        auto lexicon = store_->lexicon();

        InquireAction action;
        ordered_json consistency(nullptr);
        std::string source = "oracle";
        if (use_model) {
            if (!config_.adapter.enabled() || completion_client_ == nullptr) {
                throw Error(ErrorCode::OracleOnly, "model adapter is disabled by configuration");
            }
            ModelAdapter adapter(config_.adapter, completion_client_);
            const InquiryResponse model_response = adapter.answer(*record, *lexicon, question);
            const InquiryResponse oracle_response = answer_inquiry(*record, *lexicon, question);
            const ConsistencyReport report =
                reconcile_with_oracle(model_response, oracle_response);
            consistency = ordered_json::object();
            consistency["consistent"] = report.consistent();
            consistency["agreements"] = report.agreements;
            consistency["disagreements"] = ordered_json::array();
            for (const auto& d : report.disagreements) {
                consistency["disagreements"].push_back({{"term", d.term},
                                                        {"model", to_string(d.model_verdict)},
                                                        {"oracle", to_string(d.oracle_verdict)}});
            }
            consistency["missing_in_model"] = report.missing_in_model;
            consistency["missing_in_oracle"] = report.missing_in_oracle;
            action = InquireAction{question, model_response};
            source = "model";
        } else {
            action = make_oracle_inquiry(*record, *lexicon, question);
        }

        const Session updated = store_->commit_action(session_id, action);
        ordered_json j;
        j["source"] = source;
        j["response"] = inquiry_response_to_json(action.response);
        j["consistency"] = consistency;
        j["session"] = session_to_json(updated);
        send_json(res, j);
    }));

    server.Get("/v1/sessions/:id/prompts", guarded(false, [this](const httplib::Request& req,
                                                                 httplib::Response& res) {
        const Session session = store_->session(req.path_params.at("id"));
        auto corpus = store_->corpus();
        const CaseRecord* record = corpus->find_case(session.case_id);
        if (record == nullptr) {
            throw Error(ErrorCode::NotFound, "session case disappeared", session.case_id);
        }
        ordered_json j;
        j["step"] = to_string(session.step);
        for (const auto& [factor, questions] : current_prompts(session, *record)) {
            j[std::string(to_string(factor))] = questions;
        }
        send_json(res, j);
    }));

    server.Post("/v1/sessions/:id/advance", guarded(true, [this](const httplib::Request& req,
                                                                 httplib::Response& res) {
        send_json(res, session_to_json(store_->commit_action(req.path_params.at("id"),
                                                             AdvanceStepAction{})));
    }));

    server.Post("/v1/sessions/:id/evidence", guarded(true, [this](const httplib::Request& req,
                                                                  httplib::Response& res) {
        const std::string session_id = req.path_params.at("id");
        const Session updated = store_->commit_action(session_id, RequestEvidenceAction{});
        auto corpus = store_->corpus();
        const CaseRecord* record = corpus->find_case(updated.case_id);
        ordered_json packet_json(nullptr);
        if (record != nullptr && !updated.revealed_packet_ids.empty()) {
            if (const EvidencePacket* packet =
                    record->packet_by_id(updated.revealed_packet_ids.back())) {
                packet_json = case_to_json(*record)["packets"]
                                  [static_cast<std::size_t>(packet - record->packets.data())];
            }
        }
        ordered_json j;
        j["packet"] = packet_json;
        j["session"] = session_to_json(updated);
        send_json(res, j);
    }));

    server.Post("/v1/sessions/:id/diagnosis", guarded(true, [this](const httplib::Request& req,
                                                                   httplib::Response& res) {
        const ordered_json body = parse_body(req);
        if (!body.contains("action")) {
            throw Error(ErrorCode::SchemaError, "missing field", "action");
        }
        const Action action = action_from_json(body.at("action"));
        if (!std::holds_alternative<DiagnosisAdd>(action) &&
            !std::holds_alternative<DiagnosisMove>(action) &&
            !std::holds_alternative<DiagnosisAttachEvidence>(action) &&
            !std::holds_alternative<DiagnosisRemove>(action)) {
            throw Error(ErrorCode::SchemaError, "not a diagnosis action");
        }
        send_json(res, session_to_json(store_->commit_action(req.path_params.at("id"), action)));
    }));

    server.Post("/v1/sessions/:id/mindmap", guarded(true, [this](const httplib::Request& req,
                                                                 httplib::Response& res) {
        const ordered_json body = parse_body(req);
        if (!body.contains("action")) {
            throw Error(ErrorCode::SchemaError, "missing field", "action");
        }
        const Action action = action_from_json(body.at("action"));
        if (!std::holds_alternative<MindMapAddNode>(action) &&
            !std::holds_alternative<MindMapEditNode>(action) &&
            !std::holds_alternative<MindMapRemoveNode>(action)) {
            throw Error(ErrorCode::SchemaError, "not a mind map action");
        }
        send_json(res, session_to_json(store_->commit_action(req.path_params.at("id"), action)));
    }));

    server.Post("/v1/sessions/:id/annotations", guarded(true, [this](const httplib::Request& req,
                                                                     httplib::Response& res) {
        const ordered_json body = parse_body(req);
        ordered_json wrapped;
        wrapped["type"] = "annotate";
        wrapped["annotation"] = body.contains("annotation") ? body.at("annotation") : body;
        const Action action = action_from_json(wrapped);
        send_json(res, session_to_json(store_->commit_action(req.path_params.at("id"), action)));
    }));

    server.Get("/v1/sessions/:id/labs/:packet_id/flags",
               guarded(false, [this](const httplib::Request& req, httplib::Response& res) {
                   const Session session = store_->session(req.path_params.at("id"));
                   auto corpus = store_->corpus();
                   const CaseRecord* record = corpus->find_case(session.case_id);
                   if (record == nullptr) {
                       throw Error(ErrorCode::NotFound, "session case disappeared",
                                   session.case_id);
                   }
                   const std::string packet_id = req.path_params.at("packet_id");
                   const EvidencePacket* packet = record->packet_by_id(packet_id);
                   if (packet == nullptr) {
                       throw Error(ErrorCode::NotFound, "unknown packet", packet_id);
                   }
                   ordered_json j;
                   j["flags"] = ordered_json::array();
                   for (const auto& row : flag_labs(*packet)) {
                       j["flags"].push_back({{"item", row.item}, {"status", to_string(row.status)}});
                   }
                   send_json(res, j);
               }));

    server.Post("/v1/sessions/:id/report", guarded(true, [this](const httplib::Request& req,
                                                                httplib::Response& res) {
        const ordered_json body = parse_body(req);
        std::map<CrcDimension, std::string> learner_content;
        if (body.contains("learner_content")) {
            for (const auto& [key, value] : body.at("learner_content").items()) {
                auto dimension = parse_crc_dimension(key);
                if (!dimension) {
                    throw Error(ErrorCode::SchemaError, "unknown report dimension", key);
                }
                learner_content[*dimension] = value.get<std::string>();
            }
        }
        send_json(res, report_to_json(store_->generate_and_store_report(
                           req.path_params.at("id"), learner_content)));
    }));

    server.Get("/v1/sessions/:id/report", guarded(false, [this](const httplib::Request& req,
                                                                httplib::Response& res) {
        const std::string session_id = req.path_params.at("id");
        (void)store_->session(session_id);  // NotFound check
        auto report = store_->report(session_id);
        if (!report) {
            throw Error(ErrorCode::NotFound, "no report generated for this session", session_id);
        }
        send_json(res, report_to_json(*report));
    }));

    server.Post("/v1/reports/:id/scores", guarded(true, [this](const httplib::Request& req,
                                                               httplib::Response& res) {
        const std::string session_id = req.path_params.at("id");
        const ordered_json body = parse_body(req);
        const ordered_json& sheet_list = body.contains("sheets") ? body.at("sheets") : body;
        if (!sheet_list.is_array()) {
            throw Error(ErrorCode::SchemaError, "expected an array of rater sheets");
        }
        std::vector<RaterSheet> sheets;
        for (const auto& sj : sheet_list) sheets.push_back(parse_rater_sheet(sj.dump()));
        const AggregateScore aggregate = aggregate_scores(sheets);  // validates
        store_->store_sheets(session_id, sheets);
        send_json(res, aggregate_to_json(aggregate));
    }));

    server.Get("/v1/reports/:id/aggregate", guarded(false, [this](const httplib::Request& req,
                                                                  httplib::Response& res) {
        const std::string session_id = req.path_params.at("id");
        const std::vector<RaterSheet> sheets = store_->sheets(session_id);
        if (sheets.empty()) {
            throw Error(ErrorCode::NotFound, "no rater sheets stored for this report",
                        session_id);
        }
        send_json(res, aggregate_to_json(aggregate_scores(sheets)));
    }));

    server.Get("/v1/sessions/:id/export", guarded(false, [this](const httplib::Request& req,
                                                                httplib::Response& res) {
        const std::string bundle = store_->export_session(req.path_params.at("id"));
        res.status = 200;
        res.set_content(bundle, "application/gzip");
    }));
}

int Service::serve() {
    httplib::Server server;
    register_routes(server);
    std::cout << "listening on " << config_.listen_address << ":" << config_.port << std::endl;
    if (!server.listen(config_.listen_address, config_.port)) {
        std::cerr << "failed to bind " << config_.listen_address << ":" << config_.port
                  << std::endl;
        return 1;
    }
    return 0;
}

}  // namespace casetrain
