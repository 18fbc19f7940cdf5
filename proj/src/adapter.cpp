#include "casetrain/adapter.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "casetrain/errors.hpp"
#include "casetrain/text.hpp"

namespace casetrain {

namespace {

std::string env_or(const char* name, std::string fallback) {
    const char* value = std::getenv(name);
    return value == nullptr ? std::move(fallback) : std::string(value);
}

std::string trim(std::string_view s) {
    std::size_t begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string_view::npos) return "";
    std::size_t end = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(begin, end - begin + 1));
}

/// Strips list decoration: leading "-", "*", "1." or "1)" markers.
std::string strip_bullet(std::string line) {
    std::string s = trim(line);
    if (!s.empty() && (s[0] == '-' || s[0] == '*')) return trim(s.substr(1));
    std::size_t digits = 0;
    while (digits < s.size() && std::isdigit(static_cast<unsigned char>(s[digits]))) ++digits;
    if (digits > 0 && digits < s.size() && (s[digits] == '.' || s[digits] == ')')) {
        // Keep "1. ..." only when it does not look like "Symptom 1: ..."
        return trim(s.substr(digits + 1));
    }
    return s;
}

std::optional<Verdict> verdict_from_text(std::string_view rhs) {
    const std::vector<std::string> tokens = text::tokenize(rhs);
    if (tokens.empty()) return std::nullopt;
    const std::string& first = tokens[0];
    if (first == "yes") return Verdict::Present;
    if (first == "irrelevant") return Verdict::NotInRecord;
    if (first == "no" || first == "denied" || first == "denies") return Verdict::Denied;
    if (first == "patient" && tokens.size() > 1 && tokens[1] == "denies") return Verdict::Denied;
    return std::nullopt;
}

}  // namespace

AdapterConfig AdapterConfig::from_env() {
    AdapterConfig config;
    config.endpoint = env_or("MODEL_ENDPOINT", "");
    config.credential = env_or("MODEL_KEY", "");
    config.model = env_or("MODEL_NAME", "");
    try {
        config.timeout_seconds = std::stoi(env_or("MODEL_TIMEOUT_S", "30"));
    } catch (...) {
        config.timeout_seconds = 30;
    }
    const std::string oracle_only = text::normalize(env_or("ORACLE_ONLY", ""));
    config.oracle_only = oracle_only == "1" || oracle_only == "true" || oracle_only == "yes";
    return config;
}

HttpCompletionClient::HttpCompletionClient(AdapterConfig config) : config_(std::move(config)) {}

std::string HttpCompletionClient::complete(const std::string& system_prompt,
                                           const std::string& user_text) {
    // Split "http://host:port" from any path prefix the endpoint carries.
    std::string base = config_.endpoint;
    std::string prefix;
    const std::size_t scheme = base.find("://");
    if (scheme != std::string::npos) {
        const std::size_t slash = base.find('/', scheme + 3);
        if (slash != std::string::npos) {
            prefix = base.substr(slash);
            base = base.substr(0, slash);
        }
    }

    httplib::Client client(base);
    client.set_connection_timeout(config_.timeout_seconds);
    client.set_read_timeout(config_.timeout_seconds);
    httplib::Headers headers;
    if (!config_.credential.empty()) {
        headers.emplace("Authorization", "Bearer " + config_.credential);
    }

    nlohmann::ordered_json body;
    body["model"] = config_.model;
    body["messages"] = {{{"role", "system"}, {"content", system_prompt}},
                        {{"role", "user"}, {"content", user_text}}};

    auto result = client.Post(prefix + "/chat/completions", headers, body.dump(),
                              "application/json");
    if (!result) {
        throw Error(ErrorCode::TransportError, "completion endpoint unreachable",
                    httplib::to_string(result.error()));
    }
    if (result->status != 200) {
        throw Error(ErrorCode::TransportError,
                    "completion endpoint returned status " + std::to_string(result->status),
                    result->body);
    }
    try {
        auto parsed = nlohmann::json::parse(result->body);
        return parsed.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, "malformed completion payload", result->body);
    }
}

InquiryResponse parse_model_reply(const std::string& reply,
                                  const std::vector<std::string>& queried_terms,
                                  const Lexicon* lexicon) {
    if (reply.find(kClarificationSentence) != std::string::npos ||
        text::contains_normalized(reply, "could you please specify the symptom")) {
        InquiryResponse response;
        response.needs_clarification = true;
        response.clarification_text = std::string(kClarificationSentence);
        return response;
    }

    InquiryResponse response;
    std::istringstream lines(reply);
    std::string raw_line;
    std::ptrdiff_t pending = -1;  // index of a verdict awaiting a Relevant Data line
    while (std::getline(lines, raw_line)) {
        const std::string line = strip_bullet(raw_line);
        if (line.empty()) continue;
        const std::size_t colon = line.find(':');
        if (colon == std::string::npos) continue;
        const std::string lhs = trim(line.substr(0, colon));
        const std::string rhs = trim(line.substr(colon + 1));

        if (text::normalize(lhs) == "relevant data") {
            if (pending >= 0) {
                response.verdicts[static_cast<std::size_t>(pending)].details = rhs;
                pending = -1;
            }
            continue;
        }

        auto verdict = verdict_from_text(rhs);
        if (!verdict) continue;

        // Resolve the term: "Symptom N" indexes the queried terms.
        std::string term = text::normalize(lhs);
        const std::vector<std::string> lhs_tokens = text::tokenize(lhs);
        if (lhs_tokens.size() == 2 && lhs_tokens[0] == "symptom" &&
            !lhs_tokens[1].empty() &&
            std::all_of(lhs_tokens[1].begin(), lhs_tokens[1].end(),
                        [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
            const std::size_t index = std::stoul(lhs_tokens[1]);
            if (index == 0 || index > queried_terms.size()) {
                throw Error(ErrorCode::ParseError,
                            "numbered symptom does not match the query", reply);
            }
            term = text::normalize(queried_terms[index - 1]);
        } else if (lexicon != nullptr) {
            if (auto canonical = lexicon->canonical_of(lhs)) term = *canonical;
        }

        SymptomVerdict sv;
        sv.term = std::move(term);
        sv.verdict = *verdict;
        if (*verdict == Verdict::Denied) {
            sv.details = "Patient denies " + sv.term + ".";
        }
        response.verdicts.push_back(std::move(sv));
        pending = (*verdict == Verdict::Present)
                      ? static_cast<std::ptrdiff_t>(response.verdicts.size()) - 1
                      : -1;
    }

    if (response.verdicts.empty()) {
        throw Error(ErrorCode::ParseError, "reply contains no symptom verdict lines", reply);
    }
    for (auto& verdict : response.verdicts) {
        if (verdict.verdict == Verdict::Present && verdict.details.empty()) {
            verdict.details = "Reported by the model without details.";
        }
    }
    return response;
}

ConsistencyReport reconcile_with_oracle(const InquiryResponse& model_response,
                                        const InquiryResponse& oracle_response) {
    ConsistencyReport report;
    std::map<std::string, Verdict> model;
    for (const auto& v : model_response.verdicts) model.emplace(text::normalize(v.term), v.verdict);
    std::map<std::string, Verdict> oracle;
    for (const auto& v : oracle_response.verdicts) {
        oracle.emplace(text::normalize(v.term), v.verdict);
    }

    for (const auto& [term, oracle_verdict] : oracle) {
        auto it = model.find(term);
        if (it == model.end()) {
            report.missing_in_model.push_back(term);
        } else if (it->second == oracle_verdict) {
            report.agreements.push_back(term);
        } else {
            report.disagreements.push_back({term, it->second, oracle_verdict});
        }
    }
    for (const auto& [term, _] : model) {
        if (!oracle.contains(term)) report.missing_in_oracle.push_back(term);
    }
    return report;
}

ModelAdapter::ModelAdapter(AdapterConfig config, std::shared_ptr<CompletionClient> client)
    : config_(std::move(config)), client_(std::move(client)) {}

InquiryResponse ModelAdapter::answer(const CaseRecord& record, const Lexicon& lexicon,
                                     const std::string& raw_text) {
    if (!config_.enabled() || client_ == nullptr) {
        throw Error(ErrorCode::OracleOnly, "model adapter is disabled by configuration");
    }
    const RenderedPrompt prompt = render_case_prompt(record);
    const std::string reply = client_->complete(prompt.text, raw_text);
    const std::vector<std::string> queried = extract_terms(raw_text, lexicon);
    return parse_model_reply(reply, queried, &lexicon);
}

}  // namespace casetrain
