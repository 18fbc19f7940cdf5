#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "casetrain/case_types.hpp"
#include "casetrain/inquiry.hpp"

namespace casetrain {

/// External completion endpoint settings, normally taken from the
/// environment (MODEL_ENDPOINT, MODEL_KEY, MODEL_NAME, MODEL_TIMEOUT_S,
/// ORACLE_ONLY).
struct AdapterConfig {
    std::string endpoint;
    std::string credential;
    std::string model;
    int timeout_seconds = 30;
    bool oracle_only = false;

    static AdapterConfig from_env();

    [[nodiscard]] bool enabled() const { return !oracle_only && !endpoint.empty(); }
};

/// Transport seam: one blocking chat-style completion. Implementations throw
/// Error(TransportError) when the endpoint cannot be reached.
class CompletionClient {
public:
    virtual ~CompletionClient() = default;
    virtual std::string complete(const std::string& system_prompt,
                                 const std::string& user_text) = 0;
};

/// Talks to an OpenAI-compatible chat completions endpoint.
class HttpCompletionClient final : public CompletionClient {
public:
    explicit HttpCompletionClient(AdapterConfig config);
    std::string complete(const std::string& system_prompt, const std::string& user_text) override;

private:
    AdapterConfig config_;
};

/// Parses a model reply in the structured response format: lines of
/// "term: Yes" (details on a following "Relevant Data:" line),
/// "term: Irrelevant", denial wordings, and the numbered "Symptom N:" form,
/// which is resolved against `queried_terms`. A reply carrying the
/// clarification sentence parses as a clarification response. Throws
/// Error(ParseError) with the raw reply attached when no verdict can be
/// recovered.
InquiryResponse parse_model_reply(const std::string& reply,
                                  const std::vector<std::string>& queried_terms,
                                  const Lexicon* lexicon = nullptr);

/// Per-term comparison between a model response and the oracle's.
struct VerdictDisagreement {
    std::string term;
    Verdict model_verdict;
    Verdict oracle_verdict;
};

struct ConsistencyReport {
    std::vector<std::string> agreements;            ///< terms with matching verdicts
    std::vector<VerdictDisagreement> disagreements;
    std::vector<std::string> missing_in_model;      ///< oracle answered, model did not
    std::vector<std::string> missing_in_oracle;     ///< model answered unprompted

    [[nodiscard]] bool consistent() const {
        return disagreements.empty() && missing_in_model.empty() && missing_in_oracle.empty();
    }
};

ConsistencyReport reconcile_with_oracle(const InquiryResponse& model_response,
                                        const InquiryResponse& oracle_response);

/// The full model path: render the case prompt, call the endpoint, parse the
/// reply. Throws Error(OracleOnly) when the adapter is disabled.
class ModelAdapter {
public:
    ModelAdapter(AdapterConfig config, std::shared_ptr<CompletionClient> client);

    [[nodiscard]] bool enabled() const { return config_.enabled(); }

    InquiryResponse answer(const CaseRecord& record, const Lexicon& lexicon,
                           const std::string& raw_text);

private:
    AdapterConfig config_;
    std::shared_ptr<CompletionClient> client_;
};

}  // namespace casetrain
