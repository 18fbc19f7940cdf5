#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "casetrain/session.hpp"

namespace casetrain {

using ordered_json = nlohmann::ordered_json;

ordered_json inquiry_response_to_json(const InquiryResponse& response);
InquiryResponse inquiry_response_from_json(const ordered_json& j);

/// Action payloads as carried by the API and the session log. The `type` key
/// selects the action kind.
ordered_json action_to_json(const Action& action);
Action action_from_json(const ordered_json& j);

ordered_json session_to_json(const Session& session);
Session session_from_json(const ordered_json& j);

/// Canonical snapshot bytes; replay equivalence is checked on these.
std::string session_snapshot_text(const Session& session);

/// One line of the append-only session log. The first record of every log is
/// a `start` record naming the case; the rest carry actions.
struct LogRecord {
    std::int64_t seq = 0;
    std::int64_t timestamp = 0;
    std::string actor;
    std::optional<std::string> start_case_id;  ///< set on start records
    std::optional<Action> action;              ///< set on action records

    [[nodiscard]] bool is_start() const { return start_case_id.has_value(); }
};

std::string log_record_to_line(const LogRecord& record);

/// Throws Error(ReplayError) naming the sequence number when the line is
/// corrupt.
LogRecord log_record_from_line(const std::string& line, std::int64_t expected_seq);

/// Rebuilds a session by folding the whole log. Throws Error(ReplayError) on
/// a corrupt line, a missing start record, or an action that no longer
/// applies.
Session replay_session_log(const CaseRecord& record, const std::string& session_id,
                           const std::vector<std::string>& lines);

}  // namespace casetrain
