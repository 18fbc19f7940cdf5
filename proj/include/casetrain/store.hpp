#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "casetrain/bundle.hpp"
#include "casetrain/clock.hpp"
#include "casetrain/corpus.hpp"
#include "casetrain/report.hpp"
#include "casetrain/session.hpp"
#include "casetrain/session_json.hpp"

namespace casetrain {

/// File-backed store rooted at one directory:
///
///     <root>/corpus/manifest.json     corpus manifest
///     <root>/corpus/cases/...         case documents
///     <root>/sessions/<id>.log        append-only action logs (authoritative)
///     <root>/sessions/<id>.snapshot   derived snapshot, for inspection
///     <root>/sessions/<id>.report.json
///     <root>/sessions/<id>.scores.json
///
/// Opening replays every session log; an acknowledged action is on disk
/// (fsync before return), so restart recovers exactly the committed state.
/// Mutations to one session are serialized; distinct sessions and all reads
/// proceed concurrently. The corpus is an immutable snapshot swapped
/// atomically on ingest.
class Store {
public:
    Store(std::filesystem::path root, std::shared_ptr<Clock> clock);

    [[nodiscard]] std::shared_ptr<const Corpus> corpus() const;
    [[nodiscard]] std::shared_ptr<const Lexicon> lexicon() const;

    /// Validates and installs a case document, then swaps in a fresh corpus
    /// snapshot. Returns the record-level validation report; installation
    /// happens only when it is clean.
    ValidationReport ingest_case(const std::string& document);

    [[nodiscard]] std::vector<std::string> session_ids() const;
    [[nodiscard]] Session session(const std::string& session_id) const;
    [[nodiscard]] std::vector<std::string> session_log(const std::string& session_id) const;

    Session create_session(const std::string& case_id);

    /// Appends the action to the session's log (fsync'd before returning) and
    /// publishes the new snapshot.
    Session commit_action(const std::string& session_id, const Action& action);

    CaseReport generate_and_store_report(
        const std::string& session_id,
        const std::map<CrcDimension, std::string>& learner_content = {});
    [[nodiscard]] std::optional<CaseReport> report(const std::string& session_id) const;

    void store_sheets(const std::string& session_id, const std::vector<RaterSheet>& sheets);
    [[nodiscard]] std::vector<RaterSheet> sheets(const std::string& session_id) const;

    /// Builds the export bundle for a session (report included when stored).
    std::string export_session(const std::string& session_id);

    [[nodiscard]] const std::filesystem::path& root() const { return root_; }

private:
    struct SessionState {
        Session snapshot;
        std::vector<std::string> log_lines;
        std::int64_t next_seq = 1;
        std::mutex commit_mutex;
    };

    /// Keeps the corpus snapshot alive for as long as the record is in use.
    struct PinnedCase {
        std::shared_ptr<const Corpus> corpus;
        const CaseRecord* record;
    };
    PinnedCase case_for(const Session& session) const;
    SessionState& state_for(const std::string& session_id) const;
    void append_log_line(const std::string& session_id, const std::string& line);
    void write_snapshot_file(const SessionState& state);

    std::filesystem::path root_;
    std::filesystem::path corpus_dir_;
    std::filesystem::path sessions_dir_;
    std::shared_ptr<Clock> clock_;

    mutable std::shared_mutex corpus_mutex_;
    std::shared_ptr<const Corpus> corpus_;
    std::shared_ptr<const Lexicon> lexicon_;

    mutable std::shared_mutex sessions_mutex_;
    std::map<std::string, std::unique_ptr<SessionState>> sessions_;
    int next_session_number_ = 1;
};

}  // namespace casetrain
