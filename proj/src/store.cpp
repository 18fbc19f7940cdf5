#include "casetrain/store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "casetrain/errors.hpp"

namespace casetrain {

namespace {

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read file", path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& data) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::StorageError, "cannot write file", tmp.string());
        out << data;
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error(ErrorCode::StorageError, "cannot replace file", path.string());
}

std::vector<std::string> split_lines(const std::string& data) {
    std::vector<std::string> lines;
    std::istringstream in(data);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) lines.push_back(line);
    }
    return lines;
}

}  // namespace

Store::Store(std::filesystem::path root, std::shared_ptr<Clock> clock)
    : root_(std::move(root)),
      corpus_dir_(root_ / "corpus"),
      sessions_dir_(root_ / "sessions"),
      clock_(std::move(clock)) {
    std::filesystem::create_directories(corpus_dir_ / "cases");
    std::filesystem::create_directories(sessions_dir_);
    if (!std::filesystem::exists(corpus_dir_ / "manifest.json")) {
        write_file_atomic(corpus_dir_ / "manifest.json",
                          "{\n  \"taxonomy\": [],\n  \"cases\": []\n}\n");
    }

    auto corpus = std::make_shared<Corpus>(Corpus::load(corpus_dir_));
    lexicon_ = std::make_shared<Lexicon>(Lexicon::from_corpus(*corpus));
    corpus_ = std::move(corpus);

    // Replay every session log into a snapshot.
    std::vector<std::filesystem::path> logs;
    for (const auto& entry : std::filesystem::directory_iterator(sessions_dir_)) {
        if (entry.path().extension() == ".log") logs.push_back(entry.path());
    }
    std::sort(logs.begin(), logs.end());
    for (const auto& path : logs) {
        const std::string session_id = path.stem().string();
        auto lines = split_lines(read_text_file(path));
        if (lines.empty()) {
            throw Error(ErrorCode::ReplayError, "session log is empty", session_id);
        }
        LogRecord first = log_record_from_line(lines[0], 1);
        if (!first.is_start()) {
            throw Error(ErrorCode::ReplayError, "log does not begin with a start record",
                        session_id);
        }
        const CaseRecord* record = corpus_->find_case(*first.start_case_id);
        if (record == nullptr) {
            throw Error(ErrorCode::ReplayError,
                        "session \"" + session_id + "\" references unknown case",
                        *first.start_case_id);
        }
        auto state = std::make_unique<SessionState>();
        state->snapshot = replay_session_log(*record, session_id, lines);
        state->next_seq = static_cast<std::int64_t>(lines.size()) + 1;
        state->log_lines = std::move(lines);
        sessions_.emplace(session_id, std::move(state));

        // Session ids are "s-<n>"; keep the counter past every existing one.
        if (session_id.rfind("s-", 0) == 0) {
            try {
                next_session_number_ =
                    std::max(next_session_number_, std::stoi(session_id.substr(2)) + 1);
            } catch (...) {
            }
        }
    }
}

std::shared_ptr<const Corpus> Store::corpus() const {
    std::shared_lock lock(corpus_mutex_);
    return corpus_;
}

std::shared_ptr<const Lexicon> Store::lexicon() const {
    std::shared_lock lock(corpus_mutex_);
    return lexicon_;
}

ValidationReport Store::ingest_case(const std::string& document) {
    std::unique_lock lock(corpus_mutex_);
    CaseRecord record = parse_case_document(document);
    ValidationReport report = validate_case(record, &corpus_->taxonomy());
    if (!report.valid()) return report;

    const std::string rel = "cases/" + record.id + ".json";
    write_file_atomic(corpus_dir_ / rel, serialize_case(record));

    // Register the file in the manifest if it is new.
    ordered_json manifest = ordered_json::parse(read_text_file(corpus_dir_ / "manifest.json"));
    auto& cases = manifest["cases"];
    if (std::find(cases.begin(), cases.end(), ordered_json(rel)) == cases.end()) {
        cases.push_back(rel);
    }
    write_file_atomic(corpus_dir_ / "manifest.json", manifest.dump(2) + "\n");

    auto corpus = std::make_shared<Corpus>(Corpus::load(corpus_dir_));
    lexicon_ = std::make_shared<Lexicon>(Lexicon::from_corpus(*corpus));
    corpus_ = std::move(corpus);
    return report;
}

std::vector<std::string> Store::session_ids() const {
    std::shared_lock lock(sessions_mutex_);
    std::vector<std::string> ids;
    ids.reserve(sessions_.size());
    for (const auto& [id, _] : sessions_) ids.push_back(id);
    return ids;
}

Store::SessionState& Store::state_for(const std::string& session_id) const {
    std::shared_lock lock(sessions_mutex_);
    auto it = sessions_.find(session_id);
    if (it == sessions_.end()) {
        throw Error(ErrorCode::NotFound, "unknown session", session_id);
    }
    return *it->second;
}

Session Store::session(const std::string& session_id) const {
    SessionState& state = state_for(session_id);
    std::lock_guard guard(state.commit_mutex);
    return state.snapshot;
}

std::vector<std::string> Store::session_log(const std::string& session_id) const {
    SessionState& state = state_for(session_id);
    std::lock_guard guard(state.commit_mutex);
    return state.log_lines;
}

Store::PinnedCase Store::case_for(const Session& session) const {
    auto corpus = this->corpus();
    const CaseRecord* record = corpus->find_case(session.case_id);
    if (record == nullptr) {
        throw Error(ErrorCode::NotFound, "session case disappeared from the corpus",
                    session.case_id);
    }
    return {std::move(corpus), record};
}

void Store::append_log_line(const std::string& session_id, const std::string& line) {
    const std::filesystem::path path = sessions_dir_ / (session_id + ".log");
    const int fd = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT, 0644);
    if (fd < 0) {
        throw Error(ErrorCode::StorageError, "cannot open session log", path.string());
    }
    const std::string data = line + "\n";
    ssize_t written = ::write(fd, data.data(), data.size());
    const bool synced = written == static_cast<ssize_t>(data.size()) && ::fsync(fd) == 0;
    ::close(fd);
    if (!synced) {
        throw Error(ErrorCode::StorageError, "failed to append to session log", path.string());
    }
}

void Store::write_snapshot_file(const SessionState& state) {
    write_file_atomic(sessions_dir_ / (state.snapshot.id + ".snapshot"),
                      session_snapshot_text(state.snapshot));
}

Session Store::create_session(const std::string& case_id) {
    auto corpus = this->corpus();
    const CaseRecord* record = corpus->find_case(case_id);
    if (record == nullptr) {
        throw Error(ErrorCode::NotFound, "unknown case", case_id);
    }

    std::unique_lock lock(sessions_mutex_);
    char buffer[16];
    std::snprintf(buffer, sizeof(buffer), "s-%04d", next_session_number_++);
    const std::string session_id = buffer;

    const std::int64_t now = clock_->now();
    LogRecord start;
    start.seq = 1;
    start.timestamp = now;
    start.actor = "learner";
    start.start_case_id = case_id;
    const std::string line = log_record_to_line(start);

    auto state = std::make_unique<SessionState>();
    state->snapshot = start_session(session_id, *record, now);
    state->log_lines.push_back(line);
    state->next_seq = 2;

    append_log_line(session_id, line);
    write_snapshot_file(*state);
    Session snapshot = state->snapshot;
    sessions_.emplace(session_id, std::move(state));
    return snapshot;
}

Session Store::commit_action(const std::string& session_id, const Action& action) {
    SessionState& state = state_for(session_id);
    std::lock_guard guard(state.commit_mutex);

    const PinnedCase pinned = case_for(state.snapshot);
    const std::int64_t now = clock_->now();
    Session next = apply_action(*pinned.record, state.snapshot, action, now);

    LogRecord log_record;
    log_record.seq = state.next_seq;
    log_record.timestamp = now;
    log_record.actor = "learner";
    log_record.action = action;
    const std::string line = log_record_to_line(log_record);

    append_log_line(session_id, line);
    state.log_lines.push_back(line);
    state.next_seq += 1;
    state.snapshot = std::move(next);
    write_snapshot_file(state);
    return state.snapshot;
}

CaseReport Store::generate_and_store_report(
    const std::string& session_id, const std::map<CrcDimension, std::string>& learner_content) {
    SessionState& state = state_for(session_id);
    std::lock_guard guard(state.commit_mutex);
    const PinnedCase pinned = case_for(state.snapshot);
    CaseReport report = generate_report(state.snapshot, *pinned.record);
    // Keep learner text from an earlier generation unless the caller replaces it.
    if (auto previous = this->report(session_id)) {
        for (std::size_t i = 0; i < kCrcDimensionCount; ++i) {
            report.sections[i].learner_content = previous->sections[i].learner_content;
        }
    }
    for (const auto& [dimension, content] : learner_content) {
        report.section(dimension).learner_content = content;
    }
    write_file_atomic(sessions_dir_ / (session_id + ".report.json"),
                      report_to_json(report).dump(2) + "\n");
    return report;
}

std::optional<CaseReport> Store::report(const std::string& session_id) const {
    const std::filesystem::path path = sessions_dir_ / (session_id + ".report.json");
    if (!std::filesystem::exists(path)) return std::nullopt;
    return report_from_json(ordered_json::parse(read_text_file(path)));
}

void Store::store_sheets(const std::string& session_id, const std::vector<RaterSheet>& sheets) {
    state_for(session_id);  // NotFound check
    ordered_json j = ordered_json::array();
    for (const auto& sheet : sheets) {
        ordered_json scores = ordered_json::object();
        for (const auto& [id, score] : sheet.scores) scores[std::to_string(id)] = score;
        j.push_back({{"rater_id", sheet.rater_id}, {"scores", std::move(scores)}});
    }
    write_file_atomic(sessions_dir_ / (session_id + ".scores.json"), j.dump(2) + "\n");
}

std::vector<RaterSheet> Store::sheets(const std::string& session_id) const {
    const std::filesystem::path path = sessions_dir_ / (session_id + ".scores.json");
    if (!std::filesystem::exists(path)) return {};
    ordered_json j = ordered_json::parse(read_text_file(path));
    std::vector<RaterSheet> sheets;
    for (const auto& sj : j) {
        sheets.push_back(parse_rater_sheet(sj.dump()));
    }
    return sheets;
}

std::string Store::export_session(const std::string& session_id) {
    SessionState& state = state_for(session_id);
    std::lock_guard guard(state.commit_mutex);
    const PinnedCase pinned = case_for(state.snapshot);
    const std::optional<CaseReport> stored_report = report(session_id);

    BundleInput input;
    input.session = &state.snapshot;
    input.record = pinned.record;
    input.report = stored_report ? &*stored_report : nullptr;
    input.log_lines = state.log_lines;
    input.corpus_dir = corpus_dir_;
    input.created_at = clock_->now();
    return export_bundle(input);
}

}  // namespace casetrain
