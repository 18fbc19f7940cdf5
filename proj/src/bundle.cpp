#include "casetrain/bundle.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "casetrain/archive.hpp"
#include "casetrain/errors.hpp"
#include "casetrain/session_json.hpp"
#include "casetrain/text.hpp"

namespace casetrain {

namespace {

using ordered_json = nlohmann::ordered_json;

std::optional<std::string> read_binary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

std::string export_bundle(const BundleInput& input) {
    const Session& session = *input.session;
    const CaseRecord& record = *input.record;

    std::vector<ArchiveEntry> entries;
    entries.push_back({"actions.log", text::join(input.log_lines, "\n") + "\n"});
    entries.push_back({"session.snapshot", session_snapshot_text(session)});
    if (input.report != nullptr) {
        entries.push_back({"report.struct", report_to_json(*input.report).dump(2) + "\n"});
        entries.push_back({"report.txt", report_to_text(*input.report)});
    }
    const ordered_json snapshot = session_to_json(session);
    entries.push_back({"mindmap.struct", snapshot.at("mind_map").dump(2) + "\n"});
    entries.push_back({"diagnosis_history.struct", snapshot.at("diagnosis_list").dump(2) + "\n"});
    entries.push_back({"annotations.struct", snapshot.at("annotations").dump(2) + "\n"});

    // Image binaries for revealed imaging studies, when present on disk.
    if (!input.corpus_dir.empty()) {
        std::set<std::string> included;
        for (const auto& packet_id : session.revealed_packet_ids) {
            const EvidencePacket* packet = record.packet_by_id(packet_id);
            if (packet == nullptr || packet->kind != PacketKind::ImagingStudy) continue;
            if (packet->image_path.empty() || !included.insert(packet->image_path).second) {
                continue;
            }
            if (auto bytes = read_binary(input.corpus_dir / packet->image_path)) {
                const std::string entry_path =
                    packet->image_path.rfind("images/", 0) == 0 ? packet->image_path
                                                                : "images/" + packet->image_path;
                entries.push_back({entry_path, std::move(*bytes)});
            }
        }
    }

    ordered_json manifest;
    manifest["format"] = "casetrain-bundle/1";
    manifest["created_at"] = input.created_at;
    manifest["session_id"] = session.id;
    manifest["case_id"] = session.case_id;
    manifest["complete"] = session.step == Step::PrognosisReflection;
    manifest["files"] = ordered_json::array();
    for (const auto& entry : entries) {
        manifest["files"].push_back({{"path", entry.path},
                                     {"sha256", sha256_hex(entry.data)},
                                     {"size", entry.data.size()}});
    }

    std::vector<ArchiveEntry> all;
    all.push_back({"manifest", manifest.dump(2) + "\n"});
    for (auto& entry : entries) all.push_back(std::move(entry));
    return write_tar_gz(all);
}

ImportedBundle import_bundle(const std::string& bytes, const CaseRecord& record) {
    const std::vector<ArchiveEntry> entries = read_tar_gz(bytes);
    ImportedBundle imported;

    const ArchiveEntry* manifest_entry = nullptr;
    for (const auto& entry : entries) {
        if (entry.path == "manifest") manifest_entry = &entry;
    }
    if (manifest_entry == nullptr) {
        throw Error(ErrorCode::ParseError, "bundle has no manifest");
    }
    try {
        imported.manifest = ordered_json::parse(manifest_entry->data);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("manifest is not valid JSON: ") + e.what());
    }

    // Verify every manifest hash against the entry bytes.
    for (const auto& fj : imported.manifest.at("files")) {
        const std::string path = fj.at("path").get<std::string>();
        const ArchiveEntry* found = nullptr;
        for (const auto& entry : entries) {
            if (entry.path == path) found = &entry;
        }
        if (found == nullptr) {
            throw Error(ErrorCode::ParseError, "manifest lists a missing entry", path);
        }
        if (sha256_hex(found->data) != fj.at("sha256").get<std::string>()) {
            throw Error(ErrorCode::ValueError, "bundle entry hash mismatch", path);
        }
    }

    const ArchiveEntry* log_entry = nullptr;
    const ArchiveEntry* report_entry = nullptr;
    for (const auto& entry : entries) {
        if (entry.path == "actions.log") log_entry = &entry;
        if (entry.path == "report.struct") report_entry = &entry;
    }
    if (log_entry == nullptr) {
        throw Error(ErrorCode::ParseError, "bundle has no action log");
    }
    std::istringstream lines(log_entry->data);
    std::string line;
    while (std::getline(lines, line)) {
        if (!line.empty()) imported.log_lines.push_back(line);
    }

    const std::string session_id = imported.manifest.at("session_id").get<std::string>();
    imported.session = replay_session_log(record, session_id, imported.log_lines);
    if (report_entry != nullptr) {
        imported.report = report_from_json(ordered_json::parse(report_entry->data));
    }
    return imported;
}

}  // namespace casetrain
