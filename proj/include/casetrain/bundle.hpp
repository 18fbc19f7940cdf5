#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "casetrain/case_types.hpp"
#include "casetrain/report.hpp"
#include "casetrain/session.hpp"

namespace casetrain {

/// Everything needed to build the export archive for one session.
struct BundleInput {
    const Session* session = nullptr;
    const CaseRecord* record = nullptr;
    const CaseReport* report = nullptr;         ///< optional
    std::vector<std::string> log_lines;         ///< the session's action log
    std::filesystem::path corpus_dir;           ///< for image binaries; may be empty
    std::int64_t created_at = 0;
};

/// Builds the session bundle: a gzip-compressed tar with fixed entry names
/// (`manifest`, `actions.log`, `session.snapshot`, `report.struct`,
/// `report.txt`, `mindmap.struct`, `diagnosis_history.struct`,
/// `annotations.struct`, `images/...`). The manifest lists a sha256 per
/// entry, so the bundle verifies offline. Incomplete sessions export with
/// `complete: false` and no report entries.
std::string export_bundle(const BundleInput& input);

struct ImportedBundle {
    nlohmann::ordered_json manifest;
    std::vector<std::string> log_lines;
    Session session;  ///< replayed from the imported log
    std::optional<CaseReport> report;
};

/// Reads a bundle back and replays its action log against the case record.
/// Throws Error(ParseError) on structural problems and Error(ValueError) when
/// a manifest hash does not match its entry.
ImportedBundle import_bundle(const std::string& bytes, const CaseRecord& record);

}  // namespace casetrain
