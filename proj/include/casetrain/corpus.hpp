#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "casetrain/case_io.hpp"
#include "casetrain/case_types.hpp"
#include "casetrain/taxonomy.hpp"

namespace casetrain {

/// Result of drilling into the taxonomy: the node at the end of the path, its
/// children, and the cases filed under it.
struct TaxonomyView {
    const TaxonomyNode* node = nullptr;  ///< null for the root listing
    std::vector<const TaxonomyNode*> children;
    std::vector<CaseSummary> cases;
};

/// Immutable snapshot of the case corpus. Reads are freely concurrent;
/// ingestion builds a replacement snapshot and swaps it in at the store level.
class Corpus {
public:
    Corpus() = default;

    /// Validates every case against the taxonomy; throws Error(CorpusError)
    /// naming the first failing case.
    Corpus(Taxonomy taxonomy, std::vector<CaseRecord> cases,
           std::filesystem::path dir = {});

    /// Loads `<dir>/manifest.json` and every case file it lists.
    static Corpus load(const std::filesystem::path& dir);

    [[nodiscard]] const Taxonomy& taxonomy() const { return taxonomy_; }
    [[nodiscard]] const std::vector<CaseRecord>& cases() const { return cases_; }
    [[nodiscard]] const CaseRecord* find_case(const std::string& id) const;
    [[nodiscard]] const std::filesystem::path& dir() const { return dir_; }

    /// Taxonomy drill-down. The empty path is the root listing: all top-level
    /// specialties and no cases. For nonempty paths the returned cases are
    /// exactly those whose taxonomy_path has `path` as a prefix, in id order.
    /// Throws Error(NotFound) naming the first unresolvable segment.
    [[nodiscard]] TaxonomyView resolve(const std::vector<std::string>& path) const;

    /// Keyword search over description and initial narrative. Ranking is the
    /// descending count of distinct matched keywords, ties broken by case id;
    /// an empty query lists everything under the filter in id order.
    [[nodiscard]] std::vector<CaseSummary> search(
        const std::string& query, const std::vector<std::string>& path_filter = {}) const;

private:
    Taxonomy taxonomy_;
    std::vector<CaseRecord> cases_;  // id order
    std::map<std::string, std::size_t> by_id_;
    std::filesystem::path dir_;
};

/// Parses the `taxonomy` array of a corpus manifest.
Taxonomy parse_manifest_taxonomy(const std::string& manifest_text);

}  // namespace casetrain
