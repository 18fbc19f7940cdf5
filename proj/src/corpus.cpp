#include "casetrain/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "casetrain/errors.hpp"
#include "casetrain/text.hpp"

namespace casetrain {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read file", path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

bool is_path_prefix(const std::vector<std::string>& prefix, const std::vector<std::string>& path) {
    if (prefix.size() > path.size()) return false;
    return std::equal(prefix.begin(), prefix.end(), path.begin());
}

CaseSummary summary_of(const CaseRecord& record) {
    return {record.id, record.description, record.taxonomy_path};
}

}  // namespace

Corpus::Corpus(Taxonomy taxonomy, std::vector<CaseRecord> cases, std::filesystem::path dir)
    : taxonomy_(std::move(taxonomy)), cases_(std::move(cases)), dir_(std::move(dir)) {
    std::sort(cases_.begin(), cases_.end(),
              [](const CaseRecord& a, const CaseRecord& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < cases_.size(); ++i) {
        const CaseRecord& record = cases_[i];
        if (!by_id_.emplace(record.id, i).second) {
            throw Error(ErrorCode::CorpusError, "duplicate case id", record.id);
        }
        ValidationReport report = validate_case(record, &taxonomy_);
        if (!report.valid()) {
            throw Error(ErrorCode::CorpusError, "case \"" + record.id + "\" is invalid",
                        report.summary());
        }
    }
}

Taxonomy parse_manifest_taxonomy(const std::string& manifest_text) {
    ordered_json j;
    try {
        j = ordered_json::parse(manifest_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::CorpusError, std::string("manifest is not valid JSON: ") + e.what());
    }
    std::vector<TaxonomyNode> nodes;
    for (const auto& nj : j.value("taxonomy", ordered_json::array())) {
        TaxonomyNode node;
        node.id = nj.at("id").get<std::string>();
        node.label = nj.at("label").get<std::string>();
        if (nj.contains("children")) {
            node.children = nj.at("children").get<std::vector<std::string>>();
        }
        nodes.push_back(std::move(node));
    }
    return Taxonomy(std::move(nodes));
}

Corpus Corpus::load(const std::filesystem::path& dir) {
    const auto manifest_path = dir / "manifest.json";
    const std::string manifest_text = read_file(manifest_path);
    Taxonomy taxonomy = parse_manifest_taxonomy(manifest_text);

    ordered_json manifest = ordered_json::parse(manifest_text);
    std::vector<CaseRecord> cases;
    for (const auto& entry : manifest.value("cases", ordered_json::array())) {
        const std::string rel = entry.get<std::string>();
        const std::string document = read_file(dir / rel);
        CaseRecord record;
        try {
            record = parse_case_document(document);
        } catch (const Error& e) {
            throw Error(ErrorCode::CorpusError,
                        "case file \"" + rel + "\" failed to parse: " + e.what(), e.detail());
        }
        cases.push_back(std::move(record));
    }
    return Corpus(std::move(taxonomy), std::move(cases), dir);
}

const CaseRecord* Corpus::find_case(const std::string& id) const {
    auto it = by_id_.find(id);
    return it == by_id_.end() ? nullptr : &cases_[it->second];
}

TaxonomyView Corpus::resolve(const std::vector<std::string>& path) const {
    TaxonomyView view;
    if (path.empty()) {
        for (const auto& root_id : taxonomy_.roots()) view.children.push_back(taxonomy_.find(root_id));
        return view;
    }
    auto check = taxonomy_.check_path(path);
    if (!check.ok) {
        throw Error(ErrorCode::NotFound, "taxonomy path segment does not resolve",
                    path[check.bad_index]);
    }
    view.node = taxonomy_.find(path.back());
    for (const auto& child_id : view.node->children) {
        view.children.push_back(taxonomy_.find(child_id));
    }
    for (const auto& record : cases_) {
        if (is_path_prefix(path, record.taxonomy_path)) view.cases.push_back(summary_of(record));
    }
    return view;
}

std::vector<CaseSummary> Corpus::search(const std::string& query,
                                        const std::vector<std::string>& path_filter) const {
    std::vector<std::string> keywords;
    {
        std::set<std::string> seen;
        for (auto& token : text::tokenize(query)) {
            if (seen.insert(token).second) keywords.push_back(token);
        }
    }

    struct Hit {
        const CaseRecord* record;
        std::size_t matched;
    };
    std::vector<Hit> hits;
    for (const auto& record : cases_) {
        if (!path_filter.empty() && !is_path_prefix(path_filter, record.taxonomy_path)) continue;
        if (keywords.empty()) {
            hits.push_back({&record, 0});
            continue;
        }
        std::set<std::string> tokens;
        for (auto& t : text::tokenize(record.description)) tokens.insert(std::move(t));
        for (auto& t : text::tokenize(record.initial_narrative)) tokens.insert(std::move(t));
        std::size_t matched = 0;
        for (const auto& k : keywords) {
            if (tokens.contains(k)) ++matched;
        }
        if (matched > 0) hits.push_back({&record, matched});
    }

    std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
        if (a.matched != b.matched) return a.matched > b.matched;
        return a.record->id < b.record->id;
    });

    std::vector<CaseSummary> out;
    out.reserve(hits.size());
    for (const auto& hit : hits) out.push_back(summary_of(*hit.record));
    return out;
}

}  // namespace casetrain
