#include "casetrain/taxonomy.hpp"

#include <set>

#include "casetrain/errors.hpp"

namespace casetrain {

Taxonomy::Taxonomy(std::vector<TaxonomyNode> nodes) : nodes_(std::move(nodes)) {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (!index_.emplace(nodes_[i].id, i).second) {
            throw Error(ErrorCode::CorpusError, "duplicate taxonomy node id", nodes_[i].id);
        }
    }

    std::map<std::string, std::string> parent;
    for (const auto& node : nodes_) {
        std::set<std::string> sibling_labels;
        for (const auto& child_id : node.children) {
            auto it = index_.find(child_id);
            if (it == index_.end()) {
                throw Error(ErrorCode::CorpusError, "taxonomy child does not resolve", child_id);
            }
            if (!parent.emplace(child_id, node.id).second) {
                throw Error(ErrorCode::CorpusError, "taxonomy node has two parents", child_id);
            }
            if (!sibling_labels.insert(nodes_[it->second].label).second) {
                throw Error(ErrorCode::CorpusError, "duplicate label among siblings",
                            nodes_[it->second].label);
            }
        }
    }

    std::set<std::string> root_labels;
    for (const auto& node : nodes_) {
        if (parent.contains(node.id)) continue;
        roots_.push_back(node.id);
        if (!root_labels.insert(node.label).second) {
            throw Error(ErrorCode::CorpusError, "duplicate label among top-level nodes", node.label);
        }
    }

    // Acyclicity: walk each node up through its parent chain; a chain longer
    // than the node count means a cycle (which also implies no root).
    for (const auto& node : nodes_) {
        std::size_t hops = 0;
        auto it = parent.find(node.id);
        while (it != parent.end()) {
            if (++hops > nodes_.size()) {
                throw Error(ErrorCode::CorpusError, "taxonomy contains a cycle", node.id);
            }
            it = parent.find(it->second);
        }
    }
}

const TaxonomyNode* Taxonomy::find(const std::string& id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &nodes_[it->second];
}

Taxonomy::PathCheck Taxonomy::check_path(const std::vector<std::string>& path) const {
    PathCheck result;
    if (path.empty()) return result;
    for (std::size_t i = 0; i < path.size(); ++i) {
        const TaxonomyNode* node = find(path[i]);
        bool reachable = false;
        if (node != nullptr) {
            if (i == 0) {
                for (const auto& r : roots_) reachable |= (r == path[0]);
            } else {
                const TaxonomyNode* prev = find(path[i - 1]);
                for (const auto& c : prev->children) reachable |= (c == path[i]);
            }
        }
        if (!reachable) {
            result.bad_index = i;
            return result;
        }
    }
    result.ok = true;
    return result;
}

bool Taxonomy::is_root_to_leaf(const std::vector<std::string>& path) const {
    if (path.empty() || !check_path(path).ok) return false;
    return find(path.back())->children.empty();
}

}  // namespace casetrain
