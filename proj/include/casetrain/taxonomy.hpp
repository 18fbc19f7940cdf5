#pragma once

#include <map>
#include <string>
#include <vector>

#include "casetrain/case_types.hpp"

namespace casetrain {

/// Immutable specialty forest declared by the corpus manifest.
///
/// Construction verifies the structural invariants: ids unique, children
/// resolve, every non-root node has exactly one parent, no cycles, and sibling
/// labels are unique. Violations raise CorpusError.
class Taxonomy {
public:
    Taxonomy() = default;
    explicit Taxonomy(std::vector<TaxonomyNode> nodes);

    [[nodiscard]] const TaxonomyNode* find(const std::string& id) const;

    /// Top-level specialties, in declaration order.
    [[nodiscard]] const std::vector<std::string>& roots() const { return roots_; }

    [[nodiscard]] bool empty() const { return nodes_.empty(); }

    /// Whether `path` starts at a root and follows parent->child edges.
    /// On failure returns the index of the first unresolvable segment.
    struct PathCheck {
        bool ok = false;
        std::size_t bad_index = 0;
    };
    [[nodiscard]] PathCheck check_path(const std::vector<std::string>& path) const;

    /// A path is complete when it additionally ends at a childless node.
    [[nodiscard]] bool is_root_to_leaf(const std::vector<std::string>& path) const;

private:
    std::vector<TaxonomyNode> nodes_;            // declaration order
    std::map<std::string, std::size_t> index_;   // id -> position in nodes_
    std::vector<std::string> roots_;
};

}  // namespace casetrain
