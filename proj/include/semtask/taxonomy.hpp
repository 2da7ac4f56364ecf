#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <boost/dynamic_bitset.hpp>

namespace semtask {

struct ConceptNode {
  std::string id;
  std::string display_name;
  std::vector<std::string> parent_ids;
  /// Instances labeled exactly with this node.
  std::uint64_t own_instance_count = 0;

  bool operator==(const ConceptNode&) const = default;
};

/// Rooted concept DAG whose leaves are the classes of a dataset.
///
/// Immutable once built. Construction validates the structure (single root,
/// no dangling parents, no cycles, every leaf has instances) and precomputes
/// ancestor sets and cumulative counts, so all queries are const and safe to
/// share across threads.
///
/// The cumulative count of a node is the sum of own_instance_count over its
/// descendant set, itself included. A leaf reachable by several paths is
/// counted once per ancestor.
class TaxonomyGraph {
 public:
  static TaxonomyGraph build(std::vector<ConceptNode> nodes,
                             std::optional<std::vector<std::string>> leaf_order = std::nullopt,
                             std::string source_sha256 = {});

  std::span<const ConceptNode> nodes() const noexcept { return nodes_; }
  std::size_t node_count() const noexcept { return nodes_.size(); }
  const ConceptNode& node(std::string_view id) const;
  std::optional<std::size_t> find(std::string_view id) const;

  std::size_t root_index() const noexcept { return root_; }
  const ConceptNode& root() const noexcept { return nodes_[root_]; }

  /// Canonical class order used by every matrix.
  const std::vector<std::string>& leaf_class_ids() const noexcept { return leaf_ids_; }
  std::size_t leaf_count() const noexcept { return leaf_ids_.size(); }
  /// Position of a leaf in leaf_class_ids(); nullopt for internal nodes.
  std::optional<std::size_t> leaf_position(std::string_view id) const;
  std::size_t leaf_node_index(std::size_t leaf_pos) const { return leaf_nodes_.at(leaf_pos); }

  const std::vector<std::size_t>& children(std::size_t node_index) const { return children_.at(node_index); }
  std::vector<std::size_t> parents(std::size_t node_index) const;

  std::uint64_t cumulative_count(std::size_t node_index) const { return cumulative_.at(node_index); }
  std::uint64_t cumulative_count(std::string_view id) const;
  std::uint64_t total_instances() const noexcept { return cumulative_[root_]; }

  /// Every node from which `id` is reachable, itself included, sorted by id.
  std::vector<std::string> ancestor_set(std::string_view id) const;
  bool is_ancestor(std::size_t ancestor, std::size_t node) const { return ancestors_[node].test(ancestor); }

  /// Common ancestor with minimal cumulative count; ties go to the
  /// lexicographically smallest id. Both arguments must be leaf classes.
  const std::string& lowest_superordinate(std::string_view c1, std::string_view c2) const;
  std::size_t lowest_superordinate_index(std::size_t leaf_pos_a, std::size_t leaf_pos_b) const;

  /// SHA-256 of the text this graph was loaded from (empty if built in memory).
  const std::string& source_sha256() const noexcept { return source_sha256_; }

 private:
  TaxonomyGraph() = default;
  std::size_t require_leaf(std::string_view id) const;

  std::vector<ConceptNode> nodes_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<std::size_t>> children_;
  std::vector<std::vector<std::size_t>> parents_;
  std::size_t root_ = 0;
  std::vector<std::string> leaf_ids_;
  std::vector<std::size_t> leaf_nodes_;
  std::unordered_map<std::string, std::size_t> leaf_pos_;
  std::vector<std::uint64_t> cumulative_;
  std::vector<boost::dynamic_bitset<>> ancestors_;
  // Per leaf position: ancestors ordered by (cumulative count, id).
  std::vector<std::vector<std::size_t>> ancestors_by_specificity_;
  std::string source_sha256_;
};

/// Parses the taxonomy JSON format:
///   {"nodes": [{"id", "name", "parents", "instances"}], "leaf_order": [...]}
/// `leaf_order` is optional and defaults to sorted leaf ids.
TaxonomyGraph load_taxonomy(std::string_view json_text);
TaxonomyGraph load_taxonomy_file(const std::filesystem::path& path);

/// Inverse of load_taxonomy. Nodes keep their load order; leaf_order is
/// always written out.
std::string serialize_taxonomy(const TaxonomyGraph& graph);

}  // namespace semtask
