#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "semtask/catalog.hpp"
#include "semtask/embeddings.hpp"
#include "semtask/taxonomy.hpp"

namespace semtask::synth {

/// Random WordNet-shaped concept DAG: a random recursive partition of the
/// leaves under a root named "entity", with unary chains and occasional
/// second parents. Extra parents are always taken from strictly shallower
/// tree depths, so the result is acyclic by construction.
struct DagShape {
  std::size_t leaves = 160;
  std::size_t max_children = 5;
  double chain_probability = 0.25;
  std::size_t max_chain = 3;
  double extra_parent_probability = 0.05;
  std::uint64_t min_instances = 732;
  std::uint64_t max_instances = 1300;
};

std::vector<ConceptNode> wordnet_like_nodes(const DagShape& shape, std::uint64_t seed);

/// Fixed-depth taxonomic tree (root, then one level per entry of
/// `level_max_children`, then leaves). Leaf counts are log-normal, floored
/// at `min_instances`.
struct TreeShape {
  std::size_t leaves = 1604;
  std::vector<std::string> level_names = {"kingdom", "phylum", "class", "order", "family", "genus"};
  std::vector<std::size_t> level_max_children = {2, 4, 6, 8, 8, 10};
  double log_mean = 4.6;
  double log_sd = 0.9;
  std::uint64_t min_instances = 31;
};

std::vector<ConceptNode> taxonomic_tree_nodes(const TreeShape& shape, std::uint64_t seed);

/// At most `max_per_class` instance ids per leaf (0 = all counted instances).
InstanceCatalog capped_catalog(const TaxonomyGraph& graph, std::size_t max_per_class);

/// Hierarchy-correlated embeddings. Concept means follow a top-down
/// Gaussian walk: the root sits at the origin and each node moves away
/// from its first listed parent by N(0, spread * (ln|parent| - ln|node|) I).
/// On a tree the expected squared distance between two class means is then
/// dim * spread * D_JC. Instances add N(0, noise^2 I) to their class mean.
struct EmbeddingShape {
  std::size_t dim = 32;
  double spread = 1.0;
  double noise = 1.0;
};

EmbeddingStore hierarchy_embeddings(const TaxonomyGraph& graph, const InstanceCatalog& catalog,
                                    const EmbeddingShape& shape, std::uint64_t seed);

}  // namespace semtask::synth
