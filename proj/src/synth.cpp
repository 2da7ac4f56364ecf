#include "semtask/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <functional>
#include <numeric>

#include "semtask/error.hpp"
#include "semtask/rng.hpp"

namespace semtask::synth {

namespace {

// b positive parts summing to m.
std::vector<std::size_t> random_composition(std::size_t m, std::size_t b, Rng& rng) {
  std::vector<std::size_t> cuts(m - 1);
  std::iota(cuts.begin(), cuts.end(), 1);
  for (std::size_t i = 0; i + 1 < b; ++i) std::swap(cuts[i], cuts[i + rng.below(cuts.size() - i)]);
  cuts.resize(b - 1);
  std::sort(cuts.begin(), cuts.end());
  std::vector<std::size_t> parts;
  std::size_t prev = 0;
  for (auto c : cuts) {
    parts.push_back(c - prev);
    prev = c;
  }
  parts.push_back(m - prev);
  return parts;
}

std::string synset_id(std::size_t serial) {
  char buffer[16];
  std::snprintf(buffer, sizeof buffer, "n1%07zu", serial);
  return buffer;
}

}  // namespace

std::vector<ConceptNode> wordnet_like_nodes(const DagShape& shape, std::uint64_t seed) {
  if (shape.leaves < 1 || shape.max_children < 2 || shape.min_instances < 1 ||
      shape.max_instances < shape.min_instances) {
    throw Error(ErrorCode::InvalidConfig, "invalid DAG shape");
  }
  Rng rng = Rng::substream(seed, Stream::Synthesis, 1);
  std::vector<ConceptNode> nodes;
  std::vector<std::size_t> depth;
  std::size_t leaf_serial = 0;
  std::size_t concept_serial = 0;

  auto make = [&](std::optional<std::size_t> parent, bool leaf) {
    ConceptNode n;
    n.id = synset_id(nodes.size());
    if (leaf) {
      char name[32];
      std::snprintf(name, sizeof name, "class_%03zu", leaf_serial++);
      n.display_name = name;
      n.own_instance_count = shape.min_instances + rng.below(shape.max_instances - shape.min_instances + 1);
    } else {
      char name[32];
      std::snprintf(name, sizeof name, "concept_%03zu", concept_serial++);
      n.display_name = name;
    }
    if (parent) n.parent_ids.push_back(nodes[*parent].id);
    depth.push_back(parent ? depth[*parent] + 1 : 0);
    nodes.push_back(std::move(n));
    return nodes.size() - 1;
  };

  // Grows the subtree under `node` holding `m` leaves.
  std::function<void(std::size_t, std::size_t)> grow = [&](std::size_t node, std::size_t m) {
    std::size_t chain = 0;
    while (chain < shape.max_chain && rng.uniform() < shape.chain_probability) {
      node = make(node, false);
      ++chain;
    }
    if (m == 1) {
      make(node, true);
      return;
    }
    const std::size_t b = 2 + rng.below(std::min(shape.max_children, m) - 1);
    for (auto part : random_composition(m, b, rng)) {
      if (part == 1 && rng.uniform() >= shape.chain_probability) {
        make(node, true);
      } else {
        grow(make(node, false), part);
      }
    }
  };

  ConceptNode root;
  root.id = "n00001740";
  root.display_name = "entity";
  nodes.push_back(root);
  depth.push_back(0);
  if (shape.leaves == 1) {
    make(0, true);
  } else {
    grow(0, shape.leaves);
  }

  std::vector<std::size_t> internal;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].own_instance_count == 0) internal.push_back(i);
  }
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    if (rng.uniform() >= shape.extra_parent_probability) continue;
    std::vector<std::size_t> candidates;
    for (auto c : internal) {
      if (depth[c] + 1 < depth[i] && std::find(nodes[i].parent_ids.begin(), nodes[i].parent_ids.end(), nodes[c].id) ==
                                         nodes[i].parent_ids.end()) {
        candidates.push_back(c);
      }
    }
    if (candidates.empty()) continue;
    nodes[i].parent_ids.push_back(nodes[candidates[rng.below(candidates.size())]].id);
  }
  return nodes;
}

std::vector<ConceptNode> taxonomic_tree_nodes(const TreeShape& shape, std::uint64_t seed) {
  if (shape.leaves < 1 || shape.level_names.size() != shape.level_max_children.size()) {
    throw Error(ErrorCode::InvalidConfig, "invalid tree shape");
  }
  Rng rng = Rng::substream(seed, Stream::Synthesis, 2);
  std::vector<ConceptNode> nodes;
  std::vector<std::size_t> level_serial(shape.level_names.size(), 0);
  std::size_t species_serial = 0;

  ConceptNode root;
  root.id = "life";
  root.display_name = "life";
  nodes.push_back(root);

  std::function<void(std::size_t, std::size_t, std::size_t)> grow = [&](std::size_t parent, std::size_t level,
                                                                        std::size_t m) {
    if (level == shape.level_names.size()) {
      for (std::size_t s = 0; s < m; ++s) {
        ConceptNode leaf;
        char id[32];
        std::snprintf(id, sizeof id, "species_%04zu", species_serial++);
        leaf.id = id;
        leaf.display_name = id;
        leaf.parent_ids.push_back(nodes[parent].id);
        const double draw = std::exp(shape.log_mean + shape.log_sd * rng.normal());
        leaf.own_instance_count = std::max<std::uint64_t>(shape.min_instances, static_cast<std::uint64_t>(std::llround(draw)));
        nodes.push_back(std::move(leaf));
      }
      return;
    }
    const std::size_t b = 1 + rng.below(std::min(shape.level_max_children[level], m));
    for (auto part : random_composition(m, b, rng)) {
      ConceptNode n;
      char id[48];
      std::snprintf(id, sizeof id, "%s_%04zu", shape.level_names[level].c_str(), level_serial[level]++);
      n.id = id;
      n.display_name = id;
      n.parent_ids.push_back(nodes[parent].id);
      nodes.push_back(std::move(n));
      grow(nodes.size() - 1, level + 1, part);
    }
  };
  grow(0, 0, shape.leaves);
  return nodes;
}

InstanceCatalog capped_catalog(const TaxonomyGraph& graph, std::size_t max_per_class) {
  InstanceCatalog catalog;
  for (const auto& leaf : graph.leaf_class_ids()) {
    auto count = graph.node(leaf).own_instance_count;
    if (max_per_class > 0) count = std::min<std::uint64_t>(count, max_per_class);
    for (std::uint64_t j = 0; j < count; ++j) catalog.add(leaf + "/" + std::to_string(j), leaf);
  }
  return catalog;
}

EmbeddingStore hierarchy_embeddings(const TaxonomyGraph& graph, const InstanceCatalog& catalog,
                                    const EmbeddingShape& shape, std::uint64_t seed) {
  if (shape.dim == 0 || !(shape.spread >= 0.0) || !(shape.noise >= 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "invalid embedding shape");
  }
  Rng rng = Rng::substream(seed, Stream::Synthesis, 3);
  const std::size_t count = graph.node_count();
  std::vector<std::vector<double>> means(count, std::vector<double>(shape.dim, 0.0));

  // Topological order from the root.
  std::vector<std::size_t> pending(count);
  for (std::size_t i = 0; i < count; ++i) pending[i] = graph.parents(i).size();
  std::deque<std::size_t> ready{graph.root_index()};
  while (!ready.empty()) {
    const auto v = ready.front();
    ready.pop_front();
    const auto parents = graph.parents(v);
    if (!parents.empty()) {
      const auto p = parents.front();
      const double step_var = shape.spread * (std::log(static_cast<double>(graph.cumulative_count(p))) -
                                              std::log(static_cast<double>(graph.cumulative_count(v))));
      const double sd = std::sqrt(std::max(0.0, step_var));
      for (std::size_t d = 0; d < shape.dim; ++d) means[v][d] = means[p][d] + sd * rng.normal();
    }
    for (auto c : graph.children(v)) {
      if (--pending[c] == 0) ready.push_back(c);
    }
  }

  EmbeddingStore store(shape.dim);
  std::vector<float> vec(shape.dim);
  for (const auto& leaf : graph.leaf_class_ids()) {
    const auto& mean = means[*graph.find(leaf)];
    for (const auto& inst : catalog.instances(leaf)) {
      for (std::size_t d = 0; d < shape.dim; ++d) vec[d] = static_cast<float>(mean[d] + shape.noise * rng.normal());
      store.add(inst, leaf, vec);
    }
  }
  return store;
}

}  // namespace semtask::synth
