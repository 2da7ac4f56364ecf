#include "semtask/taxonomy.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "semtask/error.hpp"
#include "semtask/hashing.hpp"

namespace semtask {

namespace {

using nlohmann::json;

// Walks parent links inside the unsorted remainder of a failed topological
// sort until a node repeats; the repeated segment is a cycle.
std::vector<std::string> extract_cycle(const std::vector<ConceptNode>& nodes,
                                       const std::vector<std::vector<std::size_t>>& parents,
                                       const std::vector<std::size_t>& indegree) {
  std::size_t start = 0;
  while (indegree[start] == 0) ++start;
  std::vector<std::size_t> path;
  std::unordered_map<std::size_t, std::size_t> seen_at;
  std::size_t current = start;
  while (!seen_at.contains(current)) {
    seen_at[current] = path.size();
    path.push_back(current);
    for (std::size_t p : parents[current]) {
      if (indegree[p] != 0) {
        current = p;
        break;
      }
    }
  }
  std::vector<std::string> cycle;
  for (std::size_t i = seen_at[current]; i < path.size(); ++i) cycle.push_back(nodes[path[i]].id);
  std::reverse(cycle.begin(), cycle.end());
  return cycle;
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

std::pair<std::size_t, std::size_t> line_and_column(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < offset; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

}  // namespace

TaxonomyGraph TaxonomyGraph::build(std::vector<ConceptNode> nodes,
                                   std::optional<std::vector<std::string>> leaf_order,
                                   std::string source_sha256) {
  if (nodes.empty()) throw Error(ErrorCode::MalformedInput, "taxonomy has no nodes");

  TaxonomyGraph g;
  g.source_sha256_ = std::move(source_sha256);
  const std::size_t count = nodes.size();
  for (std::size_t i = 0; i < count; ++i) {
    if (nodes[i].id.empty()) throw Error(ErrorCode::MalformedInput, "node with empty id");
    if (!g.index_.emplace(nodes[i].id, i).second) {
      throw Error(ErrorCode::MalformedInput, "duplicate node id '" + nodes[i].id + "'", {nodes[i].id});
    }
  }

  g.children_.assign(count, {});
  g.parents_.assign(count, {});
  std::vector<std::size_t> roots;
  for (std::size_t i = 0; i < count; ++i) {
    std::unordered_set<std::string_view> seen;
    for (const auto& parent_id : nodes[i].parent_ids) {
      auto it = g.index_.find(parent_id);
      if (it == g.index_.end()) {
        throw Error(ErrorCode::UnknownParent,
                    "node '" + nodes[i].id + "' names unknown parent '" + parent_id + "'",
                    {parent_id, nodes[i].id});
      }
      if (!seen.insert(parent_id).second) {
        throw Error(ErrorCode::MalformedInput,
                    "node '" + nodes[i].id + "' lists parent '" + parent_id + "' twice", {nodes[i].id});
      }
      g.parents_[i].push_back(it->second);
      g.children_[it->second].push_back(i);
    }
    if (nodes[i].parent_ids.empty()) roots.push_back(i);
  }
  if (roots.size() > 1) {
    std::vector<std::string> ids;
    for (auto r : roots) ids.push_back(nodes[r].id);
    throw Error(ErrorCode::MultipleRoots, "taxonomy has " + std::to_string(ids.size()) + " roots: " + join(ids, ", "),
                ids);
  }

  // Kahn's algorithm from the root downwards.
  std::vector<std::size_t> indegree(count);
  for (std::size_t i = 0; i < count; ++i) indegree[i] = g.parents_[i].size();
  std::vector<std::size_t> order;
  order.reserve(count);
  std::deque<std::size_t> ready(roots.begin(), roots.end());
  while (!ready.empty()) {
    const std::size_t v = ready.front();
    ready.pop_front();
    order.push_back(v);
    for (std::size_t c : g.children_[v]) {
      if (--indegree[c] == 0) ready.push_back(c);
    }
  }
  if (order.size() != count) {
    auto cycle = extract_cycle(nodes, g.parents_, indegree);
    throw Error(ErrorCode::CycleDetected, "cycle through " + join(cycle, " -> "), cycle);
  }
  g.root_ = roots.front();

  for (std::size_t i = 0; i < count; ++i) {
    if (g.children_[i].empty() && nodes[i].own_instance_count == 0) {
      throw Error(ErrorCode::LeafWithoutInstances, "leaf '" + nodes[i].id + "' has no instances", {nodes[i].id});
    }
  }

  g.ancestors_.assign(count, boost::dynamic_bitset<>(count));
  for (std::size_t v : order) {
    g.ancestors_[v].set(v);
    for (std::size_t p : g.parents_[v]) g.ancestors_[v] |= g.ancestors_[p];
  }
  std::vector<boost::dynamic_bitset<>> descendants(count, boost::dynamic_bitset<>(count));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    descendants[*it].set(*it);
    for (std::size_t c : g.children_[*it]) descendants[*it] |= descendants[c];
  }
  g.cumulative_.assign(count, 0);
  for (std::size_t v = 0; v < count; ++v) {
    std::uint64_t total = 0;
    for (auto d = descendants[v].find_first(); d != boost::dynamic_bitset<>::npos; d = descendants[v].find_next(d)) {
      total += nodes[d].own_instance_count;
    }
    g.cumulative_[v] = total;
  }

  std::vector<std::string> natural_leaves;
  for (std::size_t i = 0; i < count; ++i) {
    if (g.children_[i].empty()) natural_leaves.push_back(nodes[i].id);
  }
  std::sort(natural_leaves.begin(), natural_leaves.end());
  if (leaf_order) {
    std::set<std::string> given;
    for (const auto& id : *leaf_order) {
      auto it = g.index_.find(id);
      if (it == g.index_.end()) throw Error(ErrorCode::UnknownClass, "leaf_order names unknown node '" + id + "'", {id});
      if (!g.children_[it->second].empty()) {
        throw Error(ErrorCode::MalformedInput, "leaf_order names internal node '" + id + "'", {id});
      }
      if (!given.insert(id).second) throw Error(ErrorCode::MalformedInput, "leaf_order repeats '" + id + "'", {id});
    }
    if (given.size() != natural_leaves.size()) {
      std::vector<std::string> missing;
      std::set_difference(natural_leaves.begin(), natural_leaves.end(), given.begin(), given.end(),
                          std::back_inserter(missing));
      throw Error(ErrorCode::MalformedInput, "leaf_order omits leaves: " + join(missing, ", "), missing);
    }
    g.leaf_ids_ = std::move(*leaf_order);
  } else {
    g.leaf_ids_ = std::move(natural_leaves);
  }
  for (std::size_t pos = 0; pos < g.leaf_ids_.size(); ++pos) {
    g.leaf_nodes_.push_back(g.index_.at(g.leaf_ids_[pos]));
    g.leaf_pos_.emplace(g.leaf_ids_[pos], pos);
  }

  g.nodes_ = std::move(nodes);
  g.ancestors_by_specificity_.resize(g.leaf_nodes_.size());
  for (std::size_t pos = 0; pos < g.leaf_nodes_.size(); ++pos) {
    auto& list = g.ancestors_by_specificity_[pos];
    const auto& bits = g.ancestors_[g.leaf_nodes_[pos]];
    for (auto a = bits.find_first(); a != boost::dynamic_bitset<>::npos; a = bits.find_next(a)) list.push_back(a);
    std::sort(list.begin(), list.end(), [&](std::size_t x, std::size_t y) {
      if (g.cumulative_[x] != g.cumulative_[y]) return g.cumulative_[x] < g.cumulative_[y];
      return g.nodes_[x].id < g.nodes_[y].id;
    });
  }
  return g;
}

const ConceptNode& TaxonomyGraph::node(std::string_view id) const {
  auto idx = find(id);
  if (!idx) throw Error(ErrorCode::UnknownNode, "unknown node '" + std::string(id) + "'", {std::string(id)});
  return nodes_[*idx];
}

std::optional<std::size_t> TaxonomyGraph::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> TaxonomyGraph::leaf_position(std::string_view id) const {
  auto it = leaf_pos_.find(std::string(id));
  if (it == leaf_pos_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::size_t> TaxonomyGraph::parents(std::size_t node_index) const { return parents_.at(node_index); }

std::uint64_t TaxonomyGraph::cumulative_count(std::string_view id) const {
  auto idx = find(id);
  if (!idx) throw Error(ErrorCode::UnknownNode, "unknown node '" + std::string(id) + "'", {std::string(id)});
  return cumulative_[*idx];
}

std::vector<std::string> TaxonomyGraph::ancestor_set(std::string_view id) const {
  auto idx = find(id);
  if (!idx) throw Error(ErrorCode::UnknownNode, "unknown node '" + std::string(id) + "'", {std::string(id)});
  std::vector<std::string> out;
  const auto& bits = ancestors_[*idx];
  for (auto a = bits.find_first(); a != boost::dynamic_bitset<>::npos; a = bits.find_next(a)) {
    out.push_back(nodes_[a].id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t TaxonomyGraph::require_leaf(std::string_view id) const {
  auto pos = leaf_position(id);
  if (!pos) throw Error(ErrorCode::UnknownClass, "'" + std::string(id) + "' is not a leaf class", {std::string(id)});
  return *pos;
}

const std::string& TaxonomyGraph::lowest_superordinate(std::string_view c1, std::string_view c2) const {
  return nodes_[lowest_superordinate_index(require_leaf(c1), require_leaf(c2))].id;
}

std::size_t TaxonomyGraph::lowest_superordinate_index(std::size_t leaf_pos_a, std::size_t leaf_pos_b) const {
  const auto& other = ancestors_.at(leaf_nodes_.at(leaf_pos_b));
  for (std::size_t candidate : ancestors_by_specificity_.at(leaf_pos_a)) {
    if (other.test(candidate)) return candidate;
  }
  return root_;  // unreachable: the root is a common ancestor
}

TaxonomyGraph load_taxonomy(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    auto [line, column] = line_and_column(json_text, e.byte == 0 ? 0 : e.byte - 1);
    throw Error(ErrorCode::MalformedInput,
                "invalid JSON at line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + e.what());
  }
  if (!doc.is_object() || !doc.contains("nodes") || !doc["nodes"].is_array()) {
    throw Error(ErrorCode::MalformedInput, "expected an object with a \"nodes\" array");
  }
  std::vector<ConceptNode> nodes;
  nodes.reserve(doc["nodes"].size());
  for (const auto& item : doc["nodes"]) {
    if (!item.is_object() || !item.contains("id") || !item["id"].is_string()) {
      throw Error(ErrorCode::MalformedInput, "every node needs a string \"id\"");
    }
    ConceptNode node;
    node.id = item["id"].get<std::string>();
    if (item.contains("name")) {
      if (!item["name"].is_string()) throw Error(ErrorCode::MalformedInput, "name of '" + node.id + "' is not a string", {node.id});
      node.display_name = item["name"].get<std::string>();
    } else {
      node.display_name = node.id;
    }
    if (item.contains("parents")) {
      if (!item["parents"].is_array()) throw Error(ErrorCode::MalformedInput, "parents of '" + node.id + "' is not an array", {node.id});
      for (const auto& p : item["parents"]) {
        if (!p.is_string()) throw Error(ErrorCode::MalformedInput, "non-string parent in '" + node.id + "'", {node.id});
        node.parent_ids.push_back(p.get<std::string>());
      }
    }
    if (item.contains("instances")) {
      const auto& n = item["instances"];
      if (!n.is_number_integer() || (n.is_number_integer() && !n.is_number_unsigned() && n.get<std::int64_t>() < 0)) {
        throw Error(ErrorCode::MalformedInput, "instances of '" + node.id + "' must be a non-negative integer", {node.id});
      }
      node.own_instance_count = n.get<std::uint64_t>();
    }
    nodes.push_back(std::move(node));
  }
  std::optional<std::vector<std::string>> leaf_order;
  if (doc.contains("leaf_order") && !doc["leaf_order"].is_null()) {
    if (!doc["leaf_order"].is_array()) throw Error(ErrorCode::MalformedInput, "leaf_order must be an array");
    leaf_order.emplace();
    for (const auto& id : doc["leaf_order"]) {
      if (!id.is_string()) throw Error(ErrorCode::MalformedInput, "leaf_order entries must be strings");
      leaf_order->push_back(id.get<std::string>());
    }
  }
  return TaxonomyGraph::build(std::move(nodes), std::move(leaf_order), sha256_hex(json_text));
}

TaxonomyGraph load_taxonomy_file(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return load_taxonomy(text);
  } catch (const Error& e) {
    std::string where = path.string();
    if (!e.entities().empty()) {
      const auto needle = "\"" + e.entities().front() + "\"";
      if (auto offset = text.find(needle); offset != std::string::npos) {
        where += ":" + std::to_string(line_and_column(text, offset).first);
      }
    }
    throw Error(e.code(), where + ": " + e.message(), e.entities());
  }
}

std::string serialize_taxonomy(const TaxonomyGraph& graph) {
  nlohmann::ordered_json doc;
  auto& nodes = doc["nodes"] = nlohmann::ordered_json::array();
  for (const auto& n : graph.nodes()) {
    nlohmann::ordered_json item;
    item["id"] = n.id;
    item["name"] = n.display_name;
    item["parents"] = n.parent_ids;
    item["instances"] = n.own_instance_count;
    nodes.push_back(std::move(item));
  }
  doc["leaf_order"] = graph.leaf_class_ids();
  return doc.dump(2) + "\n";
}

}  // namespace semtask
