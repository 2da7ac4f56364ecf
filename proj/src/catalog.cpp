#include "semtask/catalog.hpp"

#include <istream>
#include <ostream>

#include "semtask/csv.hpp"
#include "semtask/error.hpp"

namespace semtask {

void InstanceCatalog::add(std::string instance_id, std::string class_id) {
  if (instance_id.empty() || class_id.empty()) throw Error(ErrorCode::MalformedInput, "empty instance or class id");
  auto [it, inserted] = class_of_.emplace(instance_id, class_id);
  if (!inserted) {
    throw Error(ErrorCode::DuplicateInstance, "instance '" + instance_id + "' listed twice", {instance_id});
  }
  by_class_[std::move(class_id)].push_back(std::move(instance_id));
}

const std::vector<std::string>& InstanceCatalog::instances(std::string_view class_id) const {
  auto it = by_class_.find(class_id);
  if (it == by_class_.end()) {
    throw Error(ErrorCode::UnknownClass, "class '" + std::string(class_id) + "' has no cataloged instances",
                {std::string(class_id)});
  }
  return it->second;
}

std::optional<std::string_view> InstanceCatalog::class_of(std::string_view instance_id) const {
  auto it = class_of_.find(std::string(instance_id));
  if (it == class_of_.end()) return std::nullopt;
  return std::string_view(it->second);
}

std::vector<std::string> InstanceCatalog::class_ids() const {
  std::vector<std::string> out;
  out.reserve(by_class_.size());
  for (const auto& [id, _] : by_class_) out.push_back(id);
  return out;
}

void InstanceCatalog::validate_against(const TaxonomyGraph& graph) const {
  for (const auto& [id, _] : by_class_) {
    if (!graph.leaf_position(id)) {
      throw Error(ErrorCode::UnknownClass, "catalog class '" + id + "' is not a leaf of the taxonomy", {id});
    }
  }
  for (const auto& leaf : graph.leaf_class_ids()) {
    if (!by_class_.contains(leaf)) {
      throw Error(ErrorCode::InsufficientInstances, "leaf class '" + leaf + "' has no cataloged instances", {leaf});
    }
  }
}

InstanceCatalog read_catalog_csv(std::istream& in) {
  InstanceCatalog catalog;
  csv::Reader reader(in);
  std::vector<std::string> row;
  bool first = true;
  while (reader.next(row)) {
    if (first && row.size() == 2 && row[0] == "instance_id" && row[1] == "class_id") {
      first = false;
      continue;
    }
    first = false;
    if (row.size() != 2) {
      throw Error(ErrorCode::MalformedInput, "catalog line " + std::to_string(reader.line()) + " needs 2 fields");
    }
    catalog.add(std::move(row[0]), std::move(row[1]));
  }
  return catalog;
}

void write_catalog_csv(std::ostream& out, const InstanceCatalog& catalog) {
  out << "instance_id,class_id\n";
  for (const auto& cls : catalog.class_ids()) {
    for (const auto& inst : catalog.instances(cls)) out << csv::escape(inst) << ',' << csv::escape(cls) << '\n';
  }
}

InstanceCatalog catalog_from_counts(const TaxonomyGraph& graph) {
  InstanceCatalog catalog;
  for (const auto& leaf : graph.leaf_class_ids()) {
    const auto count = graph.node(leaf).own_instance_count;
    for (std::uint64_t j = 0; j < count; ++j) catalog.add(leaf + "/" + std::to_string(j), leaf);
  }
  return catalog;
}

}  // namespace semtask
