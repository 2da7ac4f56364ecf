#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "semtask/taxonomy.hpp"

namespace semtask {

/// Instance ids per class, in file order. Instance ids are globally unique.
class InstanceCatalog {
 public:
  /// Throws DuplicateInstance.
  void add(std::string instance_id, std::string class_id);

  /// Throws UnknownClass when the class has no instances.
  const std::vector<std::string>& instances(std::string_view class_id) const;
  std::optional<std::string_view> class_of(std::string_view instance_id) const;
  std::size_t class_count() const noexcept { return by_class_.size(); }
  std::size_t instance_count() const noexcept { return class_of_.size(); }
  std::vector<std::string> class_ids() const;

  /// Every leaf of `graph` has instances and every cataloged class is a leaf.
  void validate_against(const TaxonomyGraph& graph) const;

 private:
  std::map<std::string, std::vector<std::string>, std::less<>> by_class_;
  std::unordered_map<std::string, std::string> class_of_;
};

/// `instance_id,class_id` rows; a leading header row with those names is skipped.
InstanceCatalog read_catalog_csv(std::istream& in);
void write_catalog_csv(std::ostream& out, const InstanceCatalog& catalog);

/// One instance per counted image of every leaf: ids "<class>/<j>".
InstanceCatalog catalog_from_counts(const TaxonomyGraph& graph);

}  // namespace semtask
