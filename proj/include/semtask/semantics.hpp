#pragma once

#include <cmath>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "semtask/taxonomy.hpp"

namespace semtask {

/// Information content of a concept with `count` instances. Natural log;
/// every distance and coarsity value inherits this base.
inline double information_log(double count) { return std::log(count); }

/// Dense symmetric pseudo-distance matrix over an ordered list of classes.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  /// Validates shape, zero diagonal, symmetry and non-negative finite entries.
  DistanceMatrix(std::vector<std::string> class_ids, std::vector<double> row_major);

  std::size_t size() const noexcept { return ids_.size(); }
  const std::vector<std::string>& class_ids() const noexcept { return ids_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return values_[i * ids_.size() + j]; }
  std::span<const double> row(std::size_t i) const { return {values_.data() + i * ids_.size(), ids_.size()}; }
  std::span<const double> values() const noexcept { return values_; }

  std::optional<std::size_t> find(std::string_view id) const;
  /// Throws UnknownClass.
  std::size_t index_of(std::string_view id) const;

  bool operator==(const DistanceMatrix& other) const { return ids_ == other.ids_ && values_ == other.values_; }

 private:
  std::vector<std::string> ids_;
  std::vector<double> values_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// 2 log|lso(c1,c2)| - log|c1| - log|c2| over cumulative counts.
double jc_distance(const TaxonomyGraph& graph, std::string_view c1, std::string_view c2);

/// Pairwise jc_distance over leaf_class_ids(), in that order. Rows are
/// computed in parallel; the result does not depend on `threads`.
DistanceMatrix distance_matrix(const TaxonomyGraph& graph, unsigned threads = 0);

/// Mean squared distance over unordered pairs of distinct classes.
double coarsity(const DistanceMatrix& dm, std::span<const std::string> classes);
double coarsity_of_indices(const DistanceMatrix& dm, std::span<const std::size_t> indices);

/// CSV with a header row and column of class ids; 17 significant digits.
void write_distance_csv(std::ostream& out, const DistanceMatrix& dm);
DistanceMatrix read_distance_csv(std::istream& in);

}  // namespace semtask
