#include "semtask/semantics.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <set>

#include "semtask/csv.hpp"
#include "semtask/error.hpp"
#include "semtask/parallel.hpp"

namespace semtask {

namespace {

double jc_from_counts(std::uint64_t lso, std::uint64_t a, std::uint64_t b) {
  // Summing the leaf terms first keeps d(a, b) and d(b, a) bitwise equal.
  const double d = 2.0 * information_log(static_cast<double>(lso)) -
                   (information_log(static_cast<double>(a)) + information_log(static_cast<double>(b)));
  // lso >= max(a, b) makes d >= 0 analytically; clamp rounding residue.
  return d < 0.0 ? 0.0 : d;
}

}  // namespace

DistanceMatrix::DistanceMatrix(std::vector<std::string> class_ids, std::vector<double> row_major)
    : ids_(std::move(class_ids)), values_(std::move(row_major)) {
  const std::size_t n = ids_.size();
  if (values_.size() != n * n) {
    throw Error(ErrorCode::MalformedInput, "distance matrix has " + std::to_string(values_.size()) +
                                               " entries for " + std::to_string(n) + " classes");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!index_.emplace(ids_[i], i).second) {
      throw Error(ErrorCode::MalformedInput, "duplicate class '" + ids_[i] + "' in distance matrix", {ids_[i]});
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if ((*this)(i, i) != 0.0) throw Error(ErrorCode::MalformedInput, "non-zero diagonal at '" + ids_[i] + "'", {ids_[i]});
    for (std::size_t j = 0; j < n; ++j) {
      const double v = (*this)(i, j);
      if (!std::isfinite(v) || v < 0.0) {
        throw Error(ErrorCode::MalformedInput, "invalid distance between '" + ids_[i] + "' and '" + ids_[j] + "'",
                    {ids_[i], ids_[j]});
      }
      if (v != (*this)(j, i)) {
        throw Error(ErrorCode::MalformedInput, "asymmetric distance between '" + ids_[i] + "' and '" + ids_[j] + "'",
                    {ids_[i], ids_[j]});
      }
    }
  }
}

std::optional<std::size_t> DistanceMatrix::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t DistanceMatrix::index_of(std::string_view id) const {
  auto idx = find(id);
  if (!idx) throw Error(ErrorCode::UnknownClass, "class '" + std::string(id) + "' not in distance matrix", {std::string(id)});
  return *idx;
}

double jc_distance(const TaxonomyGraph& graph, std::string_view c1, std::string_view c2) {
  const auto& lso = graph.lowest_superordinate(c1, c2);
  return jc_from_counts(graph.cumulative_count(lso), graph.cumulative_count(c1), graph.cumulative_count(c2));
}

DistanceMatrix distance_matrix(const TaxonomyGraph& graph, unsigned threads) {
  const std::size_t n = graph.leaf_count();
  std::vector<std::uint64_t> leaf_counts(n);
  for (std::size_t i = 0; i < n; ++i) leaf_counts[i] = graph.cumulative_count(graph.leaf_node_index(i));
  std::vector<double> values(n * n, 0.0);
  parallel_for(n, threads == 0 ? default_thread_count() : threads, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto lso = graph.cumulative_count(graph.lowest_superordinate_index(i, j));
      values[i * n + j] = jc_from_counts(lso, leaf_counts[i], leaf_counts[j]);
    }
  });
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) values[i * n + j] = values[j * n + i];
  }
  return DistanceMatrix(graph.leaf_class_ids(), std::move(values));
}

double coarsity_of_indices(const DistanceMatrix& dm, std::span<const std::size_t> indices) {
  if (indices.size() < 2) throw Error(ErrorCode::SingletonClassSet, "coarsity needs at least two classes");
  double total = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < indices.size(); ++a) {
    for (std::size_t b = a + 1; b < indices.size(); ++b) {
      const double d = dm(indices[a], indices[b]);
      total += d * d;
      ++pairs;
    }
  }
  return total / static_cast<double>(pairs);
}

double coarsity(const DistanceMatrix& dm, std::span<const std::string> classes) {
  std::set<std::string_view> distinct(classes.begin(), classes.end());
  if (distinct.size() < 2) throw Error(ErrorCode::SingletonClassSet, "coarsity needs at least two distinct classes");
  std::vector<std::size_t> indices;
  indices.reserve(distinct.size());
  for (auto id : distinct) indices.push_back(dm.index_of(id));
  return coarsity_of_indices(dm, indices);
}

void write_distance_csv(std::ostream& out, const DistanceMatrix& dm) {
  const auto& ids = dm.class_ids();
  out << "class_id";
  for (const auto& id : ids) out << ',' << csv::escape(id);
  out << '\n';
  char buffer[32];
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out << csv::escape(ids[i]);
    for (std::size_t j = 0; j < ids.size(); ++j) {
      std::snprintf(buffer, sizeof buffer, "%.17g", dm(i, j));
      out << ',' << buffer;
    }
    out << '\n';
  }
}

DistanceMatrix read_distance_csv(std::istream& in) {
  csv::Reader reader(in);
  std::vector<std::string> header;
  if (!reader.next(header) || header.size() < 2) throw Error(ErrorCode::MalformedInput, "distance CSV has no header row");
  std::vector<std::string> ids(header.begin() + 1, header.end());
  const std::size_t n = ids.size();
  std::vector<double> values;
  values.reserve(n * n);
  std::vector<std::string> row;
  std::size_t r = 0;
  while (reader.next(row)) {
    if (row.size() != n + 1 || r >= n || row[0] != ids[r]) {
      throw Error(ErrorCode::MalformedInput, "distance CSV row " + std::to_string(reader.line()) + " does not match header");
    }
    for (std::size_t j = 1; j <= n; ++j) values.push_back(csv::parse_double(row[j], reader.line()));
    ++r;
  }
  if (r != n) throw Error(ErrorCode::MalformedInput, "distance CSV has " + std::to_string(r) + " rows, expected " + std::to_string(n));
  return DistanceMatrix(std::move(ids), std::move(values));
}

}  // namespace semtask
