#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "semtask/catalog.hpp"
#include "semtask/rng.hpp"
#include "semtask/semantics.hpp"
#include "semtask/taxonomy.hpp"

namespace semtask {

enum class Strategy { Uniform, Semantic };

std::string_view to_string(Strategy strategy) noexcept;
/// Accepts "uniform" or "semantic"; throws InvalidConfig otherwise.
Strategy parse_strategy(std::string_view text);

struct SamplerConfig {
  std::size_t ways = 5;
  std::size_t shots = 1;
  std::size_t queries = 10;
  std::size_t num_tasks = 5000;
  /// Candidates drawn = num_tasks * oversample_factor (10000 for the defaults).
  std::size_t oversample_factor = 2;
  double alpha = 0.383;
  double beta = 100.0;
  Strategy strategy = Strategy::Semantic;
  std::uint64_t seed = 0;

  std::size_t candidate_count() const noexcept { return num_tasks * oversample_factor; }
  /// Throws InvalidConfig.
  void validate(std::size_t class_count) const;
};

/// exp(-alpha * D), row-major, unit diagonal.
std::vector<double> build_potential(const DistanceMatrix& dm, double alpha);

/// exp(-beta * occ_i / max_j occ_j).
std::vector<double> occurrence_penalty(std::span<const std::uint64_t> occurrences, double beta);

/// Running state of the potential-based class sampler.
///
/// Holds log(P0) = -alpha * D rather than P0 itself; all weight products are
/// accumulated as sums of logs and exponentiated relative to the running
/// maximum just before each draw, so beta = 100 penalties cannot underflow
/// the whole distribution.
class SamplerState {
 public:
  SamplerState(const DistanceMatrix& dm, double alpha, double beta, std::uint64_t seed);

  std::size_t class_count() const noexcept { return classes_; }
  double base_potential(std::size_t i, std::size_t j) const;
  std::span<const std::uint64_t> occurrences() const noexcept { return occ_; }
  std::size_t sets_drawn() const noexcept { return sets_drawn_; }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  /// One class set by the potential walk: the first class is drawn in
  /// proportion to the occurrence penalty, every later one in proportion to
  /// penalty times the product of P0 rows of the classes already chosen.
  /// Chosen classes are masked out. Returns indices in draw order and
  /// increments their occurrence counters.
  std::vector<std::size_t> sample_class_set(std::size_t n);

  /// n distinct classes uniformly at random (sequential draws without
  /// replacement). Occurrence counters are updated the same way.
  std::vector<std::size_t> sample_uniform_class_set(std::size_t n);

 private:
  std::size_t draw(std::span<const double> log_weights, std::span<const char> masked);
  void record(std::span<const std::size_t> chosen);

  std::size_t classes_;
  std::vector<double> log_potential_;
  double beta_;
  std::vector<std::uint64_t> occ_;
  Rng rng_;
  std::size_t sets_drawn_ = 0;
  std::vector<std::string> warnings_;
  std::vector<double> scratch_;
};

/// One few-shot task. `support[i]` and `query[i]` belong to `class_ids[i]`;
/// classes are listed in canonical (distance matrix) order.
struct TaskSpec {
  std::uint64_t task_id = 0;
  std::vector<std::string> class_ids;
  std::vector<std::vector<std::string>> support;
  std::vector<std::vector<std::string>> query;
  double coarsity = 0.0;

  bool operator==(const TaskSpec&) const = default;
};

struct Provenance {
  Strategy strategy = Strategy::Semantic;
  std::uint64_t seed = 0;
  std::string taxonomy_sha256;
  std::vector<std::string> warnings;
  std::size_t candidates_drawn = 0;
  std::size_t unique_candidates = 0;
};

struct Testbed {
  SamplerConfig config;
  std::vector<TaskSpec> tasks;
  Provenance provenance;
  /// Occurrence counters after the whole candidate stream (not serialized).
  std::vector<std::uint64_t> candidate_occurrences;
};

/// Draws k + q distinct instances per class uniformly without replacement
/// from the substream (seed, InstanceDraws, task_id): first k are support,
/// next q are query. `class_indices` index into `dm`.
TaskSpec materialize_task(std::uint64_t task_id, std::vector<std::size_t> class_indices,
                          const InstanceCatalog& catalog, const DistanceMatrix& dm, const SamplerConfig& config);

/// Class set by config.strategy, then materialize_task.
TaskSpec sample_task(SamplerState& state, const InstanceCatalog& catalog, const DistanceMatrix& dm,
                     const SamplerConfig& config, std::uint64_t task_id);

/// Draws config.candidate_count() class sets, drops repeated class sets,
/// keeps the first num_tasks in draw order and samples their instances.
/// Throws NotEnoughUniqueTasks when fewer unique sets were drawn.
Testbed generate_testbed(const TaxonomyGraph& graph, const DistanceMatrix& dm, const InstanceCatalog& catalog,
                         const SamplerConfig& config);

/// Throws MalformedInput naming the task when a type invariant fails:
/// n distinct classes, k support and q query ids per class, support and
/// query disjoint, every id cataloged under its class.
void check_task(const TaskSpec& task, const SamplerConfig& config, const InstanceCatalog& catalog);

}  // namespace semtask
