#include "semtask/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_set>

#include "semtask/error.hpp"

namespace semtask {

std::string_view to_string(Strategy strategy) noexcept {
  return strategy == Strategy::Uniform ? "uniform" : "semantic";
}

Strategy parse_strategy(std::string_view text) {
  if (text == "uniform") return Strategy::Uniform;
  if (text == "semantic") return Strategy::Semantic;
  throw Error(ErrorCode::InvalidConfig, "unknown strategy '" + std::string(text) + "'", {std::string(text)});
}

void SamplerConfig::validate(std::size_t class_count) const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
  if (ways < 2) fail("ways must be at least 2");
  if (ways > class_count) {
    fail("ways (" + std::to_string(ways) + ") exceeds the number of classes (" + std::to_string(class_count) + ")");
  }
  if (shots < 1) fail("shots must be at least 1");
  if (queries < 1) fail("queries must be at least 1");
  if (num_tasks < 1) fail("tasks must be at least 1");
  if (oversample_factor < 1) fail("oversample factor must be at least 1");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) fail("alpha must be a finite non-negative number");
  if (!(beta >= 0.0) || !std::isfinite(beta)) fail("beta must be a finite non-negative number");
}

std::vector<double> build_potential(const DistanceMatrix& dm, double alpha) {
  std::vector<double> out(dm.values().begin(), dm.values().end());
  for (auto& v : out) v = std::exp(-alpha * v);
  return out;
}

std::vector<double> occurrence_penalty(std::span<const std::uint64_t> occurrences, double beta) {
  if (occurrences.empty()) return {};
  const double max_occ = static_cast<double>(*std::max_element(occurrences.begin(), occurrences.end()));
  std::vector<double> out;
  out.reserve(occurrences.size());
  for (auto o : occurrences) out.push_back(std::exp(-beta * static_cast<double>(o) / max_occ));
  return out;
}

SamplerState::SamplerState(const DistanceMatrix& dm, double alpha, double beta, std::uint64_t seed)
    : classes_(dm.size()),
      log_potential_(dm.values().begin(), dm.values().end()),
      beta_(beta),
      occ_(dm.size(), 1),
      rng_(Rng::substream(seed, Stream::ClassDraws)) {
  for (auto& v : log_potential_) v *= -alpha;
}

double SamplerState::base_potential(std::size_t i, std::size_t j) const {
  return std::exp(log_potential_.at(i * classes_ + j));
}

std::size_t SamplerState::draw(std::span<const double> log_weights, std::span<const char> masked) {
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < classes_; ++i) {
    if (!masked[i]) top = std::max(top, log_weights[i]);
  }
  auto& weights = scratch_;
  weights.assign(classes_, 0.0);
  double total = 0.0;
  if (std::isfinite(top)) {
    for (std::size_t i = 0; i < classes_; ++i) {
      if (!masked[i]) total += weights[i] = std::exp(log_weights[i] - top);
    }
  }
  if (!(total >= 1e-300) || !std::isfinite(total)) {
    // Degenerate potential: uniform over the remaining classes.
    warnings_.push_back("degenerate potential in class set " + std::to_string(sets_drawn_) +
                        "; fell back to uniform draw");
    total = 0.0;
    for (std::size_t i = 0; i < classes_; ++i) {
      weights[i] = masked[i] ? 0.0 : 1.0;
      total += weights[i];
    }
  }
  const double target = rng_.uniform() * total;
  double running = 0.0;
  std::size_t last = classes_;
  for (std::size_t i = 0; i < classes_; ++i) {
    if (masked[i]) continue;
    running += weights[i];
    last = i;
    if (target < running) return i;
  }
  return last;  // rounding left target at the very top of the range
}

void SamplerState::record(std::span<const std::size_t> chosen) {
  for (auto c : chosen) ++occ_[c];
  ++sets_drawn_;
}

std::vector<std::size_t> SamplerState::sample_class_set(std::size_t n) {
  if (n > classes_) throw Error(ErrorCode::InvalidConfig, "cannot draw " + std::to_string(n) + " of " + std::to_string(classes_) + " classes");
  const double max_occ = static_cast<double>(*std::max_element(occ_.begin(), occ_.end()));
  std::vector<double> log_weights(classes_);
  for (std::size_t i = 0; i < classes_; ++i) log_weights[i] = -beta_ * static_cast<double>(occ_[i]) / max_occ;
  std::vector<char> masked(classes_, 0);
  std::vector<std::size_t> chosen;
  chosen.reserve(n);
  while (chosen.size() < n) {
    const std::size_t c = draw(log_weights, masked);
    masked[c] = 1;
    chosen.push_back(c);
    const double* row = log_potential_.data() + c * classes_;
    for (std::size_t i = 0; i < classes_; ++i) log_weights[i] += row[i];
  }
  record(chosen);
  return chosen;
}

std::vector<std::size_t> SamplerState::sample_uniform_class_set(std::size_t n) {
  if (n > classes_) throw Error(ErrorCode::InvalidConfig, "cannot draw " + std::to_string(n) + " of " + std::to_string(classes_) + " classes");
  std::vector<std::size_t> pool(classes_);
  std::iota(pool.begin(), pool.end(), 0);
  for (std::size_t i = 0; i < n; ++i) std::swap(pool[i], pool[i + rng_.below(classes_ - i)]);
  pool.resize(n);
  record(pool);
  return pool;
}

TaskSpec materialize_task(std::uint64_t task_id, std::vector<std::size_t> class_indices,
                          const InstanceCatalog& catalog, const DistanceMatrix& dm, const SamplerConfig& config) {
  std::sort(class_indices.begin(), class_indices.end());
  TaskSpec task;
  task.task_id = task_id;
  task.coarsity = coarsity_of_indices(dm, class_indices);
  Rng rng = Rng::substream(config.seed, Stream::InstanceDraws, task_id);
  const std::size_t need = config.shots + config.queries;
  std::vector<std::size_t> pool;
  for (auto idx : class_indices) {
    const auto& id = dm.class_ids()[idx];
    const auto& instances = catalog.instances(id);
    if (instances.size() < need) {
      throw Error(ErrorCode::InsufficientInstances,
                  "class '" + id + "' has " + std::to_string(instances.size()) + " instances, task needs " +
                      std::to_string(need),
                  {id});
    }
    pool.resize(instances.size());
    std::iota(pool.begin(), pool.end(), 0);
    for (std::size_t i = 0; i < need; ++i) std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
    task.class_ids.push_back(id);
    auto& support = task.support.emplace_back();
    auto& query = task.query.emplace_back();
    for (std::size_t i = 0; i < config.shots; ++i) support.push_back(instances[pool[i]]);
    for (std::size_t i = config.shots; i < need; ++i) query.push_back(instances[pool[i]]);
  }
  return task;
}

TaskSpec sample_task(SamplerState& state, const InstanceCatalog& catalog, const DistanceMatrix& dm,
                     const SamplerConfig& config, std::uint64_t task_id) {
  config.validate(dm.size());
  auto classes = config.strategy == Strategy::Semantic ? state.sample_class_set(config.ways)
                                                       : state.sample_uniform_class_set(config.ways);
  return materialize_task(task_id, std::move(classes), catalog, dm, config);
}

Testbed generate_testbed(const TaxonomyGraph& graph, const DistanceMatrix& dm, const InstanceCatalog& catalog,
                         const SamplerConfig& config) {
  config.validate(dm.size());
  if (dm.class_ids() != graph.leaf_class_ids()) {
    throw Error(ErrorCode::MalformedInput, "distance matrix classes do not match the taxonomy leaf order");
  }
  const std::size_t need = config.shots + config.queries;
  for (const auto& id : dm.class_ids()) {
    const auto& instances = catalog.instances(id);
    if (instances.size() < need) {
      throw Error(ErrorCode::InsufficientInstances,
                  "class '" + id + "' has " + std::to_string(instances.size()) + " instances, tasks need " +
                      std::to_string(need),
                  {id});
    }
  }

  SamplerState state(dm, config.alpha, config.beta, config.seed);
  std::unordered_set<std::string> seen;
  std::vector<std::vector<std::size_t>> kept;
  kept.reserve(config.num_tasks);
  std::string key;
  for (std::size_t t = 0; t < config.candidate_count(); ++t) {
    auto classes = config.strategy == Strategy::Semantic ? state.sample_class_set(config.ways)
                                                         : state.sample_uniform_class_set(config.ways);
    std::sort(classes.begin(), classes.end());
    key.clear();
    for (auto c : classes) key.append(reinterpret_cast<const char*>(&c), sizeof c);
    if (seen.insert(key).second && kept.size() < config.num_tasks) kept.push_back(std::move(classes));
  }
  if (kept.size() < config.num_tasks) {
    throw Error(ErrorCode::NotEnoughUniqueTasks,
                "only " + std::to_string(seen.size()) + " unique class sets among " +
                    std::to_string(config.candidate_count()) + " candidates; " + std::to_string(config.num_tasks) +
                    " requested",
                {std::to_string(seen.size())});
  }

  Testbed testbed;
  testbed.config = config;
  testbed.tasks.reserve(kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) {
    testbed.tasks.push_back(materialize_task(i, std::move(kept[i]), catalog, dm, config));
  }
  testbed.provenance.strategy = config.strategy;
  testbed.provenance.seed = config.seed;
  testbed.provenance.taxonomy_sha256 = graph.source_sha256();
  testbed.provenance.warnings = state.warnings();
  testbed.provenance.candidates_drawn = state.sets_drawn();
  testbed.provenance.unique_candidates = seen.size();
  testbed.candidate_occurrences.assign(state.occurrences().begin(), state.occurrences().end());
  return testbed;
}

void check_task(const TaskSpec& task, const SamplerConfig& config, const InstanceCatalog& catalog) {
  const std::string tag = "task " + std::to_string(task.task_id) + ": ";
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::MalformedInput, tag + what, {std::to_string(task.task_id)});
  };
  if (task.class_ids.size() != config.ways) fail("expected " + std::to_string(config.ways) + " classes");
  if (task.support.size() != task.class_ids.size() || task.query.size() != task.class_ids.size()) {
    fail("support/query lists do not match classes");
  }
  std::unordered_set<std::string_view> classes(task.class_ids.begin(), task.class_ids.end());
  if (classes.size() != task.class_ids.size()) fail("repeated class");
  std::unordered_set<std::string_view> instances;
  for (std::size_t i = 0; i < task.class_ids.size(); ++i) {
    if (task.support[i].size() != config.shots) fail("class '" + task.class_ids[i] + "' has wrong support size");
    if (task.query[i].size() != config.queries) fail("class '" + task.class_ids[i] + "' has wrong query size");
    for (const auto* list : {&task.support[i], &task.query[i]}) {
      for (const auto& inst : *list) {
        if (!instances.insert(inst).second) fail("instance '" + inst + "' used twice");
        auto owner = catalog.class_of(inst);
        if (!owner || *owner != task.class_ids[i]) fail("instance '" + inst + "' is not in class '" + task.class_ids[i] + "'");
      }
    }
  }
}

}  // namespace semtask
