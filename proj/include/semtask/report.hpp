#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "semtask/classifiers.hpp"
#include "semtask/embeddings.hpp"
#include "semtask/sampler.hpp"

namespace semtask {

struct TaskResult {
  std::uint64_t task_id = 0;
  double coarsity = 0.0;
  double top1 = 0.0;
  /// Only for tasks with more than five ways.
  std::optional<double> top5;
  std::size_t queries = 0;
};

struct QuartileSummary {
  std::size_t count = 0;
  double coarsity_min = 0.0;
  double coarsity_max = 0.0;
  std::optional<double> mean_top1;
  std::optional<double> mean_top5;
};

struct EvalReport {
  ClassifierSpec classifier;
  std::size_t ways = 0;
  /// Sorted by task_id.
  std::vector<TaskResult> tasks;
  double mean_top1 = 0.0;
  /// 1.96 * sample standard deviation / sqrt(T); zero when T < 2.
  double ci95_top1 = 0.0;
  std::optional<double> mean_top5;
  std::optional<double> ci95_top5;
  /// Tasks sorted by (coarsity, task_id) and cut into four buckets whose
  /// sizes differ by at most one; bucket 0 holds the finest tasks.
  std::vector<QuartileSummary> quartiles;
};

struct RollingPoint {
  double coarsity = 0.0;
  double accuracy = 0.0;
};

/// Fraction of queries whose true class is in the first k ranked positions.
double top_k_accuracy(const std::vector<Ranking>& rankings, const std::vector<std::size_t>& labels, std::size_t k);

TaskResult score_task(const TaskSpec& task, const std::vector<Ranking>& rankings,
                      const std::vector<std::size_t>& labels);

/// Aggregates per-task results into a report.
EvalReport summarize(std::vector<TaskResult> results, const ClassifierSpec& classifier, std::size_t ways);

/// Runs the classifier on every task (in parallel) and summarizes.
EvalReport evaluate_testbed(const EmbeddingStore& store, const Testbed& testbed, const ClassifierSpec& classifier,
                            unsigned threads = 0);

/// Tasks sorted by ascending (coarsity, task_id); mean coarsity and mean
/// top-1 accuracy of every contiguous window, stride 1. Throws
/// WindowTooLarge when window exceeds the task count.
std::vector<RollingPoint> rolling_correlation(const EvalReport& report, std::size_t window);

/// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> x, std::span<const double> y);

void write_report_json(std::ostream& out, const EvalReport& report, std::size_t window,
                       std::span<const RollingPoint> rolling);
/// task_id,coarsity,top1,top5 (top5 empty when absent).
void write_task_csv(std::ostream& out, const EvalReport& report);
/// index,coarsity,accuracy
void write_rolling_csv(std::ostream& out, std::span<const RollingPoint> rolling);

}  // namespace semtask
