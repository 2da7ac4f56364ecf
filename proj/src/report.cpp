#include "semtask/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

#include <nlohmann/json.hpp>

#include "semtask/error.hpp"
#include "semtask/parallel.hpp"

namespace semtask {

namespace {

std::pair<double, double> mean_and_ci(const std::vector<double>& values) {
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  return {mean, 1.96 * sd / std::sqrt(n)};
}

std::vector<std::size_t> coarsity_order(const std::vector<TaskResult>& tasks) {
  std::vector<std::size_t> order(tasks.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (tasks[a].coarsity != tasks[b].coarsity) return tasks[a].coarsity < tasks[b].coarsity;
    return tasks[a].task_id < tasks[b].task_id;
  });
  return order;
}

std::string format_double(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", v);
  return buffer;
}

}  // namespace

double top_k_accuracy(const std::vector<Ranking>& rankings, const std::vector<std::size_t>& labels, std::size_t k) {
  if (rankings.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t q = 0; q < rankings.size(); ++q) {
    const auto& r = rankings[q];
    const auto end = r.begin() + static_cast<std::ptrdiff_t>(std::min(k, r.size()));
    if (std::find(r.begin(), end, labels[q]) != end) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(rankings.size());
}

TaskResult score_task(const TaskSpec& task, const std::vector<Ranking>& rankings,
                      const std::vector<std::size_t>& labels) {
  TaskResult result;
  result.task_id = task.task_id;
  result.coarsity = task.coarsity;
  result.queries = rankings.size();
  result.top1 = top_k_accuracy(rankings, labels, 1);
  if (task.class_ids.size() > 5) result.top5 = top_k_accuracy(rankings, labels, 5);
  return result;
}

EvalReport summarize(std::vector<TaskResult> results, const ClassifierSpec& classifier, std::size_t ways) {
  if (results.empty()) throw Error(ErrorCode::MalformedInput, "no task results to summarize");
  std::sort(results.begin(), results.end(), [](const auto& a, const auto& b) { return a.task_id < b.task_id; });
  EvalReport report;
  report.classifier = classifier;
  report.ways = ways;
  report.tasks = std::move(results);

  std::vector<double> top1;
  std::vector<double> top5;
  for (const auto& r : report.tasks) {
    top1.push_back(r.top1);
    if (r.top5) top5.push_back(*r.top5);
  }
  std::tie(report.mean_top1, report.ci95_top1) = mean_and_ci(top1);
  if (!top5.empty()) {
    auto [m, ci] = mean_and_ci(top5);
    report.mean_top5 = m;
    report.ci95_top5 = ci;
  }

  const auto order = coarsity_order(report.tasks);
  const std::size_t total = order.size();
  for (std::size_t b = 0; b < 4; ++b) {
    QuartileSummary q;
    const std::size_t begin = total * b / 4;
    const std::size_t end = total * (b + 1) / 4;
    q.count = end - begin;
    if (q.count > 0) {
      double sum1 = 0.0;
      double sum5 = 0.0;
      bool any5 = false;
      q.coarsity_min = report.tasks[order[begin]].coarsity;
      q.coarsity_max = report.tasks[order[end - 1]].coarsity;
      for (std::size_t i = begin; i < end; ++i) {
        const auto& r = report.tasks[order[i]];
        sum1 += r.top1;
        if (r.top5) {
          sum5 += *r.top5;
          any5 = true;
        }
      }
      q.mean_top1 = sum1 / static_cast<double>(q.count);
      if (any5) q.mean_top5 = sum5 / static_cast<double>(q.count);
    }
    report.quartiles.push_back(q);
  }
  return report;
}

EvalReport evaluate_testbed(const EmbeddingStore& store, const Testbed& testbed, const ClassifierSpec& classifier,
                            unsigned threads) {
  classifier.validate();
  if (testbed.tasks.empty()) throw Error(ErrorCode::MalformedInput, "testbed has no tasks");
  std::vector<TaskResult> results(testbed.tasks.size());
  parallel_for(testbed.tasks.size(), threads == 0 ? default_thread_count() : threads, [&](std::size_t i) {
    const auto& task = testbed.tasks[i];
    const auto data = gather_task(store, task);
    results[i] = score_task(task, classify(classifier, data), data.query_labels);
  });
  return summarize(std::move(results), classifier, testbed.config.ways);
}

std::vector<RollingPoint> rolling_correlation(const EvalReport& report, std::size_t window) {
  if (window == 0) throw Error(ErrorCode::InvalidConfig, "window must be positive");
  if (window > report.tasks.size()) {
    throw Error(ErrorCode::WindowTooLarge, "window " + std::to_string(window) + " exceeds " +
                                               std::to_string(report.tasks.size()) + " tasks");
  }
  const auto order = coarsity_order(report.tasks);
  std::vector<RollingPoint> out;
  out.reserve(order.size() - window + 1);
  for (std::size_t start = 0; start + window <= order.size(); ++start) {
    double c = 0.0;
    double a = 0.0;
    for (std::size_t i = start; i < start + window; ++i) {
      c += report.tasks[order[i]].coarsity;
      a += report.tasks[order[i]].top1;
    }
    out.push_back({c / static_cast<double>(window), a / static_cast<double>(window)});
  }
  return out;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw Error(ErrorCode::MalformedInput, "spearman needs two equal series of length >= 2");
  auto ranks = [](std::span<const double> v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
      std::size_t j = i;
      while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
      const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

void write_report_json(std::ostream& out, const EvalReport& report, std::size_t window,
                       std::span<const RollingPoint> rolling) {
  nlohmann::ordered_json j;
  j["method"] = to_string(report.classifier.method);
  auto& hp = j["hyperparameters"] = nlohmann::ordered_json::object();
  if (report.classifier.method == Method::Finetune) {
    hp["steps"] = report.classifier.steps;
    hp["learning_rate"] = report.classifier.learning_rate;
  } else if (report.classifier.method == Method::BdCspn) {
    hp["temperature"] = report.classifier.rectify.temperature;
    hp["shift_weight"] = report.classifier.rectify.shift_weight;
  }
  j["ways"] = report.ways;
  j["num_tasks"] = report.tasks.size();
  j["mean_top1"] = report.mean_top1;
  j["ci95_top1"] = report.ci95_top1;
  if (report.mean_top5) {
    j["mean_top5"] = *report.mean_top5;
    j["ci95_top5"] = *report.ci95_top5;
  }
  auto& quartiles = j["quartiles"] = nlohmann::ordered_json::array();
  for (std::size_t b = 0; b < report.quartiles.size(); ++b) {
    const auto& q = report.quartiles[b];
    nlohmann::ordered_json item;
    item["quartile"] = b + 1;
    item["count"] = q.count;
    item["coarsity_min"] = q.coarsity_min;
    item["coarsity_max"] = q.coarsity_max;
    item["mean_top1"] = q.mean_top1 ? nlohmann::ordered_json(*q.mean_top1) : nlohmann::ordered_json();
    if (q.mean_top5) item["mean_top5"] = *q.mean_top5;
    quartiles.push_back(std::move(item));
  }
  auto& roll = j["rolling"] = nlohmann::ordered_json::object();
  roll["window"] = window;
  roll["points"] = rolling.size();
  if (rolling.size() >= 2) {
    std::vector<double> c;
    std::vector<double> a;
    for (const auto& p : rolling) {
      c.push_back(p.coarsity);
      a.push_back(p.accuracy);
    }
    roll["spearman"] = spearman(c, a);
  } else {
    roll["spearman"] = nullptr;
  }
  out << j.dump(2) << '\n';
}

void write_task_csv(std::ostream& out, const EvalReport& report) {
  out << "task_id,coarsity,top1,top5\n";
  for (const auto& r : report.tasks) {
    out << r.task_id << ',' << format_double(r.coarsity) << ',' << format_double(r.top1) << ',';
    if (r.top5) out << format_double(*r.top5);
    out << '\n';
  }
}

void write_rolling_csv(std::ostream& out, std::span<const RollingPoint> rolling) {
  out << "index,coarsity,accuracy\n";
  for (std::size_t i = 0; i < rolling.size(); ++i) {
    out << i << ',' << format_double(rolling[i].coarsity) << ',' << format_double(rolling[i].accuracy) << '\n';
  }
}

}  // namespace semtask
