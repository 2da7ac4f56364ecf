#pragma once

// Reference implementations used only by tests. Nothing here calls into the
// library's algorithms; inputs are plain node lists, matrices and CSV text.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>

#include "semtask/taxonomy.hpp"

namespace oracle {

struct Dag {
  std::vector<semtask::ConceptNode> nodes;
};

// Random DAG: node 0 is the root, node i > 0 takes 1..max_parents distinct
// parents among earlier nodes. Ids are shuffled labels so id order and
// topological order disagree. Counts are small to force ties.
inline Dag random_dag(std::mt19937_64& gen, std::size_t max_nodes = 20, std::size_t max_parents = 3) {
  std::uniform_int_distribution<std::size_t> size_dist(2, max_nodes);
  const std::size_t n = size_dist(gen);
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < n; ++i) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "v%02zu", i);
    labels.push_back(buf);
  }
  std::shuffle(labels.begin(), labels.end(), gen);

  Dag dag;
  std::vector<bool> has_child(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    semtask::ConceptNode node;
    node.id = labels[i];
    node.display_name = labels[i];
    if (i > 0) {
      std::uniform_int_distribution<std::size_t> k_dist(1, std::min(max_parents, i));
      std::vector<std::size_t> pool(i);
      for (std::size_t p = 0; p < i; ++p) pool[p] = p;
      std::shuffle(pool.begin(), pool.end(), gen);
      for (std::size_t p = 0, k = k_dist(gen); p < k; ++p) {
        node.parent_ids.push_back(labels[pool[p]]);
        has_child[pool[p]] = true;
      }
    }
    dag.nodes.push_back(std::move(node));
  }
  std::uniform_int_distribution<std::uint64_t> count_dist(1, 4);
  std::bernoulli_distribution internal_own(0.3);
  for (std::size_t i = 0; i < n; ++i) {
    if (!has_child[i]) {
      dag.nodes[i].own_instance_count = count_dist(gen);
    } else if (internal_own(gen)) {
      dag.nodes[i].own_instance_count = count_dist(gen);
    }
  }
  return dag;
}

// Brute-force view over a node list: ancestor and descendant sets by
// exhaustive search, counts as sums over descendant sets.
class BruteTaxonomy {
 public:
  explicit BruteTaxonomy(const std::vector<semtask::ConceptNode>& nodes) {
    for (const auto& n : nodes) {
      own_[n.id] = n.own_instance_count;
      parents_[n.id] = n.parent_ids;
      children_[n.id];
      for (const auto& p : n.parent_ids) children_[p].push_back(n.id);
    }
  }

  std::set<std::string> ancestors(const std::string& id) const {
    std::set<std::string> seen;
    std::function<void(const std::string&)> up = [&](const std::string& v) {
      if (!seen.insert(v).second) return;
      for (const auto& p : parents_.at(v)) up(p);
    };
    up(id);
    return seen;
  }

  std::set<std::string> descendants(const std::string& id) const {
    std::set<std::string> seen;
    std::function<void(const std::string&)> down = [&](const std::string& v) {
      if (!seen.insert(v).second) return;
      for (const auto& c : children_.at(v)) down(c);
    };
    down(id);
    return seen;
  }

  std::uint64_t count(const std::string& id) const {
    std::uint64_t total = 0;
    for (const auto& d : descendants(id)) total += own_.at(d);
    return total;
  }

  std::vector<std::string> leaves() const {
    std::vector<std::string> out;
    for (const auto& [id, kids] : children_) {
      if (kids.empty()) out.push_back(id);
    }
    return out;
  }

  std::string lso(const std::string& a, const std::string& b) const {
    const auto aa = ancestors(a);
    const auto bb = ancestors(b);
    std::string best;
    std::uint64_t best_count = 0;
    for (const auto& c : aa) {
      if (!bb.count(c)) continue;
      const auto n = count(c);
      if (best.empty() || n < best_count || (n == best_count && c < best)) {
        best = c;
        best_count = n;
      }
    }
    return best;
  }

  double jc(const std::string& a, const std::string& b) const {
    const double d = 2.0 * std::log(static_cast<double>(count(lso(a, b)))) -
                     (std::log(static_cast<double>(count(a))) + std::log(static_cast<double>(count(b))));
    return d < 0.0 ? 0.0 : d;
  }

 private:
  std::map<std::string, std::uint64_t> own_;
  std::map<std::string, std::vector<std::string>> parents_;
  std::map<std::string, std::vector<std::string>> children_;
};

// Mean cross-entropy of a linear softmax head written out with loops.
inline double naive_loss(const Eigen::MatrixXd& w, const Eigen::VectorXd& b, const Eigen::MatrixXd& x,
                         const std::vector<std::size_t>& y) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    std::vector<double> z(w.rows());
    for (Eigen::Index c = 0; c < w.rows(); ++c) {
      z[c] = b(c);
      for (Eigen::Index d = 0; d < x.cols(); ++d) z[c] += w(c, d) * x(i, d);
    }
    const double m = *std::max_element(z.begin(), z.end());
    double s = 0.0;
    for (double v : z) s += std::exp(v - m);
    total += -(z[y[i]] - m - std::log(s));
  }
  return total / static_cast<double>(x.rows());
}

// Upper tail of the chi-squared distribution.
inline double chi2_pvalue(double statistic, double dof) {
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared(dof), statistic));
}

struct TaskRow {
  std::uint64_t task_id;
  double coarsity;
  double top1;
};

inline std::vector<TaskRow> parse_task_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  std::vector<TaskRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string id, c, a;
    std::getline(fields, id, ',');
    std::getline(fields, c, ',');
    std::getline(fields, a, ',');
    rows.push_back({std::stoull(id), std::stod(c), std::stod(a)});
  }
  return rows;
}

struct Recomputed {
  double mean = 0.0;
  double ci95 = 0.0;
  std::vector<double> quartile_means;
  std::vector<std::pair<double, double>> rolling;
};

inline Recomputed recompute_report(std::vector<TaskRow> rows, std::size_t window) {
  Recomputed r;
  const double t = static_cast<double>(rows.size());
  long double sum = 0.0L;
  for (const auto& row : rows) sum += row.top1;
  r.mean = static_cast<double>(sum / t);
  long double ss = 0.0L;
  for (const auto& row : rows) ss += (row.top1 - r.mean) * (row.top1 - r.mean);
  r.ci95 = rows.size() < 2 ? 0.0 : 1.96 * std::sqrt(static_cast<double>(ss / (t - 1))) / std::sqrt(t);

  std::sort(rows.begin(), rows.end(), [](const TaskRow& a, const TaskRow& b) {
    return a.coarsity != b.coarsity ? a.coarsity < b.coarsity : a.task_id < b.task_id;
  });
  for (std::size_t q = 0; q < 4; ++q) {
    const std::size_t lo = rows.size() * q / 4;
    const std::size_t hi = rows.size() * (q + 1) / 4;
    long double s = 0.0L;
    for (std::size_t i = lo; i < hi; ++i) s += rows[i].top1;
    r.quartile_means.push_back(hi > lo ? static_cast<double>(s / (hi - lo)) : NAN);
  }
  for (std::size_t start = 0; start + window <= rows.size(); ++start) {
    long double c = 0.0L;
    long double a = 0.0L;
    for (std::size_t i = start; i < start + window; ++i) {
      c += rows[i].coarsity;
      a += rows[i].top1;
    }
    r.rolling.emplace_back(static_cast<double>(c / window), static_cast<double>(a / window));
  }
  return r;
}

}  // namespace oracle
