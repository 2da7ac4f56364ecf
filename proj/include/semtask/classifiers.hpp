#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "semtask/embeddings.hpp"
#include "semtask/sampler.hpp"

namespace semtask {

/// Class positions (into TaskSpec::class_ids), best first.
using Ranking = std::vector<std::size_t>;

/// Support and query embeddings of one task, one row per instance.
struct TaskData {
  std::size_t ways = 0;
  Eigen::MatrixXd support;
  std::vector<std::size_t> support_labels;
  Eigen::MatrixXd query;
  std::vector<std::size_t> query_labels;
};

/// Throws MissingInstance (naming task and instance) or LabelMismatch.
TaskData gather_task(const EmbeddingStore& store, const TaskSpec& task);

/// Per-class mean of the support rows; row c is class c's prototype.
Eigen::MatrixXd compute_prototypes(const TaskData& data);
Eigen::MatrixXd compute_prototypes(const EmbeddingStore& store, const TaskSpec& task);

/// Sort classes by descending score; equal scores keep class order.
std::vector<Ranking> rank_by_scores(const Eigen::MatrixXd& scores);

/// Nearest prototype by squared Euclidean distance.
std::vector<Ranking> protonet_predict(const Eigen::MatrixXd& prototypes, const Eigen::MatrixXd& queries);

struct RectifyOptions {
  /// Softmax temperature over negative squared distances.
  double temperature = 1.0;
  /// Weight of the query mean in the shifted prototype.
  double shift_weight = 0.5;
};

/// Transductive prototype shift. Each query goes to its nearest prototype
/// with confidence softmax(-d^2 / temperature) of that class. A prototype
/// with assigned queries becomes
///   (1 - shift_weight) * prototype + shift_weight * (confidence-weighted query mean);
/// prototypes without queries are unchanged.
Eigen::MatrixXd bdcspn_rectify(const Eigen::MatrixXd& prototypes, const Eigen::MatrixXd& queries,
                               const RectifyOptions& options = {});

/// Linear softmax head: scores = W x + b, W is ways x dim.
struct LinearHead {
  Eigen::MatrixXd weights;
  Eigen::VectorXd bias;
};

/// Mean softmax cross-entropy over rows of `inputs`. When `gradient` is
/// non-null it receives the analytic gradient (softmax - onehot) x^T / N.
double softmax_cross_entropy(const LinearHead& head, const Eigen::MatrixXd& inputs,
                             const std::vector<std::size_t>& labels, LinearHead* gradient = nullptr);

/// Full-batch gradient descent from a zero head.
LinearHead finetune_head(const Eigen::MatrixXd& inputs, const std::vector<std::size_t>& labels, std::size_t ways,
                         std::size_t steps, double learning_rate);

std::vector<Ranking> finetune_fit_predict(const TaskData& data, std::size_t steps, double learning_rate);
std::vector<Ranking> finetune_fit_predict(const EmbeddingStore& store, const TaskSpec& task, std::size_t steps,
                                          double learning_rate);

enum class Method { ProtoNet, Finetune, BdCspn };

std::string_view to_string(Method method) noexcept;
/// "protonet", "finetune" or "bdcspn"; throws InvalidConfig.
Method parse_method(std::string_view text);

struct ClassifierSpec {
  Method method = Method::ProtoNet;
  std::size_t steps = 10;
  double learning_rate = 1e-3;
  RectifyOptions rectify;

  /// Throws InvalidConfig.
  void validate() const;
};

std::vector<Ranking> classify(const ClassifierSpec& spec, const TaskData& data);

}  // namespace semtask
