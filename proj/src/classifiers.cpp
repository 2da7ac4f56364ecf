#include "semtask/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "semtask/error.hpp"

namespace semtask {

namespace {

void append_rows(const EmbeddingStore& store, const TaskSpec& task, const std::vector<std::vector<std::string>>& lists,
                 Eigen::MatrixXd& rows, std::vector<std::size_t>& labels) {
  std::size_t total = 0;
  for (const auto& l : lists) total += l.size();
  rows.resize(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(store.dim()));
  labels.clear();
  Eigen::Index r = 0;
  for (std::size_t c = 0; c < lists.size(); ++c) {
    for (const auto& inst : lists[c]) {
      auto idx = store.find(inst);
      if (!idx) {
        throw Error(ErrorCode::MissingInstance,
                    "task " + std::to_string(task.task_id) + ": instance '" + inst + "' not in embedding store",
                    {std::to_string(task.task_id), inst});
      }
      if (store.class_id(*idx) != task.class_ids[c]) {
        throw Error(ErrorCode::LabelMismatch,
                    "task " + std::to_string(task.task_id) + ": instance '" + inst + "' is labeled '" +
                        store.class_id(*idx) + "' in the embedding store, not '" + task.class_ids[c] + "'",
                    {std::to_string(task.task_id), inst});
      }
      const auto v = store.vector(*idx);
      for (std::size_t d = 0; d < v.size(); ++d) rows(r, static_cast<Eigen::Index>(d)) = v[d];
      labels.push_back(c);
      ++r;
    }
  }
}

void require_same_dim(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.cols() != b.cols()) {
    throw Error(ErrorCode::DimensionMismatch,
                "dimension " + std::to_string(a.cols()) + " vs " + std::to_string(b.cols()));
  }
}

// Squared Euclidean distances, queries x prototypes.
Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& queries, const Eigen::MatrixXd& prototypes) {
  Eigen::MatrixXd d(queries.rows(), prototypes.rows());
  for (Eigen::Index q = 0; q < queries.rows(); ++q) {
    for (Eigen::Index c = 0; c < prototypes.rows(); ++c) d(q, c) = (queries.row(q) - prototypes.row(c)).squaredNorm();
  }
  return d;
}

}  // namespace

TaskData gather_task(const EmbeddingStore& store, const TaskSpec& task) {
  TaskData data;
  data.ways = task.class_ids.size();
  append_rows(store, task, task.support, data.support, data.support_labels);
  append_rows(store, task, task.query, data.query, data.query_labels);
  return data;
}

Eigen::MatrixXd compute_prototypes(const TaskData& data) {
  Eigen::MatrixXd protos = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(data.ways), data.support.cols());
  std::vector<std::size_t> counts(data.ways, 0);
  for (Eigen::Index r = 0; r < data.support.rows(); ++r) {
    const auto c = data.support_labels[static_cast<std::size_t>(r)];
    protos.row(static_cast<Eigen::Index>(c)) += data.support.row(r);
    ++counts[c];
  }
  for (std::size_t c = 0; c < data.ways; ++c) {
    if (counts[c] == 0) throw Error(ErrorCode::MalformedInput, "class position " + std::to_string(c) + " has no support");
    protos.row(static_cast<Eigen::Index>(c)) /= static_cast<double>(counts[c]);
  }
  return protos;
}

Eigen::MatrixXd compute_prototypes(const EmbeddingStore& store, const TaskSpec& task) {
  return compute_prototypes(gather_task(store, task));
}

std::vector<Ranking> rank_by_scores(const Eigen::MatrixXd& scores) {
  std::vector<Ranking> out(static_cast<std::size_t>(scores.rows()));
  for (Eigen::Index q = 0; q < scores.rows(); ++q) {
    auto& ranking = out[static_cast<std::size_t>(q)];
    ranking.resize(static_cast<std::size_t>(scores.cols()));
    std::iota(ranking.begin(), ranking.end(), 0);
    std::stable_sort(ranking.begin(), ranking.end(), [&](std::size_t a, std::size_t b) {
      return scores(q, static_cast<Eigen::Index>(a)) > scores(q, static_cast<Eigen::Index>(b));
    });
  }
  return out;
}

std::vector<Ranking> protonet_predict(const Eigen::MatrixXd& prototypes, const Eigen::MatrixXd& queries) {
  if (prototypes.rows() == 0) throw Error(ErrorCode::MalformedInput, "no prototypes");
  require_same_dim(prototypes, queries);
  return rank_by_scores(-squared_distances(queries, prototypes));
}

Eigen::MatrixXd bdcspn_rectify(const Eigen::MatrixXd& prototypes, const Eigen::MatrixXd& queries,
                               const RectifyOptions& options) {
  require_same_dim(prototypes, queries);
  const Eigen::MatrixXd dist = squared_distances(queries, prototypes);
  Eigen::MatrixXd weighted_sum = Eigen::MatrixXd::Zero(prototypes.rows(), prototypes.cols());
  Eigen::VectorXd weight_total = Eigen::VectorXd::Zero(prototypes.rows());
  for (Eigen::Index q = 0; q < queries.rows(); ++q) {
    Eigen::Index assigned = 0;
    dist.row(q).minCoeff(&assigned);  // first minimum on ties
    // softmax(-d/T) at the assigned class, shifted by the minimum distance.
    double denom = 0.0;
    for (Eigen::Index c = 0; c < prototypes.rows(); ++c) {
      denom += std::exp(-(dist(q, c) - dist(q, assigned)) / options.temperature);
    }
    const double confidence = 1.0 / denom;
    weighted_sum.row(assigned) += confidence * queries.row(q);
    weight_total(assigned) += confidence;
  }
  Eigen::MatrixXd rectified = prototypes;
  for (Eigen::Index c = 0; c < prototypes.rows(); ++c) {
    if (weight_total(c) <= 0.0) continue;
    const Eigen::RowVectorXd query_mean = weighted_sum.row(c) / weight_total(c);
    rectified.row(c) = (1.0 - options.shift_weight) * prototypes.row(c) + options.shift_weight * query_mean;
  }
  return rectified;
}

double softmax_cross_entropy(const LinearHead& head, const Eigen::MatrixXd& inputs,
                             const std::vector<std::size_t>& labels, LinearHead* gradient) {
  const Eigen::Index n = inputs.rows();
  Eigen::MatrixXd logits = inputs * head.weights.transpose();
  logits.rowwise() += head.bias.transpose();
  Eigen::MatrixXd probs(logits.rows(), logits.cols());
  double loss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double top = logits.row(i).maxCoeff();
    const Eigen::RowVectorXd shifted = logits.row(i).array() - top;
    const double log_z = std::log(shifted.array().exp().sum());
    const auto y = static_cast<Eigen::Index>(labels[static_cast<std::size_t>(i)]);
    loss -= shifted(y) - log_z;
    probs.row(i) = (shifted.array() - log_z).exp();
  }
  loss /= static_cast<double>(n);
  if (gradient) {
    Eigen::MatrixXd delta = probs;
    for (Eigen::Index i = 0; i < n; ++i) delta(i, static_cast<Eigen::Index>(labels[static_cast<std::size_t>(i)])) -= 1.0;
    delta /= static_cast<double>(n);
    gradient->weights = delta.transpose() * inputs;
    gradient->bias = delta.colwise().sum().transpose();
  }
  return loss;
}

LinearHead finetune_head(const Eigen::MatrixXd& inputs, const std::vector<std::size_t>& labels, std::size_t ways,
                         std::size_t steps, double learning_rate) {
  LinearHead head{Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ways), inputs.cols()),
                  Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ways))};
  LinearHead grad;
  for (std::size_t s = 0; s < steps; ++s) {
    softmax_cross_entropy(head, inputs, labels, &grad);
    head.weights -= learning_rate * grad.weights;
    head.bias -= learning_rate * grad.bias;
  }
  return head;
}

std::vector<Ranking> finetune_fit_predict(const TaskData& data, std::size_t steps, double learning_rate) {
  const auto head = finetune_head(data.support, data.support_labels, data.ways, steps, learning_rate);
  Eigen::MatrixXd scores = data.query * head.weights.transpose();
  scores.rowwise() += head.bias.transpose();
  return rank_by_scores(scores);
}

std::vector<Ranking> finetune_fit_predict(const EmbeddingStore& store, const TaskSpec& task, std::size_t steps,
                                          double learning_rate) {
  return finetune_fit_predict(gather_task(store, task), steps, learning_rate);
}

std::string_view to_string(Method method) noexcept {
  switch (method) {
    case Method::ProtoNet: return "protonet";
    case Method::Finetune: return "finetune";
    case Method::BdCspn: return "bdcspn";
  }
  return "unknown";
}

Method parse_method(std::string_view text) {
  if (text == "protonet") return Method::ProtoNet;
  if (text == "finetune") return Method::Finetune;
  if (text == "bdcspn") return Method::BdCspn;
  throw Error(ErrorCode::InvalidConfig, "unknown method '" + std::string(text) + "'", {std::string(text)});
}

void ClassifierSpec::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorCode::InvalidConfig, "learning rate must be finite and non-negative");
  }
  if (!(rectify.temperature > 0.0) || !std::isfinite(rectify.temperature)) {
    throw Error(ErrorCode::InvalidConfig, "temperature must be positive");
  }
  if (!(rectify.shift_weight >= 0.0 && rectify.shift_weight <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "shift weight must lie in [0, 1]");
  }
}

std::vector<Ranking> classify(const ClassifierSpec& spec, const TaskData& data) {
  switch (spec.method) {
    case Method::ProtoNet:
      return protonet_predict(compute_prototypes(data), data.query);
    case Method::Finetune:
      return finetune_fit_predict(data, spec.steps, spec.learning_rate);
    case Method::BdCspn:
      return protonet_predict(bdcspn_rectify(compute_prototypes(data), data.query, spec.rectify), data.query);
  }
  throw Error(ErrorCode::InvalidConfig, "unknown method");
}

}  // namespace semtask
