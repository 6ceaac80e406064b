// Copyright 2026 The lcintent Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lcintent/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lcintent/rng.hpp"

namespace lcintent {

std::string_view to_string(LossMode mode) {
  return mode == LossMode::CrossEntropy ? "cross_entropy" : "multiclass_hinge";
}

LossMode parse_loss_mode(std::string_view s) {
  if (s == "cross_entropy" || s == "ce") return LossMode::CrossEntropy;
  if (s == "multiclass_hinge" || s == "hinge" || s == "svm") return LossMode::MulticlassHinge;
  throw ConfigError("unknown loss mode '" + std::string(s) + "'");
}

ClassifierParams ClassifierParams::zeros(int input_dim, LossMode mode) {
  ClassifierParams p;
  p.weights = Eigen::MatrixXd::Zero(kNumClasses, input_dim);
  p.bias = Eigen::VectorXd::Zero(kNumClasses);
  p.loss_mode = mode;
  return p;
}

TensorViews ClassifierParams::views() {
  return {{weights.data(), static_cast<std::size_t>(weights.size())},
          {bias.data(), static_cast<std::size_t>(bias.size())}};
}

ConstTensorViews ClassifierParams::views() const {
  return {{weights.data(), static_cast<std::size_t>(weights.size())},
          {bias.data(), static_cast<std::size_t>(bias.size())}};
}

ClassProbs softmax(const std::array<double, kNumClasses>& logits) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  ClassProbs p{};
  double sum = 0.0;
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    p[i] = std::exp(logits[i] - mx);
    sum += p[i];
  }
  for (auto& x : p) x /= sum;
  return p;
}

ClassProbs predict_proba(const ClassifierParams& params, const Eigen::VectorXd& input) {
  if (input.size() != params.input_dim()) {
    throw DataError("classifier input has " + std::to_string(input.size()) + " features, expected " +
                    std::to_string(params.input_dim()));
  }
  const Eigen::Vector3d s = params.weights * input + params.bias;
  return softmax({s(0), s(1), s(2)});
}

Maneuver argmax_with_tie_rule(const ClassProbs& probs) {
  const double mx = *std::max_element(probs.begin(), probs.end());
  if (probs[index_of(Maneuver::LK)] == mx) return Maneuver::LK;
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    if (probs[i] == mx) return maneuver_at(i);
  }
  return Maneuver::LK;
}

Maneuver predict(const ClassifierParams& params, const Eigen::VectorXd& input) {
  return argmax_with_tie_rule(predict_proba(params, input));
}

double classifier_loss_and_gradient(const ClassifierParams& params, const Eigen::MatrixXd& inputs,
                                    std::span<const Maneuver> labels, ClassifierParams& grad) {
  const Eigen::Index n = inputs.cols();
  if (static_cast<std::size_t>(n) != labels.size()) throw Error("classifier: input/label count mismatch");
  if (inputs.rows() != params.input_dim()) throw DataError("classifier: input dimension mismatch");
  grad = ClassifierParams::zeros(params.input_dim(), params.loss_mode);
  if (n == 0) return 0.0;
  Eigen::MatrixXd scores = params.weights * inputs;
  scores.colwise() += params.bias;
  Eigen::MatrixXd dscores = Eigen::MatrixXd::Zero(kNumClasses, n);
  double loss = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto y = static_cast<Eigen::Index>(index_of(labels[static_cast<std::size_t>(j)]));
    if (params.loss_mode == LossMode::CrossEntropy) {
      const double mx = scores.col(j).maxCoeff();
      const Eigen::Vector3d e = (scores.col(j).array() - mx).exp().matrix();
      const double z = e.sum();
      loss += -(scores(y, j) - mx - std::log(z));
      dscores.col(j) = e / z;
      dscores(y, j) -= 1.0;
    } else {
      Eigen::Index worst = -1;
      double worst_score = -std::numeric_limits<double>::infinity();
      for (Eigen::Index c = 0; c < static_cast<Eigen::Index>(kNumClasses); ++c) {
        if (c != y && scores(c, j) > worst_score) {
          worst_score = scores(c, j);
          worst = c;
        }
      }
      const double margin = 1.0 + worst_score - scores(y, j);
      if (margin > 0.0) {
        loss += margin;
        dscores(worst, j) += 1.0;
        dscores(y, j) -= 1.0;
      }
    }
  }
  const double inv = 1.0 / static_cast<double>(n);
  dscores *= inv;
  grad.weights.noalias() = dscores * inputs.transpose();
  grad.bias = dscores.rowwise().sum();
  return loss * inv;
}

ClassifierParams init_classifier(int input_dim, LossMode mode, std::uint64_t seed) {
  auto p = ClassifierParams::zeros(input_dim, mode);
  Rng rng(seed);
  const double k = 1.0 / std::sqrt(static_cast<double>(std::max(1, input_dim)));
  std::uniform_real_distribution<double> u(-k, k);
  for (auto t : p.views()) {
    for (double& x : t) x = u(rng);
  }
  return p;
}

ClassifierTrainResult train_classifier(ClassifierParams init, const Eigen::MatrixXd& inputs,
                                       std::span<const Maneuver> labels, const TrainHyperparams& hyper) {
  if (static_cast<std::size_t>(inputs.cols()) != labels.size()) throw Error("classifier: input/label count mismatch");
  if (hyper.batch_size < 1 || hyper.epochs < 1) throw ConfigError("batch_size and epochs must be >= 1");
  std::array<std::size_t, kNumClasses> counts{};
  for (auto l : labels) ++counts[index_of(l)];
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (counts[c] == 0) {
      throw DataError("classifier training set has no " + std::string(to_string(maneuver_at(c))) + " samples");
    }
  }
  ClassifierTrainResult result{std::move(init), {}};
  auto& params = result.params;
  AdamW opt({hyper.learning_rate, 0.9, 0.999, 1e-8, hyper.weight_decay});
  Rng rng = make_rng(hyper.seed, "classifier-shuffle");
  std::vector<Eigen::Index> order(labels.size());
  std::iota(order.begin(), order.end(), 0);
  ClassifierParams grad;
  const auto bs = static_cast<std::size_t>(hyper.batch_size);
  Eigen::MatrixXd batch_in;
  std::vector<Maneuver> batch_lab;
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += bs) {
      const std::size_t end = std::min(order.size(), start + bs);
      batch_in.resize(inputs.rows(), static_cast<Eigen::Index>(end - start));
      batch_lab.resize(end - start);
      for (std::size_t i = start; i < end; ++i) {
        batch_in.col(static_cast<Eigen::Index>(i - start)) = inputs.col(order[i]);
        batch_lab[i - start] = labels[static_cast<std::size_t>(order[i])];
      }
      const double loss = classifier_loss_and_gradient(params, batch_in, batch_lab, grad);
      if (!std::isfinite(loss)) throw NumericError("classifier training diverged at epoch " + std::to_string(epoch));
      epoch_loss += loss * static_cast<double>(end - start);
      clip_gradients(grad.views(), hyper.clip_norm);
      opt.step(params.views(), const_views(grad.views()));
    }
    result.loss_history.push_back(epoch_loss / static_cast<double>(order.size()));
  }
  return result;
}

Checkpoint to_checkpoint(const ClassifierParams& params, Metadata meta) {
  Checkpoint c;
  c.kind = CheckpointKind::Classifier;
  c.meta = std::move(meta);
  c.meta["loss_mode"] = std::string(to_string(params.loss_mode));
  c.meta["input_dim"] = std::to_string(params.input_dim());
  c.add("weights", params.weights);
  c.add("bias", params.bias);
  return c;
}

ClassifierParams classifier_from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.kind != CheckpointKind::Classifier) throw ConfigError("checkpoint is not a classifier");
  ClassifierParams p;
  p.loss_mode = parse_loss_mode(ckpt.meta_value("loss_mode"));
  p.weights = ckpt.matrix("weights");
  p.bias = ckpt.matrix("bias");
  if (p.weights.rows() != static_cast<Eigen::Index>(kNumClasses) || p.bias.size() != static_cast<Eigen::Index>(kNumClasses)) {
    throw DataError("classifier checkpoint has the wrong shape");
  }
  return p;
}

}  // namespace lcintent
