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

#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "lcintent/common.hpp"
#include "lcintent/io.hpp"
#include "lcintent/optim.hpp"

namespace lcintent {

enum class LossMode { CrossEntropy, MulticlassHinge };

std::string_view to_string(LossMode mode);
LossMode parse_loss_mode(std::string_view s);

/// Probabilities in class order (LCL, LK, LCR).
using ClassProbs = std::array<double, kNumClasses>;

/// Linear head on the encoding (optionally concatenated with the static
/// one-hot vector).
struct ClassifierParams {
  Eigen::MatrixXd weights;  // 3 x D_in
  Eigen::VectorXd bias;     // 3
  LossMode loss_mode = LossMode::CrossEntropy;

  static ClassifierParams zeros(int input_dim, LossMode mode = LossMode::CrossEntropy);
  int input_dim() const { return static_cast<int>(weights.cols()); }
  TensorViews views();
  ConstTensorViews views() const;
};

/// Softmax of the affine scores. In hinge mode the scores are margins and
/// the softmax still supplies the probabilities for soft voting.
ClassProbs predict_proba(const ClassifierParams& params, const Eigen::VectorXd& input);
ClassProbs softmax(const std::array<double, kNumClasses>& logits);

/// Argmax; an exact tie that includes LK resolves to LK, any other tie to
/// the lower class index.
Maneuver argmax_with_tie_rule(const ClassProbs& probs);
Maneuver predict(const ClassifierParams& params, const Eigen::VectorXd& input);

/// Mean loss over the columns of `inputs`; `grad` receives its gradient.
/// Cross-entropy, or the Crammer-Singer hinge max(0, 1 + max_{j!=y} s_j - s_y).
double classifier_loss_and_gradient(const ClassifierParams& params, const Eigen::MatrixXd& inputs,
                                    std::span<const Maneuver> labels, ClassifierParams& grad);

struct ClassifierTrainResult {
  ClassifierParams params;
  std::vector<double> loss_history;
};

/// Mini-batch AdamW training on precomputed inputs (one column per sample)
/// with global-norm clipping before every update. Throws DataError if any
/// class is missing from the training set.
ClassifierTrainResult train_classifier(ClassifierParams init, const Eigen::MatrixXd& inputs,
                                       std::span<const Maneuver> labels, const TrainHyperparams& hyper);

/// Uniform(-1/sqrt(D), 1/sqrt(D)) initialization.
ClassifierParams init_classifier(int input_dim, LossMode mode, std::uint64_t seed);

Checkpoint to_checkpoint(const ClassifierParams& params, Metadata meta = {});
ClassifierParams classifier_from_checkpoint(const Checkpoint& ckpt);

}  // namespace lcintent
