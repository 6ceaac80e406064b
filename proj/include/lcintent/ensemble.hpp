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

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "lcintent/autoencoder.hpp"
#include "lcintent/classifier.hpp"
#include "lcintent/features.hpp"

namespace lcintent {

enum class BagMode { Independent, Coverage };

std::string_view to_string(BagMode mode);
BagMode parse_bag_mode(std::string_view s);

struct EnsembleConfig {
  int beta = 5;         // number of base learners
  int train_iters = 10;  // classifier epochs per base learner
  std::uint64_t seed = 0;
  BagMode bag_mode = BagMode::Independent;
  bool retrain_encoder = false;
};

/// Majority-class sample of one base learner; the minority set is shared.
struct Bag {
  std::vector<std::size_t> majority_subset;  // sorted, no duplicates
};

/// ceil(sum(minority_counts) / mu) with mu = number of minority classes.
std::size_t bag_size(std::span<const std::size_t> minority_counts);

/// Draws `beta` majority subsets of bag_size(minority_counts) elements each.
/// Independent: each bag is a uniform sample without replacement, drawn
/// from its own stream. Coverage: bags consume one shuffled pass over the
/// majority pool, reshuffling only when the pool is exhausted.
/// Throws DataError when the bag size exceeds the majority count.
std::vector<Bag> make_bags(std::span<const std::size_t> majority_indices, std::span<const std::size_t> minority_counts,
                           int beta, BagMode mode, std::uint64_t seed);

struct Ensemble {
  std::shared_ptr<const SeqAutoencoder> encoder;
  /// One encoder per member when trained with retrain_encoder; else empty.
  std::vector<std::shared_ptr<const SeqAutoencoder>> member_encoders;
  std::vector<ClassifierParams> members;
  std::optional<Scaler> scaler;
  EnsembleConfig config;
  bool use_static = false;
  Maneuver majority = Maneuver::LK;
  std::vector<std::size_t> bag_sizes;

  int input_dim() const;
};

struct EnsembleTrainOptions {
  EnsembleConfig config;
  TrainHyperparams classifier;
  /// Used only when config.retrain_encoder is set.
  TrainHyperparams autoencoder;
  bool use_static = false;
  LossMode loss_mode = LossMode::CrossEntropy;
};

/// Trains one classifier per bag on X_i- plus the full minority set, on top
/// of the shared encoder. `train` holds unscaled observations; the scaler
/// travels with the returned ensemble.
Ensemble train_ensemble(std::span<const Observation> train, std::shared_ptr<const SeqAutoencoder> encoder,
                        const Scaler& scaler, const EnsembleTrainOptions& options);

/// Identifies the majority class by count. Throws DataError on a tie for
/// the largest count.
Maneuver majority_class(const std::array<std::size_t, kNumClasses>& counts);

/// Elementwise mean of member probabilities.
ClassProbs soft_vote(std::span<const ClassProbs> member_probs);

struct Prediction {
  Maneuver label = Maneuver::LK;
  ClassProbs probs{};
};

/// Scales with the ensemble's scaler, encodes once, evaluates every member
/// and soft-votes. Throws ConfigError if the ensemble has no scaler.
Prediction ensemble_predict(const Ensemble& ensemble, const Observation& observation);
std::vector<Prediction> ensemble_predict(const Ensemble& ensemble, std::span<const Observation> observations);

/// The ensemble restricted to one member (a single base learner).
Ensemble member_view(const Ensemble& ensemble, std::size_t member);

Eigen::VectorXd classifier_input(const Eigen::VectorXd& encoding, const StaticVector& static_features,
                                 bool use_static);

/// Directory layout: manifest.json, scaler.ckpt, encoder.ckpt (or
/// encoder_NN.ckpt per member), member_NN.ckpt.
void save_ensemble(const std::filesystem::path& dir, const Ensemble& ensemble, const Metadata& extra = {});
Ensemble load_ensemble(const std::filesystem::path& dir);

}  // namespace lcintent
