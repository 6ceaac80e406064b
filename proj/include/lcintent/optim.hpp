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
#include <span>
#include <vector>

namespace lcintent {

/// A model's parameters (or gradients) as a list of flat views into its
/// tensors. Views stay valid as long as the owning model is not resized.
using TensorViews = std::vector<std::span<double>>;
using ConstTensorViews = std::vector<std::span<const double>>;

double global_norm(const ConstTensorViews& grads);

/// Rescales all gradients jointly to norm `max_norm` when their global L2
/// norm exceeds it. Returns the norm before clipping.
double clip_gradients(const TensorViews& grads, double max_norm = 0.25);

struct AdamWConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.01;
};

/// AdamW with decoupled weight decay:
///   p <- p (1 - lr wd);  m, v moment updates;  p <- p - lr m_hat / (sqrt(v_hat) + eps)
class AdamW {
 public:
  explicit AdamW(AdamWConfig config = {}) : config_(config) {}

  void step(const TensorViews& params, const ConstTensorViews& grads);

  const AdamWConfig& config() const { return config_; }
  std::int64_t steps() const { return step_; }

 private:
  AdamWConfig config_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  std::int64_t step_ = 0;
};

/// Mini-batch training settings shared by the autoencoder and classifiers.
struct TrainHyperparams {
  int batch_size = 256;
  double learning_rate = 1e-4;
  double clip_norm = 0.25;
  double weight_decay = 0.01;
  int epochs = 10;
  std::uint64_t seed = 0;
};

inline ConstTensorViews const_views(const TensorViews& v) { return {v.begin(), v.end()}; }

}  // namespace lcintent
