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

#include "lcintent/optim.hpp"

#include <cmath>

#include "lcintent/common.hpp"

namespace lcintent {

double global_norm(const ConstTensorViews& grads) {
  double sq = 0.0;
  for (auto g : grads) {
    for (double x : g) sq += x * x;
  }
  return std::sqrt(sq);
}

double clip_gradients(const TensorViews& grads, double max_norm) {
  const double norm = global_norm(const_views(grads));
  if (!std::isfinite(norm)) throw NumericError("non-finite gradient norm");
  if (norm > max_norm) {
    const double scale = max_norm / norm;
    for (auto g : grads) {
      for (double& x : g) x *= scale;
    }
  }
  return norm;
}

void AdamW::step(const TensorViews& params, const ConstTensorViews& grads) {
  if (params.size() != grads.size()) throw Error("adamw: parameter/gradient tensor count mismatch");
  if (m_.empty()) {
    for (auto p : params) {
      m_.emplace_back(p.size(), 0.0);
      v_.emplace_back(p.size(), 0.0);
    }
  }
  if (m_.size() != params.size()) throw Error("adamw: parameter layout changed between steps");
  ++step_;
  const double lr = config_.learning_rate;
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
  const double decay = 1.0 - lr * config_.weight_decay;
  for (std::size_t t = 0; t < params.size(); ++t) {
    auto p = params[t];
    auto g = grads[t];
    if (p.size() != g.size() || p.size() != m_[t].size()) throw Error("adamw: tensor size mismatch");
    auto& m = m_[t];
    auto& v = v_[t];
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] *= decay;
      m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g[i];
      v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g[i] * g[i];
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      p[i] -= lr * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
  }
}

}  // namespace lcintent
