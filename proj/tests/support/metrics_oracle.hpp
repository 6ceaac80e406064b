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

#include <cstddef>
#include <optional>
#include <span>

#include "lcintent/common.hpp"

namespace lcintent::testing {

/// Straight-line recount of the evaluation metrics, one pass per quantity.
struct MetricsOracle {
  std::optional<double> precision[kNumClasses];
  std::optional<double> recall[kNumClasses];
  std::optional<double> accuracy;
  std::size_t cell[kNumClasses][kNumClasses] = {};
  std::size_t tp = 0, fp = 0, critical_fn = 0;
  std::optional<double> lc_precision, lc_recall, lc_f1;
};

inline MetricsOracle recount(std::span<const Maneuver> preds, std::span<const Maneuver> labels,
                             std::span<const double> ttlc, double tau) {
  MetricsOracle o;
  const std::size_t n = labels.size();
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const Maneuver m = maneuver_at(c);
    std::size_t hit = 0, predicted = 0, actual = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (preds[i] == m && labels[i] == m) ++hit;
      if (preds[i] == m) ++predicted;
      if (labels[i] == m) ++actual;
    }
    if (predicted > 0) o.precision[c] = static_cast<double>(hit) / static_cast<double>(predicted);
    if (actual > 0) o.recall[c] = static_cast<double>(hit) / static_cast<double>(actual);
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    correct += preds[i] == labels[i];
    ++o.cell[index_of(labels[i])][index_of(preds[i])];
  }
  if (n > 0) o.accuracy = static_cast<double>(correct) / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool lc = labels[i] != Maneuver::LK;
    if (lc && preds[i] == labels[i]) ++o.tp;
    if (!lc && preds[i] != Maneuver::LK) ++o.fp;
    if (lc && ttlc[i] <= tau && preds[i] != labels[i]) ++o.critical_fn;
  }
  if (o.tp + o.fp > 0) o.lc_precision = static_cast<double>(o.tp) / static_cast<double>(o.tp + o.fp);
  if (o.tp + o.critical_fn > 0) o.lc_recall = static_cast<double>(o.tp) / static_cast<double>(o.tp + o.critical_fn);
  if (o.lc_precision && o.lc_recall && *o.lc_precision + *o.lc_recall > 0.0) {
    o.lc_f1 = 2.0 * *o.lc_precision * *o.lc_recall / (*o.lc_precision + *o.lc_recall);
  }
  return o;
}

}  // namespace lcintent::testing
