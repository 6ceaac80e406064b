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

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lcintent/common.hpp"
#include "lcintent/ensemble.hpp"
#include "lcintent/features.hpp"

namespace lcintent {

/// A ratio whose denominator may be empty. nullopt marks "undefined".
using Metric = std::optional<double>;

struct ConfusionCounts {
  /// rows = true class, cols = predicted class, both in (LCL, LK, LCR) order.
  std::array<std::array<std::size_t, kNumClasses>, kNumClasses> m{};

  std::size_t at(Maneuver truth, Maneuver pred) const { return m[index_of(truth)][index_of(pred)]; }
  std::size_t row_sum(std::size_t c) const;
  std::size_t col_sum(std::size_t c) const;
  std::size_t trace() const;
  std::size_t total() const;

  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// Throws Error if the two spans differ in length.
ConfusionCounts confusion(std::span<const Maneuver> preds, std::span<const Maneuver> labels);

struct MulticlassMetrics {
  std::array<Metric, kNumClasses> precision{};
  std::array<Metric, kNumClasses> recall{};
  Metric accuracy;

  /// Mean of the defined per-class recalls; undefined if none is defined.
  Metric macro_recall() const;
};

MulticlassMetrics multiclass_metrics(const ConfusionCounts& counts);

struct BinaryLcMetrics {
  Metric precision;
  Metric recall;
  Metric f1;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t critical_fn = 0;
  double ttlc_threshold = 1.5;
};

/// Lane-change detection view of a three-class prediction.
///  tp: LC instance predicted with its true direction, at any TTLC.
///  fp: LK instance predicted as either LC.
///  critical_fn: LC instance with ttlc <= tau predicted as anything else.
/// A direction swap is never an FP; it is a critical FN inside tau.
BinaryLcMetrics binary_lc_metrics(std::span<const Maneuver> preds, std::span<const Maneuver> labels,
                                  std::span<const double> ttlc, double tau = 1.5);

struct TtlcBin {
  double ttlc_center = 0.0;
  double mean = 0.0;
  double std = 0.0;  // population
  std::size_t n = 0;
};

struct TtlcCurve {
  Maneuver maneuver = Maneuver::LCL;
  std::vector<TtlcBin> bins;  // decreasing TTLC
};

/// Bin k covers ((k) w, (k+1) w]; a TTLC exactly on a boundary belongs to
/// the lower bin.
std::size_t ttlc_bin_index(double ttlc, double bin_width);

/// Groups LC observations by TTLC bin and summarizes the predicted
/// probability of each observation's true class. LK entries are skipped.
/// Returns the LCL curve followed by the LCR curve.
std::array<TtlcCurve, 2> ttlc_curve(std::span<const Observation> observations, std::span<const ClassProbs> probs,
                                    double bin_width = 0.5);
std::array<TtlcCurve, 2> ttlc_curve(const Ensemble& model, std::span<const Observation> observations,
                                    double bin_width = 0.5);

/// Fraction of `holdout_preds` equal to LK.
Metric lk_holdout_recall(std::span<const Maneuver> holdout_preds);
Metric lk_holdout_recall(const Ensemble& model, std::span<const Observation> holdout);

struct EvaluationReport {
  std::string model_name;
  std::size_t n = 0;
  ConfusionCounts confusion;
  MulticlassMetrics multiclass;
  BinaryLcMetrics binary;
  Metric lk_holdout_recall;
  std::size_t lk_holdout_n = 0;
};

/// Predicts `test` (and `holdout` if any) with `model` and computes both
/// metric suites.
EvaluationReport evaluate(const Ensemble& model, std::span<const Observation> test,
                          std::span<const Observation> holdout = {}, double tau = 1.5,
                          std::string model_name = "model");

/// Trains-on-D1, tests-on-D2 protocol. `d2_test` holds raw D2 observations;
/// they are class-balanced (LK removed at random into the holdout) and
/// scaled with the model's own D1 scaler. Throws ConfigError if the model
/// carries no scaler.
EvaluationReport cross_dataset_eval(const Ensemble& model, std::span<const Observation> d2_test, std::uint64_t seed,
                                    double tau = 1.5, std::string model_name = "model");

/// Machine-readable report; undefined metrics are null.
std::string report_json(std::span<const EvaluationReport> reports);
/// Delimited tables: one row per model with the binary suite, accuracy and
/// LK holdout recall, then one row per model with per-class precision and
/// recall plus accuracy.
std::string report_tsv(std::span<const EvaluationReport> reports);
/// Columns: class, ttlc_center, mean, std, n.
std::string curves_tsv(std::span<const TtlcCurve> curves);

}  // namespace lcintent
