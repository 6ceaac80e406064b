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
#include <string>
#include <vector>

#include "lcintent/common.hpp"
#include "lcintent/ingest.hpp"

namespace lcintent {

// Fixed sequential feature layout (version 1):
//   channels 0-3   target vehicle (y - y0, d_y, v_y, v_x)
//   channels 4-35  eight surrounding-vehicle slots x (dy, dx, dv_y, dv_x)
inline constexpr int kFeatureLayoutVersion = 1;
inline constexpr int kHistoryFrames = 40;
inline constexpr int kDownsample = 2;
inline constexpr int kSeqLen = kHistoryFrames / kDownsample;
inline constexpr int kTvChannels = 4;
inline constexpr int kSvSlots = 8;
inline constexpr int kSvChannels = 4;
inline constexpr int kSeqChannels = kTvChannels + kSvSlots * kSvChannels;
inline constexpr int kStaticDim = 7;
inline constexpr int kFlatSeqSize = kSeqLen * kSeqChannels;

enum class SvSlot : int {
  SamePreceding = 0,
  SameFollowing,
  LeftImmediate,
  LeftPreceding,
  LeftFollowing,
  RightImmediate,
  RightPreceding,
  RightFollowing,
};

enum class TvChannel : int { Y = 0, Dy, Vy, Vx };
enum class SvComponent : int { Dy = 0, Dx, Dvy, Dvx };

constexpr int channel_of(TvChannel c) { return static_cast<int>(c); }
constexpr int channel_of(SvSlot slot, SvComponent comp) {
  return kTvChannels + static_cast<int>(slot) * kSvChannels + static_cast<int>(comp);
}
std::string channel_name(int channel);

/// Row t is time step t (oldest first); columns follow the layout above.
using SeqMatrix = Eigen::Matrix<double, kSeqLen, kSeqChannels, Eigen::RowMajor>;
using StaticVector = std::array<double, kStaticDim>;

struct Observation {
  SeqMatrix seq = SeqMatrix::Zero();
  StaticVector static_features{};
  Maneuver label = Maneuver::LK;
  double ttlc = 6.0;  // s
  std::int64_t tv_id = 0;
  double t_end = 0.0;
  std::string dataset;
};

struct ExtractionParams {
  int history_frames = kHistoryFrames;
  int downsample = kDownsample;
  double prediction_window = 4.0;  // s
  double lk_ttlc = 6.0;            // s
  int lc_step_frames = 5;
  int lk_step_frames = 25;
  double sv_range = 100.0;  // m
  bool lk_halving = true;
  std::uint64_t seed = 0;
};

void validate(const ExtractionParams& params);

/// Lateral deviation normalized to [-1, 1] across the current lane:
/// -1 at the left divider, 0 on the centerline, +1 at the right divider.
double compute_dy(double y_l, double left_divider, double lane_width);

struct VehicleState {
  std::int64_t vehicle_id = 0;
  double x = 0.0;  // longitudinal
  double y = 0.0;  // lateral
  double v_x = 0.0;
  double v_y = 0.0;
  int lane_id = 1;
};

struct SvSelection {
  bool synthetic = true;
  /// The selected vehicle; for synthetic slots, the placeholder state.
  VehicleState state;
  /// Lane the slot refers to (may not exist in the geometry).
  double slot_lane_center = 0.0;
};

struct RelativeFeatures {
  double dy = 0.0, dx = 0.0, dvy = 0.0, dvx = 0.0;
  friend bool operator==(const RelativeFeatures&, const RelativeFeatures&) = default;
};

/// Eight surrounding-vehicle slots around `tv` from the vehicles present at
/// one frame (the TV itself may be among them and is ignored). Empty slots,
/// slots in missing lanes, and vehicles farther than `sv_range` are filled
/// with synthetic vehicles moving with the TV's velocity.
std::array<SvSelection, kSvSlots> select_svs(const VehicleState& tv, std::span<const VehicleState> others,
                                             const LaneGeometry& geometry, double sv_range);

/// Placeholder state for a synthetic vehicle of `slot` relative to `tv`.
VehicleState synthetic_sv(SvSlot slot, const VehicleState& tv, double slot_lane_center, double sv_range);

RelativeFeatures relative_features(const VehicleState& tv, const VehicleState& sv);

/// One-hot [class(3), left lane exists(2), right lane exists(2)].
StaticVector encode_static(VehicleClass vehicle_class, bool left_exists, bool right_exists);

struct ExtractionReport {
  std::size_t windows = 0;
  std::size_t lc_windows = 0;
  std::size_t lk_windows = 0;
  std::size_t net_zero_windows = 0;      // lane left and re-entered within the prediction window
  std::size_t multi_change_windows = 0;  // more than one lane switch inside the prediction window
  std::size_t short_tracks = 0;          // too short for a single window
  std::size_t lk_removed_by_halving = 0;
};

struct ExtractionResult {
  std::vector<Observation> observations;
  ExtractionReport report;
};

/// Sliding-window extraction of labeled observations. Windows advance by
/// lc_step_frames where the window would be labeled a lane change and by
/// lk_step_frames elsewhere.
ExtractionResult extract_observations(const std::vector<VehicleTrack>& tracks, const LaneGeometry& geometry,
                                      const ExtractionParams& params, const std::string& dataset = "");

/// Per-channel Z-score statistics, pooled over time steps and observations.
struct Scaler {
  static constexpr double kStdFloor = 1e-8;
  Eigen::Matrix<double, kSeqChannels, 1> mean = Eigen::Matrix<double, kSeqChannels, 1>::Zero();
  Eigen::Matrix<double, kSeqChannels, 1> std = Eigen::Matrix<double, kSeqChannels, 1>::Ones();
  std::array<bool, kSeqChannels> floored{};

  friend bool operator==(const Scaler& a, const Scaler& b) {
    return a.mean == b.mean && a.std == b.std && a.floored == b.floored;
  }
};

/// Fits mean and biased standard deviation; channels with std below the
/// floor are marked in `floored`. Throws DataError on an empty set.
Scaler zscore_fit(std::span<const Observation> train);
Observation zscore_apply(const Scaler& scaler, Observation obs);
std::vector<Observation> zscore_apply(const Scaler& scaler, std::span<const Observation> obs);

struct Split {
  std::vector<Observation> train;
  std::vector<Observation> test;
};

/// Random vehicle-disjoint split, filling train to ~ratio of observations.
/// Throws DataError with fewer than two vehicles.
Split split_by_vehicle(std::span<const Observation> observations, double ratio, std::uint64_t seed);

struct BalancedSet {
  std::vector<Observation> balanced;
  std::vector<Observation> lk_holdout;
  std::size_t lc_removed = 0;
};

/// Trims every class to the smallest class count at random. Removed LK
/// observations are returned as the holdout. Throws DataError if a class is
/// empty.
BalancedSet balance_test_set(std::span<const Observation> test, std::uint64_t seed);

/// Keeps floor(n_LK / 2) LK observations chosen uniformly; order preserved.
std::vector<Observation> halve_lk(std::span<const Observation> observations, std::uint64_t seed);

std::array<std::size_t, kNumClasses> class_counts(std::span<const Observation> observations);

}  // namespace lcintent
