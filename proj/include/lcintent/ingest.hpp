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
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lcintent/common.hpp"

namespace lcintent {

/// One row of a raw recording, after column mapping and unit scaling.
struct TrajectoryRecord {
  std::int64_t vehicle_id = 0;
  std::int64_t frame_id = 0;
  double lateral_pos = 0.0;       // m, across lanes (NGSIM Local_X)
  double longitudinal_pos = 0.0;  // m, along the road (NGSIM Local_Y)
  double speed = 0.0;             // m/s
  int lane_id = 1;
  VehicleClass vehicle_class = VehicleClass::Auto;
};

struct KinematicSample {
  std::int64_t frame = 0;
  double t = 0.0;    // s
  double x_l = 0.0;  // longitudinal, m
  double y_l = 0.0;  // lateral, m
  double v_x = 0.0;
  double v_y = 0.0;
  int lane_id = 1;
  VehicleClass vehicle_class = VehicleClass::Auto;

  friend bool operator==(const KinematicSample&, const KinematicSample&) = default;
};

/// A gap-free run of samples at 10 Hz. A vehicle whose recording has frame
/// gaps yields several tracks sharing `vehicle_id`, numbered by `segment`.
struct VehicleTrack {
  std::int64_t vehicle_id = 0;
  int segment = 0;
  std::vector<KinematicSample> samples;

  std::int64_t first_frame() const { return samples.empty() ? 0 : samples.front().frame; }
  std::int64_t last_frame() const { return samples.empty() ? -1 : samples.back().frame; }
  /// Sample at an absolute frame number, or nullptr if outside the track.
  const KinematicSample* at_frame(std::int64_t frame) const;

  friend bool operator==(const VehicleTrack&, const VehicleTrack&) = default;
};

/// Column names of a delimited recording. Defaults follow the NGSIM schema,
/// where Local_X is the lateral and Local_Y the longitudinal coordinate.
struct ColumnMap {
  std::string vehicle_id = "Vehicle_ID";
  std::string frame = "Frame_ID";
  std::string lateral = "Local_X";
  std::string longitudinal = "Local_Y";
  std::string speed = "v_Vel";
  std::string lane = "Lane_ID";
  std::string vehicle_class = "v_Class";
  /// Multiplier applied to positions and speed (0.3048 for NGSIM feet).
  double length_scale = 1.0;
  /// 0 selects comma or tab from the header line.
  char delimiter = 0;
};

struct RowError {
  std::size_t line = 0;
  std::string message;
};

struct RejectedSegment {
  std::int64_t vehicle_id = 0;
  std::int64_t first_frame = 0;
  std::int64_t last_frame = 0;
  std::string reason;
};

struct ParseResult {
  std::vector<VehicleTrack> tracks;
  std::vector<RowError> row_errors;
  std::vector<RejectedSegment> rejected;
};

/// Parses a delimited recording into per-vehicle tracks sorted by frame.
/// Malformed rows are reported and skipped. Tracks are split at frame gaps;
/// segments containing duplicate frames are rejected. Velocities are left at
/// v_x = speed, v_y = 0 until derive_velocities runs.
/// Throws DataError if the header lacks a mapped column.
ParseResult parse_trajectory_file(std::istream& in, const ColumnMap& columns = {});

struct SmoothingOptions {
  bool enabled = false;
  int window = 7;  // odd
  int order = 2;
};

/// Fills v_x and v_y from positions: central differences on interior
/// samples, one-sided at the endpoints. With smoothing enabled, positions
/// are first replaced by a local least-squares polynomial fit.
/// Throws DataError for tracks shorter than two samples.
VehicleTrack derive_velocities(VehicleTrack track, const SmoothingOptions& smoothing = {});

struct LaneInfo {
  int lane_id = 1;
  double left_divider_lat = 0.0;
  double lane_width = 3.6;
  bool left_exists = false;
  bool right_exists = false;

  double center() const { return left_divider_lat + lane_width / 2.0; }
  double right_divider_lat() const { return left_divider_lat + lane_width; }

  friend bool operator==(const LaneInfo&, const LaneInfo&) = default;
};

/// Lane table ordered left to right: lane ids and lateral positions both
/// increase toward the right, as in NGSIM.
class LaneGeometry {
 public:
  LaneGeometry() = default;
  /// Validates and sorts by lane id. Throws DataError on non-positive width,
  /// duplicate ids, or overlapping / unordered lanes.
  explicit LaneGeometry(std::vector<LaneInfo> lanes);

  const std::vector<LaneInfo>& lanes() const { return lanes_; }
  const LaneInfo* find(int lane_id) const;
  const LaneInfo& at(int lane_id) const;
  /// Lane whose [left, right) divider interval contains `lateral`.
  std::optional<int> lane_at(double lateral) const;
  /// Lane at `lateral`, clamped to the outermost lanes when off the road.
  int nearest_lane(double lateral) const;
  bool empty() const { return lanes_.empty(); }

  friend bool operator==(const LaneGeometry&, const LaneGeometry&) = default;

 private:
  std::vector<LaneInfo> lanes_;
};

/// Geometry of `n_lanes` equal-width lanes starting at lateral 0.
LaneGeometry uniform_geometry(int n_lanes, double lane_width);

/// Reads the line-oriented geometry config: one lane per line,
///   lane=2 left_divider=3.6 width=3.6 left_exists=1 right_exists=1
/// `#` starts a comment. Existence flags default to whether the adjacent
/// lane id is present in the table.
LaneGeometry load_lane_geometry(std::istream& in);
void write_lane_geometry(std::ostream& out, const LaneGeometry& geometry);

/// Versioned delimited-text track format:
///   # lcintent-tracks v1
///   vehicle_id,segment,frame,t,x_l,y_l,v_x,v_y,lane_id,vehicle_class
/// Reals are written in shortest round-trip form so reading back is exact.
inline constexpr int kTrackFormatVersion = 1;
void write_tracks(std::ostream& out, const std::vector<VehicleTrack>& tracks);
std::vector<VehicleTrack> read_tracks(std::istream& in);

}  // namespace lcintent
