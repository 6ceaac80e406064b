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
#include <string>
#include <vector>

#include "lcintent/common.hpp"
#include "lcintent/ingest.hpp"

namespace lcintent {

/// A lane change requested explicitly rather than drawn at random.
struct ScheduledManeuver {
  int vehicle_index = 0;
  double start_time = 0.0;  // s
  double duration = 4.0;    // s
  Maneuver direction = Maneuver::LCL;
};

struct ScenarioConfig {
  int n_lanes = 3;
  double lane_width = 3.6;
  int n_vehicles = 30;
  double duration = 120.0;  // s
  double lc_rate = 0.5;     // expected lane changes per vehicle-minute
  double speed_min = 24.0;  // m/s
  double speed_max = 32.0;
  double position_noise_sigma = 0.05;  // m
  double maneuver_min_duration = 3.0;  // s
  double maneuver_max_duration = 5.0;
  /// Minimum quiet time between two maneuvers of one vehicle.
  double maneuver_gap = 2.0;
  /// Amplitude of the smooth longitudinal speed oscillation, m/s.
  double speed_jitter = 0.3;
  /// Mean initial longitudinal spacing between vehicles sharing a lane, m.
  double mean_spacing = 35.0;
  std::uint64_t seed = 1;
  std::string dataset = "synth";
  /// Optional per-vehicle starting lane (1-based); empty draws uniformly.
  std::vector<int> initial_lanes;
  std::vector<ScheduledManeuver> scheduled;
  /// When false only `scheduled` maneuvers are generated.
  bool random_maneuvers = true;
};

struct ManeuverRecord {
  std::int64_t vehicle_id = 0;
  Maneuver direction = Maneuver::LCL;
  double crossing_time = 0.0;  // time of the first frame in the new lane
  std::int64_t crossing_frame = 0;
  int start_lane = 1;
  int end_lane = 1;
  double start_time = 0.0;
  double end_time = 0.0;
};

struct DroppedManeuver {
  std::int64_t vehicle_id = 0;
  double start_time = 0.0;
  std::string reason;
};

struct ManeuverLog {
  std::vector<ManeuverRecord> maneuvers;
  std::vector<DroppedManeuver> dropped;
};

struct Scenario {
  std::vector<VehicleTrack> tracks;
  ManeuverLog log;
  LaneGeometry geometry;
  /// Noise-free lateral positions per track, aligned with `tracks`.
  std::vector<std::vector<double>> clean_lateral;
};

/// Multi-lane highway traffic with minimum-jerk lane changes. Lane ids are
/// taken from the noisy lateral position, velocities from central
/// differences as in ingestion. Output is a pure function of the config.
/// Throws ConfigError for an invalid config.
Scenario generate_scenario(const ScenarioConfig& config);

void validate(const ScenarioConfig& config);

/// Maneuver log as delimited text:
///   vehicle_id,direction,crossing_time,crossing_frame,start_lane,end_lane,start_time,end_time
void write_maneuver_log(std::ostream& out, const ManeuverLog& log);
ManeuverLog read_maneuver_log(std::istream& in);

/// Normalized minimum-jerk profile s(u) = 10u^3 - 15u^4 + 6u^5 on [0, 1].
double min_jerk(double u);

}  // namespace lcintent
