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

#include <cmath>
#include <sstream>

#include "doctest.h"
#include "lcintent/features.hpp"
#include "lcintent/synth.hpp"

using namespace lcintent;

namespace {

ScenarioConfig single_vehicle(Maneuver dir, int lane, double start, double duration) {
  ScenarioConfig c;
  c.n_lanes = 3;
  c.n_vehicles = 1;
  c.duration = 30.0;
  c.position_noise_sigma = 0.0;
  c.initial_lanes = {lane};
  c.scheduled = {{0, start, duration, dir}};
  c.seed = 5;
  return c;
}

}  // namespace

TEST_CASE("minimum-jerk profile endpoints and symmetry") {
  CHECK(min_jerk(0.0) == 0.0);
  CHECK(min_jerk(1.0) == doctest::Approx(1.0));
  CHECK(min_jerk(0.5) == doctest::Approx(0.5));
  CHECK(min_jerk(0.3) + min_jerk(0.7) == doctest::Approx(1.0));
  CHECK(min_jerk(-1.0) == 0.0);
  CHECK(min_jerk(2.0) == 1.0);
}

TEST_CASE("zero lane-change rate keeps every vehicle in its lane") {
  ScenarioConfig c;
  c.lc_rate = 0.0;
  c.n_vehicles = 12;
  c.duration = 60.0;
  const auto sc = generate_scenario(c);
  CHECK(sc.log.maneuvers.empty());
  for (std::size_t i = 0; i < sc.tracks.size(); ++i) {
    const int lane = sc.tracks[i].samples.front().lane_id;
    for (const auto& s : sc.tracks[i].samples) CHECK(s.lane_id == lane);
    for (double y : sc.clean_lateral[i]) CHECK(y == sc.geometry.at(lane).center());
  }
}

TEST_CASE("a scheduled left change moves between adjacent lane centers") {
  const auto sc = generate_scenario(single_vehicle(Maneuver::LCL, 2, 10.0, 4.0));
  REQUIRE(sc.log.maneuvers.size() == 1);
  const auto& m = sc.log.maneuvers[0];
  CHECK(m.direction == Maneuver::LCL);
  CHECK(m.start_lane == 2);
  CHECK(m.end_lane == 1);
  const auto& y = sc.clean_lateral[0];
  CHECK(y.front() == doctest::Approx(sc.geometry.at(2).center()));
  CHECK(y.back() == doctest::Approx(sc.geometry.at(1).center()));
  CHECK(sc.tracks[0].samples.front().lane_id == 2);
  CHECK(sc.tracks[0].samples.back().lane_id == 1);
  // The midpoint of a symmetric profile sits on the divider.
  CHECK(m.crossing_time == doctest::Approx(12.0).epsilon(0.01));
}

TEST_CASE("a scheduled right change increases the lane id") {
  const auto sc = generate_scenario(single_vehicle(Maneuver::LCR, 2, 5.0, 3.0));
  REQUIRE(sc.log.maneuvers.size() == 1);
  CHECK(sc.log.maneuvers[0].end_lane == 3);
  CHECK(sc.tracks[0].samples.back().lane_id == 3);
}

TEST_CASE("infeasible and overlapping maneuvers are dropped and reported") {
  auto c = single_vehicle(Maneuver::LCL, 1, 5.0, 4.0);  // no lane to the left of lane 1
  auto sc = generate_scenario(c);
  CHECK(sc.log.maneuvers.empty());
  REQUIRE(sc.log.dropped.size() == 1);

  c = single_vehicle(Maneuver::LCR, 1, 5.0, 4.0);
  c.scheduled.push_back({0, 7.0, 4.0, Maneuver::LCR});  // starts before the first one ends
  c.scheduled.push_back({0, 28.0, 4.0, Maneuver::LCR});  // runs past the scenario end
  sc = generate_scenario(c);
  CHECK(sc.log.maneuvers.size() == 1);
  CHECK(sc.log.dropped.size() == 2);
}

TEST_CASE("identical seeds give identical scenarios") {
  ScenarioConfig c;
  c.n_vehicles = 8;
  c.duration = 40.0;
  c.lc_rate = 2.0;
  c.seed = 17;
  const auto a = generate_scenario(c);
  const auto b = generate_scenario(c);
  CHECK(a.tracks == b.tracks);
  CHECK(a.log.maneuvers.size() == b.log.maneuvers.size());
  c.seed = 18;
  const auto d = generate_scenario(c);
  CHECK_FALSE(a.tracks == d.tracks);
}

TEST_CASE("logged crossings coincide with the noiseless divider crossing") {
  ScenarioConfig c;
  c.n_vehicles = 20;
  c.duration = 120.0;
  c.lc_rate = 2.0;
  c.seed = 3;
  const auto sc = generate_scenario(c);
  REQUIRE(sc.log.maneuvers.size() > 10);
  for (const auto& m : sc.log.maneuvers) {
    const auto& y = sc.clean_lateral[static_cast<std::size_t>(m.vehicle_id - 1)];
    const auto& from = sc.geometry.at(m.start_lane);
    const double divider = m.direction == Maneuver::LCL ? from.left_divider_lat : from.right_divider_lat();
    // First frame on the far side of the divider.
    std::int64_t k = static_cast<std::int64_t>(std::llround(m.start_time * kSampleRateHz));
    while (k < static_cast<std::int64_t>(y.size()) &&
           (m.direction == Maneuver::LCL ? y[static_cast<std::size_t>(k)] >= divider
                                         : y[static_cast<std::size_t>(k)] < divider)) {
      ++k;
    }
    CHECK(std::abs(static_cast<double>(k - m.crossing_frame)) <= 1.0);
    CHECK(m.crossing_time >= 0.0);
    CHECK(m.crossing_time <= c.duration);
    CHECK((m.end_lane < m.start_lane) == (m.direction == Maneuver::LCL));
  }
}

TEST_CASE("noise-free profiles have continuous velocity") {
  const double duration = 3.0;
  const double width = 3.6;
  const auto sc = generate_scenario(single_vehicle(Maneuver::LCR, 1, 6.0, duration));
  // Peak lateral acceleration of the minimum-jerk profile is 10/sqrt(3) w/T^2.
  const double a_max = 10.0 / std::sqrt(3.0) * width / (duration * duration);
  const auto& s = sc.tracks[0].samples;
  for (std::size_t i = 1; i < s.size(); ++i) {
    CHECK(std::abs(s[i].v_y - s[i - 1].v_y) <= a_max * kFramePeriod + 1e-9);
    CHECK(std::abs(sc.clean_lateral[0][i] - sc.clean_lateral[0][i - 1]) < 0.5);
  }
}

TEST_CASE("lane-change rate controls the lane-change observation count") {
  auto lc_count = [](double rate, std::uint64_t seed) {
    ScenarioConfig c;
    c.n_vehicles = 20;
    c.duration = 120.0;
    c.lc_rate = rate;
    c.seed = seed;
    const auto sc = generate_scenario(c);
    ExtractionParams p;
    p.lk_halving = false;
    const auto r = extract_observations(sc.tracks, sc.geometry, p);
    return static_cast<double>(r.report.lc_windows);
  };
  double base = 0.0, doubled = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    base += lc_count(0.5, seed);
    doubled += lc_count(1.0, seed);
  }
  REQUIRE(base > 0.0);
  const double ratio = doubled / base;
  CHECK(ratio > 1.5);
  CHECK(ratio < 2.5);
}

TEST_CASE("maneuver log round-trips through text") {
  ScenarioConfig c;
  c.n_vehicles = 10;
  c.lc_rate = 2.0;
  const auto sc = generate_scenario(c);
  std::stringstream ss;
  write_maneuver_log(ss, sc.log);
  const auto back = read_maneuver_log(ss);
  REQUIRE(back.maneuvers.size() == sc.log.maneuvers.size());
  for (std::size_t i = 0; i < back.maneuvers.size(); ++i) {
    CHECK(back.maneuvers[i].vehicle_id == sc.log.maneuvers[i].vehicle_id);
    CHECK(back.maneuvers[i].direction == sc.log.maneuvers[i].direction);
    CHECK(back.maneuvers[i].crossing_time == sc.log.maneuvers[i].crossing_time);
    CHECK(back.maneuvers[i].start_time == sc.log.maneuvers[i].start_time);
  }
}

TEST_CASE("invalid scenario configs are rejected") {
  ScenarioConfig c;
  c.n_lanes = 0;
  CHECK_THROWS_AS(generate_scenario(c), ConfigError);
  c = {};
  c.duration = 0.0;
  CHECK_THROWS_AS(generate_scenario(c), ConfigError);
  c = {};
  c.lc_rate = -1.0;
  CHECK_THROWS_AS(generate_scenario(c), ConfigError);
  c = {};
  c.scheduled = {{99, 1.0, 4.0, Maneuver::LCL}};
  CHECK_THROWS_AS(generate_scenario(c), ConfigError);
}
