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
#include "lcintent/ingest.hpp"
#include "lcintent/synth.hpp"

using namespace lcintent;

namespace {

const char* kHeader = "Vehicle_ID,Frame_ID,Local_X,Local_Y,v_Vel,Lane_ID,v_Class\n";

std::string row(int id, int frame, double lat, double lon, double speed = 30.0, int lane = 2, int cls = 2) {
  std::ostringstream s;
  s << id << ',' << frame << ',' << lat << ',' << lon << ',' << speed << ',' << lane << ',' << cls << '\n';
  return s.str();
}

ParseResult parse(const std::string& text, const ColumnMap& map = {}) {
  std::istringstream in(text);
  return parse_trajectory_file(in, map);
}

VehicleTrack track_from_lateral(const std::vector<double>& ys) {
  VehicleTrack t;
  t.vehicle_id = 1;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    KinematicSample s;
    s.frame = static_cast<std::int64_t>(i);
    s.t = static_cast<double>(i) * kFramePeriod;
    s.y_l = ys[i];
    s.x_l = 0.0;
    t.samples.push_back(s);
  }
  return t;
}

}  // namespace

TEST_CASE("consecutive frames form one track") {
  const auto r = parse(std::string(kHeader) + row(7, 1, 5.0, 10.0) + row(7, 2, 5.0, 13.0) + row(7, 3, 5.0, 16.0));
  REQUIRE(r.tracks.size() == 1);
  CHECK(r.tracks[0].vehicle_id == 7);
  CHECK(r.tracks[0].samples.size() == 3);
  CHECK(r.row_errors.empty());
  CHECK(r.tracks[0].samples[1].x_l == 13.0);  // Local_Y is longitudinal
  CHECK(r.tracks[0].samples[1].y_l == 5.0);   // Local_X is lateral
  CHECK(r.tracks[0].samples[0].t == doctest::Approx(0.1));
}

TEST_CASE("frame gaps split a vehicle into segments") {
  const auto r = parse(std::string(kHeader) + row(7, 1, 5, 0) + row(7, 2, 5, 3) + row(7, 9, 5, 24) + row(7, 10, 5, 27));
  REQUIRE(r.tracks.size() == 2);
  CHECK(r.tracks[0].first_frame() == 1);
  CHECK(r.tracks[0].last_frame() == 2);
  CHECK(r.tracks[1].first_frame() == 9);
  CHECK(r.tracks[1].last_frame() == 10);
  CHECK(r.tracks[0].segment == 0);
  CHECK(r.tracks[1].segment == 1);
  for (const auto& t : r.tracks) {
    for (std::size_t i = 1; i < t.samples.size(); ++i) {
      CHECK(t.samples[i].frame - t.samples[i - 1].frame == 1);
      CHECK(t.samples[i].t - t.samples[i - 1].t == doctest::Approx(0.1));
    }
  }
}

TEST_CASE("rows arrive unsorted and interleaved") {
  const auto r = parse(std::string(kHeader) + row(2, 5, 1, 0) + row(1, 2, 1, 0) + row(2, 4, 1, 0) + row(1, 1, 1, 0));
  REQUIRE(r.tracks.size() == 2);
  CHECK(r.tracks[0].vehicle_id == 1);
  CHECK(r.tracks[0].samples[0].frame == 1);
  CHECK(r.tracks[1].samples[0].frame == 4);
}

TEST_CASE("malformed row is reported with its line number") {
  std::string text = std::string(kHeader) + row(7, 1, 5, 0) + "7,2,5.0,3.0,30,abc,2\n" + row(7, 3, 5, 6);
  const auto r = parse(text);
  REQUIRE(r.row_errors.size() == 1);
  CHECK(r.row_errors[0].line == 3);
  // The surviving rows 1 and 3 are not adjacent, so they form two segments.
  std::size_t samples = 0;
  for (const auto& t : r.tracks) samples += t.samples.size();
  CHECK(samples == 2);
}

TEST_CASE("short rows, unknown classes and non-finite values are row errors") {
  const auto r = parse(std::string(kHeader) + "7,1,5\n" + row(7, 2, 5, 0, 30, 2, 9) + "7,3,nan,0,30,2,2\n" +
                       row(7, 4, 5, 0));
  CHECK(r.row_errors.size() == 3);
  REQUIRE(r.tracks.size() == 1);
  CHECK(r.tracks[0].samples.size() == 1);
}

TEST_CASE("duplicate frames reject the segment") {
  const auto r = parse(std::string(kHeader) + row(3, 1, 5, 0) + row(3, 2, 5, 3) + row(3, 2, 5, 3) + row(3, 3, 5, 6));
  CHECK(r.tracks.empty());
  REQUIRE(r.rejected.size() == 1);
  CHECK(r.rejected[0].vehicle_id == 3);
}

TEST_CASE("missing header column is a data error") {
  CHECK_THROWS_AS(parse("Vehicle_ID,Frame_ID\n1,1\n"), DataError);
  CHECK_THROWS_AS(parse(""), DataError);
}

TEST_CASE("tab-delimited input and custom column names with unit scaling") {
  ColumnMap map;
  map.lateral = "lat";
  map.longitudinal = "lon";
  map.length_scale = 0.3048;
  const std::string text =
      "Vehicle_ID\tFrame_ID\tlat\tlon\tv_Vel\tLane_ID\tv_Class\n"
      "4\t10\t10\t100\t50\t1\t3\n"
      "4\t11\t10\t105\t50\t1\t3\n";
  const auto r = parse(text, map);
  REQUIRE(r.tracks.size() == 1);
  CHECK(r.tracks[0].samples[0].y_l == doctest::Approx(3.048));
  CHECK(r.tracks[0].samples[0].x_l == doctest::Approx(30.48));
  CHECK(r.tracks[0].samples[0].v_x == doctest::Approx(15.24));
  CHECK(r.tracks[0].samples[0].vehicle_class == VehicleClass::Truck);
}

TEST_CASE("central differences for velocities") {
  SUBCASE("linear motion") {
    const auto t = derive_velocities(track_from_lateral({0.0, 0.1, 0.2}));
    CHECK(t.samples[1].v_y == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(t.samples[0].v_y == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(t.samples[2].v_y == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("constant position") {
    const auto t = derive_velocities(track_from_lateral({2.0, 2.0, 2.0, 2.0}));
    for (const auto& s : t.samples) CHECK(s.v_y == 0.0);
  }
  SUBCASE("central difference spans two frames") {
    const auto t = derive_velocities(track_from_lateral({0.0, 0.0, 0.2}));
    CHECK(t.samples[1].v_y == doctest::Approx((0.2 - 0.0) / 0.2));
  }
  SUBCASE("fewer than two samples") {
    CHECK_THROWS_AS(derive_velocities(track_from_lateral({1.0})), DataError);
  }
}

TEST_CASE("velocity recovery on analytic profiles") {
  std::vector<double> lin, quint;
  const double width = 3.6;
  const double duration = 3.0;
  for (int i = 0; i <= 60; ++i) {
    const double t = i * kFramePeriod;
    lin.push_back(1.5 * t - 0.25);
    quint.push_back(width * min_jerk(t / duration));
  }
  const auto a = derive_velocities(track_from_lateral(lin));
  double lin_err = 0.0;
  for (const auto& s : a.samples) lin_err = std::max(lin_err, std::abs(s.v_y - 1.5));
  CHECK(lin_err < 1e-6);

  const auto b = derive_velocities(track_from_lateral(quint));
  double q_err = 0.0;
  for (std::size_t i = 1; i + 1 < b.samples.size(); ++i) {
    const double u = b.samples[i].t / duration;
    const double u_c = std::clamp(u, 0.0, 1.0);
    const double exact = width / duration * (30 * u_c * u_c - 60 * u_c * u_c * u_c + 30 * u_c * u_c * u_c * u_c);
    q_err = std::max(q_err, std::abs(b.samples[i].v_y - exact));
  }
  CHECK(q_err < 0.05);
}

TEST_CASE("polynomial smoothing reproduces low-order polynomials") {
  std::vector<double> quad;
  for (int i = 0; i < 30; ++i) {
    const double t = i * kFramePeriod;
    quad.push_back(0.5 * t * t + t);
  }
  const auto plain = derive_velocities(track_from_lateral(quad));
  const auto smooth = derive_velocities(track_from_lateral(quad), SmoothingOptions{true, 7, 2});
  for (std::size_t i = 0; i < quad.size(); ++i) {
    CHECK(smooth.samples[i].v_y == doctest::Approx(plain.samples[i].v_y).epsilon(1e-9));
  }
}

TEST_CASE("smoothing reduces noise-driven velocity spread") {
  std::vector<double> noisy;
  for (int i = 0; i < 200; ++i) noisy.push_back((i % 2 == 0) ? 0.05 : -0.05);
  const auto plain = derive_velocities(track_from_lateral(noisy));
  const auto smooth = derive_velocities(track_from_lateral(noisy), SmoothingOptions{true, 9, 2});
  double sp = 0.0, ss = 0.0;
  for (std::size_t i = 0; i < noisy.size(); ++i) {
    sp += plain.samples[i].v_y * plain.samples[i].v_y;
    ss += smooth.samples[i].v_y * smooth.samples[i].v_y;
  }
  CHECK(ss < sp);
}

TEST_CASE("lane geometry loading and validation") {
  SUBCASE("center follows divider and width") {
    std::istringstream in("lane=1 left_divider=0.0 width=3.6\n");
    const auto g = load_lane_geometry(in);
    CHECK(g.at(1).center() == doctest::Approx(1.8));
    CHECK_FALSE(g.at(1).left_exists);
    CHECK_FALSE(g.at(1).right_exists);
  }
  SUBCASE("existence defaults from neighbours, comments ignored") {
    std::istringstream in(
        "# three lanes\n"
        "lane=1 left_divider=0 width=3.6\n"
        "lane=2 left_divider=3.6 width=3.6  # middle\n"
        "lane=3 left_divider=7.2 width=3.6 right_exists=1\n");
    const auto g = load_lane_geometry(in);
    CHECK_FALSE(g.at(1).left_exists);
    CHECK(g.at(1).right_exists);
    CHECK(g.at(2).left_exists);
    CHECK(g.at(2).right_exists);
    CHECK(g.at(3).right_exists);  // explicit on-ramp style override
    CHECK(g.lane_at(5.0) == 2);
    CHECK_FALSE(g.lane_at(-0.1).has_value());
    CHECK(g.nearest_lane(-0.1) == 1);
    CHECK(g.nearest_lane(50.0) == 3);
  }
  SUBCASE("identical dividers overlap") {
    std::istringstream in("lane=1 left_divider=0 width=3.6\nlane=2 left_divider=0 width=3.6\n");
    CHECK_THROWS_AS(load_lane_geometry(in), DataError);
  }
  SUBCASE("negative width") {
    std::istringstream in("lane=1 left_divider=0 width=-1\n");
    CHECK_THROWS_AS(load_lane_geometry(in), DataError);
  }
  SUBCASE("unordered lanes") {
    CHECK_THROWS_AS(LaneGeometry({{1, 3.6, 3.6, false, true}, {2, 0.0, 3.6, true, false}}), DataError);
  }
}

TEST_CASE("geometry text round-trip") {
  const auto g = uniform_geometry(4, 3.7);
  std::stringstream ss;
  write_lane_geometry(ss, g);
  CHECK(load_lane_geometry(ss) == g);
}

TEST_CASE("track text format round-trips bit-exactly") {
  ScenarioConfig cfg;
  cfg.n_vehicles = 4;
  cfg.duration = 20.0;
  cfg.seed = 99;
  const auto sc = generate_scenario(cfg);
  std::stringstream ss;
  write_tracks(ss, sc.tracks);
  const auto back = read_tracks(ss);
  CHECK(back == sc.tracks);
}

TEST_CASE("track reader rejects unknown versions") {
  std::istringstream in("# lcintent-tracks v9\nvehicle_id,segment,frame,t,x_l,y_l,v_x,v_y,lane_id,vehicle_class\n");
  CHECK_THROWS_AS(read_tracks(in), ConfigError);
}

TEST_CASE("geometry without lanes is rejected") {
  std::istringstream in("# nothing here\n\n");
  CHECK_THROWS_AS(load_lane_geometry(in), DataError);
}
