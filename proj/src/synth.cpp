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

#include "lcintent/synth.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>

#include "detail/text.hpp"
#include "lcintent/rng.hpp"

namespace lcintent {

double min_jerk(double u) {
  u = std::clamp(u, 0.0, 1.0);
  return u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

void validate(const ScenarioConfig& c) {
  if (c.n_lanes < 1) throw ConfigError("n_lanes must be >= 1");
  if (!(c.lane_width > 0.0)) throw ConfigError("lane_width must be positive");
  if (c.n_vehicles < 0) throw ConfigError("n_vehicles must be >= 0");
  if (!(c.duration > 0.0)) throw ConfigError("duration must be positive");
  if (!(c.lc_rate >= 0.0)) throw ConfigError("lc_rate must be >= 0");
  if (!(c.speed_min >= 0.0) || c.speed_max < c.speed_min) throw ConfigError("invalid speed range");
  if (!(c.position_noise_sigma >= 0.0)) throw ConfigError("position_noise_sigma must be >= 0");
  if (!(c.maneuver_min_duration > 0.0) || c.maneuver_max_duration < c.maneuver_min_duration) {
    throw ConfigError("invalid maneuver duration range");
  }
  if (!c.initial_lanes.empty() && static_cast<int>(c.initial_lanes.size()) != c.n_vehicles) {
    throw ConfigError("initial_lanes must list one lane per vehicle");
  }
  for (int lane : c.initial_lanes) {
    if (lane < 1 || lane > c.n_lanes) throw ConfigError("initial lane out of range");
  }
  for (const auto& s : c.scheduled) {
    if (s.vehicle_index < 0 || s.vehicle_index >= c.n_vehicles) throw ConfigError("scheduled maneuver vehicle out of range");
    if (s.direction == Maneuver::LK) throw ConfigError("scheduled maneuver must be LCL or LCR");
    if (!(s.duration > 0.0)) throw ConfigError("scheduled maneuver duration must be positive");
  }
}

namespace {

struct Plan {
  double start = 0.0;
  double duration = 0.0;
  int from_lane = 1;
  int to_lane = 1;
};

// LCL moves toward smaller lateral coordinates, i.e. lower lane ids.
int target_lane(int lane, Maneuver dir) { return dir == Maneuver::LCL ? lane - 1 : lane + 1; }

}  // namespace

Scenario generate_scenario(const ScenarioConfig& config) {
  validate(config);
  Scenario scenario;
  scenario.geometry = uniform_geometry(config.n_lanes, config.lane_width);
  const auto& geo = scenario.geometry;

  const auto n_frames = static_cast<std::int64_t>(std::llround(config.duration * kSampleRateHz)) + 1;
  Rng setup = make_rng(config.seed, "synth-setup");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double lane_span = std::max(1.0, static_cast<double>(config.n_vehicles) / config.n_lanes) * config.mean_spacing;

  for (int vi = 0; vi < config.n_vehicles; ++vi) {
    const std::int64_t vid = vi + 1;
    // Fixed draw order per vehicle keeps the stream layout stable.
    const double lane_draw = unit(setup);
    const double x0 = unit(setup) * lane_span;
    const double v0 = config.speed_min + unit(setup) * (config.speed_max - config.speed_min);
    const double period = 20.0 + 40.0 * unit(setup);
    const double phase = 2.0 * std::numbers::pi * unit(setup);
    const double class_draw = unit(setup);
    int lane = config.initial_lanes.empty()
                   ? 1 + std::min(config.n_lanes - 1, static_cast<int>(lane_draw * config.n_lanes))
                   : config.initial_lanes[static_cast<std::size_t>(vi)];
    const VehicleClass vclass =
        class_draw < 0.03 ? VehicleClass::Motorcycle : (class_draw < 0.10 ? VehicleClass::Truck : VehicleClass::Auto);

    struct Proposal {
      double start, duration;
      std::optional<Maneuver> direction;  // nullopt: choose among feasible
      double direction_draw;
    };
    std::vector<Proposal> proposals;
    for (const auto& s : config.scheduled) {
      if (s.vehicle_index == vi) proposals.push_back({s.start_time, s.duration, s.direction, 0.0});
    }
    if (proposals.empty() && config.random_maneuvers && config.lc_rate > 0.0) {
      Rng mrng = make_rng(config.seed, "synth-maneuvers", static_cast<std::uint64_t>(vid));
      std::exponential_distribution<double> arrival(config.lc_rate / 60.0);
      std::uniform_real_distribution<double> dur(config.maneuver_min_duration, config.maneuver_max_duration);
      std::uniform_real_distribution<double> u01(0.0, 1.0);
      double t = arrival(mrng);
      while (t < config.duration) {
        const double d = dur(mrng);
        proposals.push_back({t, d, std::nullopt, u01(mrng)});
        t += arrival(mrng);
      }
    }
    std::stable_sort(proposals.begin(), proposals.end(),
                     [](const Proposal& a, const Proposal& b) { return a.start < b.start; });

    std::vector<Plan> plans;
    int cur_lane = lane;
    double free_at = -1e300;
    for (const auto& p : proposals) {
      auto drop = [&](std::string reason) { scenario.log.dropped.push_back({vid, p.start, std::move(reason)}); };
      if (p.start < 0.0 || p.start + p.duration > config.duration - kFramePeriod) {
        drop("maneuver does not fit inside the scenario duration");
        continue;
      }
      if (p.start < free_at) {
        drop("overlaps a previous maneuver of the same vehicle");
        continue;
      }
      const bool left_ok = cur_lane > 1;
      const bool right_ok = cur_lane < config.n_lanes;
      Maneuver dir;
      if (p.direction) {
        dir = *p.direction;
        if ((dir == Maneuver::LCL && !left_ok) || (dir == Maneuver::LCR && !right_ok)) {
          drop("no adjacent lane in the requested direction");
          continue;
        }
      } else if (left_ok && right_ok) {
        dir = p.direction_draw < 0.5 ? Maneuver::LCL : Maneuver::LCR;
      } else if (left_ok) {
        dir = Maneuver::LCL;
      } else if (right_ok) {
        dir = Maneuver::LCR;
      } else {
        drop("single-lane road");
        continue;
      }
      const int next = target_lane(cur_lane, dir);
      plans.push_back({p.start, p.duration, cur_lane, next});
      cur_lane = next;
      free_at = p.start + p.duration + config.maneuver_gap;
    }

    VehicleTrack track;
    track.vehicle_id = vid;
    track.samples.resize(static_cast<std::size_t>(n_frames));
    std::vector<double> clean(static_cast<std::size_t>(n_frames));
    Rng noise_rng = make_rng(config.seed, "synth-noise", static_cast<std::uint64_t>(vid));
    std::normal_distribution<double> noise(0.0, 1.0);
    const double amp = config.speed_jitter;
    const double omega = 2.0 * std::numbers::pi / period;

    std::size_t plan_idx = 0;
    int lane_now = lane;
    std::vector<std::optional<std::int64_t>> crossing(plans.size());
    for (std::int64_t k = 0; k < n_frames; ++k) {
      const double t = static_cast<double>(k) * kFramePeriod;
      while (plan_idx < plans.size() && t >= plans[plan_idx].start + plans[plan_idx].duration) {
        lane_now = plans[plan_idx].to_lane;
        ++plan_idx;
      }
      double y = geo.at(lane_now).center();
      if (plan_idx < plans.size() && t >= plans[plan_idx].start) {
        const auto& pl = plans[plan_idx];
        const double a = geo.at(pl.from_lane).center();
        const double b = geo.at(pl.to_lane).center();
        y = a + (b - a) * min_jerk((t - pl.start) / pl.duration);
        if (!crossing[plan_idx] && geo.nearest_lane(y) == pl.to_lane) crossing[plan_idx] = k;
      }
      const double x = x0 + v0 * t + amp / omega * (std::cos(phase) - std::cos(omega * t + phase));
      const double sigma = config.position_noise_sigma;
      const double nx = sigma > 0.0 ? sigma * noise(noise_rng) : 0.0;
      const double ny = sigma > 0.0 ? sigma * noise(noise_rng) : 0.0;
      auto& s = track.samples[static_cast<std::size_t>(k)];
      s.frame = k;
      s.t = t;
      s.x_l = x + nx;
      s.y_l = y + ny;
      s.lane_id = geo.nearest_lane(s.y_l);
      s.vehicle_class = vclass;
      clean[static_cast<std::size_t>(k)] = y;
    }
    for (std::size_t i = 0; i < plans.size(); ++i) {
      const auto& pl = plans[i];
      ManeuverRecord rec;
      rec.vehicle_id = vid;
      rec.direction = pl.to_lane < pl.from_lane ? Maneuver::LCL : Maneuver::LCR;
      rec.crossing_frame = crossing[i].value_or(0);
      rec.crossing_time = static_cast<double>(rec.crossing_frame) * kFramePeriod;
      rec.start_lane = pl.from_lane;
      rec.end_lane = pl.to_lane;
      rec.start_time = pl.start;
      rec.end_time = pl.start + pl.duration;
      scenario.log.maneuvers.push_back(rec);
    }
    scenario.tracks.push_back(derive_velocities(std::move(track)));
    scenario.clean_lateral.push_back(std::move(clean));
  }
  return scenario;
}

void write_maneuver_log(std::ostream& out, const ManeuverLog& log) {
  using detail::format_double;
  out << "vehicle_id,direction,crossing_time,crossing_frame,start_lane,end_lane,start_time,end_time\n";
  for (const auto& m : log.maneuvers) {
    out << m.vehicle_id << ',' << to_string(m.direction) << ',' << format_double(m.crossing_time) << ','
        << m.crossing_frame << ',' << m.start_lane << ',' << m.end_lane << ',' << format_double(m.start_time) << ','
        << format_double(m.end_time) << '\n';
  }
}

ManeuverLog read_maneuver_log(std::istream& in) {
  ManeuverLog log;
  std::string line;
  std::getline(in, line);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split(line, ',');
    auto bad = [&]() { return DataError("maneuver log line " + std::to_string(line_no) + ": malformed row"); };
    if (f.size() != 8) throw bad();
    ManeuverRecord m;
    auto vid = detail::parse_int(f[0]);
    auto dir = parse_maneuver(detail::trim(f[1]));
    auto ct = detail::parse_double(f[2]);
    auto cf = detail::parse_int(f[3]);
    auto sl = detail::parse_int(f[4]);
    auto el = detail::parse_int(f[5]);
    auto st = detail::parse_double(f[6]);
    auto et = detail::parse_double(f[7]);
    if (!vid || !dir || !ct || !cf || !sl || !el || !st || !et) throw bad();
    m.vehicle_id = *vid;
    m.direction = *dir;
    m.crossing_time = *ct;
    m.crossing_frame = *cf;
    m.start_lane = static_cast<int>(*sl);
    m.end_lane = static_cast<int>(*el);
    m.start_time = *st;
    m.end_time = *et;
    log.maneuvers.push_back(m);
  }
  return log;
}

}  // namespace lcintent
