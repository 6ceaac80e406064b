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

#include "lcintent/ingest.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "detail/text.hpp"

namespace lcintent {

using detail::format_double;
using detail::parse_double;
using detail::parse_int;

const KinematicSample* VehicleTrack::at_frame(std::int64_t frame) const {
  if (samples.empty() || frame < first_frame() || frame > last_frame()) return nullptr;
  return &samples[static_cast<std::size_t>(frame - first_frame())];
}

namespace {

std::size_t column_index(const std::vector<std::string_view>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (detail::trim(header[i]) == name) return i;
  }
  throw DataError("trajectory header has no column '" + name + "'");
}

bool finite(double v) { return std::isfinite(v); }

}  // namespace

ParseResult parse_trajectory_file(std::istream& in, const ColumnMap& columns) {
  ParseResult result;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!detail::trim(line).empty()) break;
  }
  if (detail::trim(line).empty()) throw DataError("trajectory file is empty");

  char delim = columns.delimiter;
  if (delim == 0) delim = line.find('\t') != std::string::npos ? '\t' : ',';
  const auto header = detail::split(line, delim);
  const std::size_t c_id = column_index(header, columns.vehicle_id);
  const std::size_t c_frame = column_index(header, columns.frame);
  const std::size_t c_lat = column_index(header, columns.lateral);
  const std::size_t c_lon = column_index(header, columns.longitudinal);
  const std::size_t c_speed = column_index(header, columns.speed);
  const std::size_t c_lane = column_index(header, columns.lane);
  const std::size_t c_class = column_index(header, columns.vehicle_class);
  const std::size_t needed = std::max({c_id, c_frame, c_lat, c_lon, c_speed, c_lane, c_class}) + 1;

  std::map<std::int64_t, std::vector<TrajectoryRecord>> by_vehicle;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split(line, delim);
    auto fail = [&](std::string msg) { result.row_errors.push_back({line_no, std::move(msg)}); };
    if (fields.size() < needed) {
      fail("expected at least " + std::to_string(needed) + " fields, got " + std::to_string(fields.size()));
      continue;
    }
    const auto id = parse_int(fields[c_id]);
    const auto frame = parse_int(fields[c_frame]);
    const auto lat = parse_double(fields[c_lat]);
    const auto lon = parse_double(fields[c_lon]);
    const auto speed = parse_double(fields[c_speed]);
    const auto lane = parse_int(fields[c_lane]);
    const auto cls = parse_int(fields[c_class]);
    if (!id) { fail("non-numeric " + columns.vehicle_id); continue; }
    if (!frame) { fail("non-numeric " + columns.frame); continue; }
    if (!lat || !finite(*lat)) { fail("non-numeric " + columns.lateral); continue; }
    if (!lon || !finite(*lon)) { fail("non-numeric " + columns.longitudinal); continue; }
    if (!speed || !finite(*speed)) { fail("non-numeric " + columns.speed); continue; }
    if (!lane) { fail("non-numeric " + columns.lane); continue; }
    if (!cls) { fail("non-numeric " + columns.vehicle_class); continue; }
    if (*speed < 0.0) { fail("negative speed"); continue; }
    if (*lane < 1) { fail("lane id must be >= 1"); continue; }
    const auto vclass = vehicle_class_from_code(*cls);
    if (!vclass) { fail("unknown vehicle class code " + std::to_string(*cls)); continue; }

    TrajectoryRecord rec;
    rec.vehicle_id = *id;
    rec.frame_id = *frame;
    rec.lateral_pos = *lat * columns.length_scale;
    rec.longitudinal_pos = *lon * columns.length_scale;
    rec.speed = *speed * columns.length_scale;
    rec.lane_id = static_cast<int>(*lane);
    rec.vehicle_class = *vclass;
    by_vehicle[rec.vehicle_id].push_back(rec);
  }

  for (auto& [vid, recs] : by_vehicle) {
    std::stable_sort(recs.begin(), recs.end(),
                     [](const TrajectoryRecord& a, const TrajectoryRecord& b) { return a.frame_id < b.frame_id; });
    int segment = 0;
    std::size_t start = 0;
    while (start < recs.size()) {
      std::size_t end = start + 1;
      bool duplicate = false;
      while (end < recs.size() && recs[end].frame_id - recs[end - 1].frame_id <= 1) {
        if (recs[end].frame_id == recs[end - 1].frame_id) duplicate = true;
        ++end;
      }
      if (duplicate) {
        result.rejected.push_back(
            {vid, recs[start].frame_id, recs[end - 1].frame_id, "duplicate frames give non-constant spacing"});
      } else {
        VehicleTrack track;
        track.vehicle_id = vid;
        track.segment = segment++;
        track.samples.reserve(end - start);
        for (std::size_t i = start; i < end; ++i) {
          const auto& r = recs[i];
          KinematicSample s;
          s.frame = r.frame_id;
          s.t = static_cast<double>(r.frame_id) * kFramePeriod;
          s.x_l = r.longitudinal_pos;
          s.y_l = r.lateral_pos;
          s.v_x = r.speed;
          s.v_y = 0.0;
          s.lane_id = r.lane_id;
          s.vehicle_class = r.vehicle_class;
          track.samples.push_back(s);
        }
        result.tracks.push_back(std::move(track));
      }
      start = end;
    }
  }
  return result;
}

namespace {

// Local least-squares polynomial fit evaluated at each sample. Near the ends
// the window is shifted inward rather than shrunk, keeping the fit order.
std::vector<double> polynomial_smooth(const std::vector<double>& values, int window, int order) {
  const int n = static_cast<int>(values.size());
  if (window % 2 == 0) ++window;
  window = std::min(window, n % 2 == 0 ? n - 1 : n);
  order = std::min(order, window - 1);
  if (window < 3 || order < 1) return values;
  const int half = window / 2;
  Eigen::MatrixXd basis(window, order + 1);
  Eigen::VectorXd rhs(window);
  std::vector<double> out(values.size());
  for (int i = 0; i < n; ++i) {
    const int lo = std::clamp(i - half, 0, n - window);
    for (int j = 0; j < window; ++j) {
      const double u = static_cast<double>(lo + j - i);
      double p = 1.0;
      for (int k = 0; k <= order; ++k) {
        basis(j, k) = p;
        p *= u;
      }
      rhs(j) = values[static_cast<std::size_t>(lo + j)];
    }
    const Eigen::VectorXd coeffs = basis.colPivHouseholderQr().solve(rhs);
    out[static_cast<std::size_t>(i)] = coeffs(0);
  }
  return out;
}

std::vector<double> differentiate(const std::vector<double>& v, double dt) {
  const std::size_t n = v.size();
  std::vector<double> d(n);
  d[0] = (v[1] - v[0]) / dt;
  d[n - 1] = (v[n - 1] - v[n - 2]) / dt;
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (v[i + 1] - v[i - 1]) / (2.0 * dt);
  return d;
}

}  // namespace

VehicleTrack derive_velocities(VehicleTrack track, const SmoothingOptions& smoothing) {
  const std::size_t n = track.samples.size();
  if (n < 2) {
    throw DataError("vehicle " + std::to_string(track.vehicle_id) + ": need at least 2 samples to derive velocities");
  }
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = track.samples[i].x_l;
    ys[i] = track.samples[i].y_l;
  }
  if (smoothing.enabled) {
    xs = polynomial_smooth(xs, smoothing.window, smoothing.order);
    ys = polynomial_smooth(ys, smoothing.window, smoothing.order);
  }
  const auto vx = differentiate(xs, kFramePeriod);
  const auto vy = differentiate(ys, kFramePeriod);
  for (std::size_t i = 0; i < n; ++i) {
    track.samples[i].v_x = vx[i];
    track.samples[i].v_y = vy[i];
  }
  return track;
}

LaneGeometry::LaneGeometry(std::vector<LaneInfo> lanes) : lanes_(std::move(lanes)) {
  std::sort(lanes_.begin(), lanes_.end(), [](const LaneInfo& a, const LaneInfo& b) { return a.lane_id < b.lane_id; });
  for (std::size_t i = 0; i < lanes_.size(); ++i) {
    const auto& l = lanes_[i];
    if (!(l.lane_width > 0.0) || !std::isfinite(l.lane_width) || !std::isfinite(l.left_divider_lat)) {
      throw DataError("lane " + std::to_string(l.lane_id) + ": width must be positive and finite");
    }
    if (i > 0) {
      const auto& prev = lanes_[i - 1];
      if (prev.lane_id == l.lane_id) throw DataError("duplicate lane id " + std::to_string(l.lane_id));
      if (l.left_divider_lat < prev.right_divider_lat() - 1e-9) {
        throw DataError("lanes " + std::to_string(prev.lane_id) + " and " + std::to_string(l.lane_id) +
                        " overlap or are out of lateral order");
      }
    }
  }
}

const LaneInfo* LaneGeometry::find(int lane_id) const {
  auto it = std::lower_bound(lanes_.begin(), lanes_.end(), lane_id,
                             [](const LaneInfo& l, int id) { return l.lane_id < id; });
  if (it == lanes_.end() || it->lane_id != lane_id) return nullptr;
  return &*it;
}

const LaneInfo& LaneGeometry::at(int lane_id) const {
  const LaneInfo* l = find(lane_id);
  if (!l) throw DataError("lane id " + std::to_string(lane_id) + " not in geometry");
  return *l;
}

std::optional<int> LaneGeometry::lane_at(double lateral) const {
  for (const auto& l : lanes_) {
    if (lateral >= l.left_divider_lat && lateral < l.right_divider_lat()) return l.lane_id;
  }
  return std::nullopt;
}

int LaneGeometry::nearest_lane(double lateral) const {
  if (lanes_.empty()) throw DataError("empty lane geometry");
  if (auto id = lane_at(lateral)) return *id;
  const LaneInfo* best = &lanes_.front();
  double best_d = std::abs(lateral - best->center());
  for (const auto& l : lanes_) {
    const double d = std::abs(lateral - l.center());
    if (d < best_d) {
      best_d = d;
      best = &l;
    }
  }
  return best->lane_id;
}

LaneGeometry uniform_geometry(int n_lanes, double lane_width) {
  std::vector<LaneInfo> lanes;
  for (int k = 1; k <= n_lanes; ++k) {
    LaneInfo l;
    l.lane_id = k;
    l.left_divider_lat = (k - 1) * lane_width;
    l.lane_width = lane_width;
    l.left_exists = k > 1;
    l.right_exists = k < n_lanes;
    lanes.push_back(l);
  }
  return LaneGeometry(std::move(lanes));
}

namespace {

bool parse_flag(std::string_view v, std::size_t line_no) {
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw DataError("geometry line " + std::to_string(line_no) + ": invalid boolean '" + std::string(v) + "'");
}

}  // namespace

LaneGeometry load_lane_geometry(std::istream& in) {
  struct Pending {
    LaneInfo info;
    std::optional<bool> left, right;
  };
  std::vector<Pending> pending;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view body = line;
    if (auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
    const auto toks = detail::tokens(body);
    if (toks.empty()) continue;
    Pending p;
    bool has_id = false, has_div = false, has_width = false;
    for (auto tok : toks) {
      const auto eq = tok.find('=');
      if (eq == std::string_view::npos) {
        throw DataError("geometry line " + std::to_string(line_no) + ": expected key=value, got '" +
                        std::string(tok) + "'");
      }
      const auto key = tok.substr(0, eq);
      const auto value = tok.substr(eq + 1);
      auto number = [&]() {
        auto v = parse_double(value);
        if (!v) throw DataError("geometry line " + std::to_string(line_no) + ": non-numeric " + std::string(key));
        return *v;
      };
      if (key == "lane") {
        auto v = parse_int(value);
        if (!v || *v < 1) throw DataError("geometry line " + std::to_string(line_no) + ": invalid lane id");
        p.info.lane_id = static_cast<int>(*v);
        has_id = true;
      } else if (key == "left_divider") {
        p.info.left_divider_lat = number();
        has_div = true;
      } else if (key == "width") {
        p.info.lane_width = number();
        has_width = true;
      } else if (key == "left_exists") {
        p.left = parse_flag(value, line_no);
      } else if (key == "right_exists") {
        p.right = parse_flag(value, line_no);
      } else {
        throw DataError("geometry line " + std::to_string(line_no) + ": unknown key '" + std::string(key) + "'");
      }
    }
    if (!has_id || !has_div || !has_width) {
      throw DataError("geometry line " + std::to_string(line_no) + ": lane, left_divider and width are required");
    }
    pending.push_back(p);
  }
  if (pending.empty()) throw DataError("geometry file lists no lanes");
  auto has_lane = [&](int id) {
    return std::any_of(pending.begin(), pending.end(), [id](const Pending& p) { return p.info.lane_id == id; });
  };
  std::vector<LaneInfo> lanes;
  for (auto& p : pending) {
    p.info.left_exists = p.left.value_or(has_lane(p.info.lane_id - 1));
    p.info.right_exists = p.right.value_or(has_lane(p.info.lane_id + 1));
    lanes.push_back(p.info);
  }
  return LaneGeometry(std::move(lanes));
}

void write_lane_geometry(std::ostream& out, const LaneGeometry& geometry) {
  out << "# lcintent lane geometry v1\n";
  for (const auto& l : geometry.lanes()) {
    out << "lane=" << l.lane_id << " left_divider=" << format_double(l.left_divider_lat)
        << " width=" << format_double(l.lane_width) << " left_exists=" << (l.left_exists ? 1 : 0)
        << " right_exists=" << (l.right_exists ? 1 : 0) << '\n';
  }
}

namespace {
constexpr std::string_view kTrackMagic = "# lcintent-tracks v";
constexpr std::string_view kTrackHeader = "vehicle_id,segment,frame,t,x_l,y_l,v_x,v_y,lane_id,vehicle_class";
}  // namespace

void write_tracks(std::ostream& out, const std::vector<VehicleTrack>& tracks) {
  out << kTrackMagic << kTrackFormatVersion << '\n' << kTrackHeader << '\n';
  for (const auto& tr : tracks) {
    for (const auto& s : tr.samples) {
      out << tr.vehicle_id << ',' << tr.segment << ',' << s.frame << ',' << format_double(s.t) << ','
          << format_double(s.x_l) << ',' << format_double(s.y_l) << ',' << format_double(s.v_x) << ','
          << format_double(s.v_y) << ',' << s.lane_id << ',' << static_cast<int>(s.vehicle_class) << '\n';
    }
  }
}

std::vector<VehicleTrack> read_tracks(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind(kTrackMagic, 0) != 0) {
    throw DataError("not an lcintent track file (missing version line)");
  }
  const auto version = parse_int(std::string_view(line).substr(kTrackMagic.size()));
  if (!version || *version != kTrackFormatVersion) {
    throw ConfigError("unsupported track format version in '" + line + "'");
  }
  if (!std::getline(in, line) || detail::trim(line) != kTrackHeader) {
    throw DataError("track file header mismatch");
  }
  std::vector<VehicleTrack> tracks;
  std::size_t line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split(line, ',');
    auto bad = [&]() { return DataError("track file line " + std::to_string(line_no) + ": malformed row"); };
    if (f.size() != 10) throw bad();
    const auto vid = parse_int(f[0]);
    const auto seg = parse_int(f[1]);
    const auto frame = parse_int(f[2]);
    const auto t = parse_double(f[3]);
    const auto x = parse_double(f[4]);
    const auto y = parse_double(f[5]);
    const auto vx = parse_double(f[6]);
    const auto vy = parse_double(f[7]);
    const auto lane = parse_int(f[8]);
    const auto cls = parse_int(f[9]);
    if (!vid || !seg || !frame || !t || !x || !y || !vx || !vy || !lane || !cls) throw bad();
    const auto vclass = vehicle_class_from_code(*cls);
    if (!vclass) throw bad();
    if (tracks.empty() || tracks.back().vehicle_id != *vid || tracks.back().segment != *seg) {
      VehicleTrack tr;
      tr.vehicle_id = *vid;
      tr.segment = static_cast<int>(*seg);
      tracks.push_back(std::move(tr));
    } else if (*frame != tracks.back().samples.back().frame + 1) {
      throw DataError("track file line " + std::to_string(line_no) + ": frames must be consecutive within a segment");
    }
    tracks.back().samples.push_back(
        KinematicSample{*frame, *t, *x, *y, *vx, *vy, static_cast<int>(*lane), *vclass});
  }
  return tracks;
}

}  // namespace lcintent
