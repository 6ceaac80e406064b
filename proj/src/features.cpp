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

#include "lcintent/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>

#include "lcintent/rng.hpp"

namespace lcintent {

std::string channel_name(int channel) {
  static const char* tv[] = {"tv_y", "tv_dy", "tv_vy", "tv_vx"};
  static const char* slots[] = {"same_pre", "same_fol", "left_imm", "left_pre",
                                "left_fol", "right_imm", "right_pre", "right_fol"};
  static const char* comps[] = {"dy", "dx", "dvy", "dvx"};
  if (channel < 0 || channel >= kSeqChannels) return "invalid";
  if (channel < kTvChannels) return tv[channel];
  const int k = channel - kTvChannels;
  return std::string(slots[k / kSvChannels]) + "_" + comps[k % kSvChannels];
}

void validate(const ExtractionParams& p) {
  if (p.downsample < 1 || p.history_frames < p.downsample || p.history_frames % p.downsample != 0) {
    throw ConfigError("history_frames must be a positive multiple of downsample");
  }
  if (p.history_frames / p.downsample != kSeqLen) {
    throw ConfigError("history_frames / downsample must equal the layout sequence length " + std::to_string(kSeqLen));
  }
  if (p.lc_step_frames < 1 || p.lk_step_frames < 1) throw ConfigError("window step sizes must be >= 1");
  if (!(p.prediction_window > 0.0)) throw ConfigError("prediction_window must be positive");
  if (!(p.sv_range > 0.0)) throw ConfigError("sv_range must be positive");
}

double compute_dy(double y_l, double left_divider, double lane_width) {
  return 2.0 * ((y_l - left_divider) / lane_width) - 1.0;
}

RelativeFeatures relative_features(const VehicleState& tv, const VehicleState& sv) {
  return {sv.y - tv.y, sv.x - tv.x, sv.v_y - tv.v_y, sv.v_x - tv.v_x};
}

StaticVector encode_static(VehicleClass vehicle_class, bool left_exists, bool right_exists) {
  StaticVector v{};
  switch (vehicle_class) {
    case VehicleClass::Motorcycle:
      v[0] = 1.0;
      break;
    case VehicleClass::Auto:
      v[1] = 1.0;
      break;
    case VehicleClass::Truck:
      v[2] = 1.0;
      break;
  }
  v[left_exists ? 4 : 3] = 1.0;
  v[right_exists ? 6 : 5] = 1.0;
  return v;
}

namespace {

enum class SlotKind { Preceding, Following, Immediate };

SlotKind kind_of(SvSlot slot) {
  switch (slot) {
    case SvSlot::SamePreceding:
    case SvSlot::LeftPreceding:
    case SvSlot::RightPreceding:
      return SlotKind::Preceding;
    case SvSlot::SameFollowing:
    case SvSlot::LeftFollowing:
    case SvSlot::RightFollowing:
      return SlotKind::Following;
    default:
      return SlotKind::Immediate;
  }
}

bool is_same_lane_slot(SvSlot slot) { return slot == SvSlot::SamePreceding || slot == SvSlot::SameFollowing; }

}  // namespace

VehicleState synthetic_sv(SvSlot slot, const VehicleState& tv, double slot_lane_center, double sv_range) {
  VehicleState s = tv;
  s.vehicle_id = -1;
  switch (kind_of(slot)) {
    case SlotKind::Preceding:
      s.x = tv.x + sv_range;
      break;
    case SlotKind::Following:
      s.x = tv.x - sv_range;
      break;
    case SlotKind::Immediate:
      s.x = tv.x;
      break;
  }
  s.y = is_same_lane_slot(slot) ? tv.y : slot_lane_center;
  return s;
}

std::array<SvSelection, kSvSlots> select_svs(const VehicleState& tv, std::span<const VehicleState> others,
                                             const LaneGeometry& geometry, double sv_range) {
  const LaneInfo* own = geometry.find(tv.lane_id);
  const double own_center = own ? own->center() : tv.y;
  const double width = own ? own->lane_width : 3.6;
  const bool left_exists = own ? own->left_exists : geometry.find(tv.lane_id - 1) != nullptr;
  const bool right_exists = own ? own->right_exists : geometry.find(tv.lane_id + 1) != nullptr;
  const LaneInfo* left = geometry.find(tv.lane_id - 1);
  const LaneInfo* right = geometry.find(tv.lane_id + 1);
  const double left_center = left ? left->center() : own_center - width;
  const double right_center = right ? right->center() : own_center + width;

  std::array<SvSelection, kSvSlots> out;
  auto set_slot = [&](SvSlot slot, const VehicleState* real, double lane_center) {
    auto& sel = out[static_cast<std::size_t>(slot)];
    sel.slot_lane_center = lane_center;
    if (real && std::abs(real->x - tv.x) <= sv_range) {
      sel.synthetic = false;
      sel.state = *real;
    } else {
      sel.synthetic = true;
      sel.state = synthetic_sv(slot, tv, lane_center, sv_range);
    }
  };

  // Deterministic ordering: nearest first, then lower id.
  auto closer = [](double da, std::int64_t ia, double db, std::int64_t ib) {
    return da < db || (da == db && ia < ib);
  };

  const VehicleState* same_pre = nullptr;
  const VehicleState* same_fol = nullptr;
  for (const auto& o : others) {
    if (o.vehicle_id == tv.vehicle_id || o.lane_id != tv.lane_id) continue;
    const double dx = o.x - tv.x;
    if (dx > 0.0) {
      if (!same_pre || closer(dx, o.vehicle_id, same_pre->x - tv.x, same_pre->vehicle_id)) same_pre = &o;
    } else {
      if (!same_fol || closer(-dx, o.vehicle_id, tv.x - same_fol->x, same_fol->vehicle_id)) same_fol = &o;
    }
  }
  set_slot(SvSlot::SamePreceding, same_pre, own_center);
  set_slot(SvSlot::SameFollowing, same_fol, own_center);

  auto neighbor_lane = [&](int lane_id, bool exists, double center, SvSlot imm_slot, SvSlot pre_slot,
                           SvSlot fol_slot) {
    const VehicleState* imm = nullptr;
    if (exists) {
      for (const auto& o : others) {
        if (o.vehicle_id == tv.vehicle_id || o.lane_id != lane_id) continue;
        if (!imm || closer(std::abs(o.x - tv.x), o.vehicle_id, std::abs(imm->x - tv.x), imm->vehicle_id)) imm = &o;
      }
    }
    const VehicleState* pre = nullptr;
    const VehicleState* fol = nullptr;
    if (imm) {
      for (const auto& o : others) {
        if (o.vehicle_id == tv.vehicle_id || o.vehicle_id == imm->vehicle_id || o.lane_id != lane_id) continue;
        const double d = o.x - imm->x;
        if (d > 0.0) {
          if (!pre || closer(d, o.vehicle_id, pre->x - imm->x, pre->vehicle_id)) pre = &o;
        } else {
          if (!fol || closer(-d, o.vehicle_id, imm->x - fol->x, fol->vehicle_id)) fol = &o;
        }
      }
    }
    set_slot(imm_slot, imm, center);
    set_slot(pre_slot, pre, center);
    set_slot(fol_slot, fol, center);
  };
  neighbor_lane(tv.lane_id - 1, left_exists, left_center, SvSlot::LeftImmediate, SvSlot::LeftPreceding,
                SvSlot::LeftFollowing);
  neighbor_lane(tv.lane_id + 1, right_exists, right_center, SvSlot::RightImmediate, SvSlot::RightPreceding,
                SvSlot::RightFollowing);
  return out;
}

namespace {

VehicleState state_of(std::int64_t vid, const KinematicSample& s) { return {vid, s.x_l, s.y_l, s.v_x, s.v_y, s.lane_id}; }

class FrameIndex {
 public:
  explicit FrameIndex(const std::vector<VehicleTrack>& tracks) {
    for (const auto& tr : tracks) {
      by_vehicle_[tr.vehicle_id].push_back(&tr);
      for (const auto& s : tr.samples) by_frame_[s.frame].push_back(state_of(tr.vehicle_id, s));
    }
  }

  std::span<const VehicleState> at(std::int64_t frame) const {
    auto it = by_frame_.find(frame);
    if (it == by_frame_.end()) return {};
    return it->second;
  }

  const KinematicSample* sample(std::int64_t vid, std::int64_t frame) const {
    auto it = by_vehicle_.find(vid);
    if (it == by_vehicle_.end()) return nullptr;
    for (const VehicleTrack* tr : it->second) {
      if (const auto* s = tr->at_frame(frame)) return s;
    }
    return nullptr;
  }

 private:
  std::unordered_map<std::int64_t, std::vector<VehicleState>> by_frame_;
  std::unordered_map<std::int64_t, std::vector<const VehicleTrack*>> by_vehicle_;
};

}  // namespace

ExtractionResult extract_observations(const std::vector<VehicleTrack>& tracks, const LaneGeometry& geometry,
                                      const ExtractionParams& params, const std::string& dataset) {
  validate(params);
  ExtractionResult result;
  auto& report = result.report;
  const FrameIndex index(tracks);
  const int history = params.history_frames;
  const int horizon = static_cast<int>(std::llround(params.prediction_window * kSampleRateHz));

  for (const auto& track : tracks) {
    const int n = static_cast<int>(track.samples.size());
    const int first_end = history - 1;
    const int last_end = n - 1 - horizon;
    if (last_end < first_end) {
      ++report.short_tracks;
      continue;
    }
    const auto& smp = track.samples;
    auto lane = [&](int i) { return smp[static_cast<std::size_t>(i)].lane_id; };

    struct Candidate {
      Maneuver label;
      int first_switch;  // frame offset of the first lane switch, -1 if none
      int switches;
    };
    std::vector<Candidate> cands;
    cands.reserve(static_cast<std::size_t>(last_end - first_end + 1));
    for (int e = first_end; e <= last_end; ++e) {
      const int start_lane = lane(e);
      const int end_lane = lane(e + horizon);
      int first_switch = -1;
      int switches = 0;
      for (int k = e + 1; k <= e + horizon; ++k) {
        if (first_switch < 0 && lane(k) != start_lane) first_switch = k;
        if (lane(k) != lane(k - 1)) ++switches;
      }
      Maneuver label = Maneuver::LK;
      if (end_lane != start_lane) {
        const double c0 = geometry.at(start_lane).center();
        const double c1 = geometry.at(end_lane).center();
        label = c1 < c0 ? Maneuver::LCL : Maneuver::LCR;
      }
      cands.push_back({label, first_switch, switches});
    }

    int run_start = first_end;
    for (int e = first_end; e <= last_end; ++e) {
      const auto& c = cands[static_cast<std::size_t>(e - first_end)];
      const bool lc = is_lane_change(c.label);
      if (e > first_end && is_lane_change(cands[static_cast<std::size_t>(e - 1 - first_end)].label) != lc) run_start = e;
      const int step = lc ? params.lc_step_frames : params.lk_step_frames;
      if ((e - run_start) % step != 0) continue;

      Observation obs;
      obs.label = c.label;
      obs.tv_id = track.vehicle_id;
      obs.t_end = smp[static_cast<std::size_t>(e)].t;
      obs.dataset = dataset;
      obs.ttlc = lc ? static_cast<double>(c.first_switch - e) * kFramePeriod : params.lk_ttlc;
      ++report.windows;
      if (lc) {
        ++report.lc_windows;
      } else {
        ++report.lk_windows;
        if (c.switches > 0) ++report.net_zero_windows;
      }
      if (c.switches > 1) ++report.multi_change_windows;

      const auto& end_sample = smp[static_cast<std::size_t>(e)];
      const VehicleState tv_end = state_of(track.vehicle_id, end_sample);
      const LaneInfo& end_lane = geometry.at(end_sample.lane_id);
      obs.static_features = encode_static(end_sample.vehicle_class, end_lane.left_exists, end_lane.right_exists);
      const auto slots = select_svs(tv_end, index.at(end_sample.frame), geometry, params.sv_range);

      const int first_retained = e - (kSeqLen - 1) * params.downsample;
      const double y0 = smp[static_cast<std::size_t>(first_retained)].y_l;
      for (int r = 0; r < kSeqLen; ++r) {
        const auto& s = smp[static_cast<std::size_t>(first_retained + r * params.downsample)];
        const LaneInfo& li = geometry.at(s.lane_id);
        obs.seq(r, channel_of(TvChannel::Y)) = s.y_l - y0;
        obs.seq(r, channel_of(TvChannel::Dy)) = compute_dy(s.y_l, li.left_divider_lat, li.lane_width);
        obs.seq(r, channel_of(TvChannel::Vy)) = s.v_y;
        obs.seq(r, channel_of(TvChannel::Vx)) = s.v_x;
        const VehicleState tv = state_of(track.vehicle_id, s);
        for (int k = 0; k < kSvSlots; ++k) {
          const auto slot = static_cast<SvSlot>(k);
          const auto& sel = slots[static_cast<std::size_t>(k)];
          VehicleState sv;
          const KinematicSample* other = sel.synthetic ? nullptr : index.sample(sel.state.vehicle_id, s.frame);
          if (other) {
            sv = state_of(sel.state.vehicle_id, *other);
          } else {
            sv = synthetic_sv(slot, tv, sel.slot_lane_center, params.sv_range);
          }
          const auto rel = relative_features(tv, sv);
          obs.seq(r, channel_of(slot, SvComponent::Dy)) = rel.dy;
          obs.seq(r, channel_of(slot, SvComponent::Dx)) = rel.dx;
          obs.seq(r, channel_of(slot, SvComponent::Dvy)) = rel.dvy;
          obs.seq(r, channel_of(slot, SvComponent::Dvx)) = rel.dvx;
        }
      }
      if (!obs.seq.allFinite()) throw NumericError("non-finite feature in observation of vehicle " +
                                                   std::to_string(track.vehicle_id));
      result.observations.push_back(std::move(obs));
    }
  }

  if (params.lk_halving) {
    const std::size_t before = result.observations.size();
    result.observations = halve_lk(result.observations, derive_seed(params.seed, "halve-lk"));
    report.lk_removed_by_halving = before - result.observations.size();
  }
  return result;
}

Scaler zscore_fit(std::span<const Observation> train) {
  if (train.empty()) throw DataError("cannot fit a scaler on an empty training set");
  Scaler sc;
  const double n = static_cast<double>(train.size()) * kSeqLen;
  for (int c = 0; c < kSeqChannels; ++c) {
    // Shifted two-pass: a constant channel gets its exact value as mean.
    const double shift = train.front().seq(0, c);
    double acc = 0.0;
    for (const auto& o : train) acc += (o.seq.col(c).array() - shift).sum();
    const double mean = shift + acc / n;
    double sq = 0.0;
    for (const auto& o : train) sq += (o.seq.col(c).array() - mean).square().sum();
    const double sd = std::sqrt(sq / n);
    sc.mean(c) = mean;
    sc.floored[static_cast<std::size_t>(c)] = !(sd >= Scaler::kStdFloor);
    sc.std(c) = std::max(sd, Scaler::kStdFloor);
  }
  return sc;
}

Observation zscore_apply(const Scaler& scaler, Observation obs) {
  for (int c = 0; c < kSeqChannels; ++c) {
    obs.seq.col(c) = (obs.seq.col(c).array() - scaler.mean(c)) / scaler.std(c);
  }
  return obs;
}

std::vector<Observation> zscore_apply(const Scaler& scaler, std::span<const Observation> obs) {
  std::vector<Observation> out;
  out.reserve(obs.size());
  for (const auto& o : obs) out.push_back(zscore_apply(scaler, o));
  return out;
}

std::array<std::size_t, kNumClasses> class_counts(std::span<const Observation> observations) {
  std::array<std::size_t, kNumClasses> counts{};
  for (const auto& o : observations) ++counts[index_of(o.label)];
  return counts;
}

Split split_by_vehicle(std::span<const Observation> observations, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw ConfigError("split ratio must lie in (0, 1)");
  std::map<std::int64_t, std::size_t> per_vehicle;
  for (const auto& o : observations) ++per_vehicle[o.tv_id];
  if (per_vehicle.size() < 2) throw DataError("vehicle split needs at least two vehicles");

  std::vector<std::int64_t> ids;
  for (const auto& [id, n] : per_vehicle) ids.push_back(id);
  Rng rng(seed);
  std::shuffle(ids.begin(), ids.end(), rng);

  const double target = ratio * static_cast<double>(observations.size());
  std::set<std::int64_t> train_ids;
  std::size_t train_count = 0;
  for (std::size_t i = 0; i + 1 < ids.size(); ++i) {  // keep at least one vehicle for test
    if (static_cast<double>(train_count) >= target) break;
    train_ids.insert(ids[i]);
    train_count += per_vehicle[ids[i]];
  }
  if (train_ids.empty()) train_ids.insert(ids.front());

  Split split;
  for (const auto& o : observations) (train_ids.count(o.tv_id) ? split.train : split.test).push_back(o);
  return split;
}

namespace {

// Indices of a uniform sample of size k from [0, n); returned sorted.
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

BalancedSet balance_test_set(std::span<const Observation> test, std::uint64_t seed) {
  const auto counts = class_counts(test);
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (counts[c] == 0) {
      throw DataError("cannot balance test set: class " + std::string(to_string(maneuver_at(c))) + " is empty");
    }
  }
  const std::size_t m = *std::min_element(counts.begin(), counts.end());
  std::array<std::vector<std::size_t>, kNumClasses> members;
  for (std::size_t i = 0; i < test.size(); ++i) members[index_of(test[i].label)].push_back(i);

  std::vector<bool> keep(test.size(), false);
  Rng rng(seed);
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    for (std::size_t j : sample_indices(members[c].size(), m, rng)) keep[members[c][j]] = true;
  }
  BalancedSet out;
  for (std::size_t i = 0; i < test.size(); ++i) {
    if (keep[i]) {
      out.balanced.push_back(test[i]);
    } else if (test[i].label == Maneuver::LK) {
      out.lk_holdout.push_back(test[i]);
    } else {
      ++out.lc_removed;
    }
  }
  return out;
}

std::vector<Observation> halve_lk(std::span<const Observation> observations, std::uint64_t seed) {
  std::vector<std::size_t> lk;
  for (std::size_t i = 0; i < observations.size(); ++i) {
    if (observations[i].label == Maneuver::LK) lk.push_back(i);
  }
  Rng rng(seed);
  std::vector<bool> keep(observations.size(), true);
  for (std::size_t i : lk) keep[i] = false;
  for (std::size_t j : sample_indices(lk.size(), lk.size() / 2, rng)) keep[lk[j]] = true;
  std::vector<Observation> out;
  out.reserve(observations.size() - (lk.size() - lk.size() / 2));
  for (std::size_t i = 0; i < observations.size(); ++i) {
    if (keep[i]) out.push_back(observations[i]);
  }
  return out;
}

}  // namespace lcintent
