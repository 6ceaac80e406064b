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

#include "lcintent/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "detail/text.hpp"

namespace lcintent {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

namespace {

constexpr char kCheckpointMagic[8] = {'L', 'C', 'C', 'K', 'P', 'T', '\0', '\0'};
constexpr char kObservationMagic[8] = {'L', 'C', 'O', 'B', 'S', 'E', 'T', '\0'};

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

void put_str(std::ostream& out, const std::string& s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void put_doubles(std::ostream& out, const double* p, std::size_t n) {
  out.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw DataError("unexpected end of binary file");
  return v;
}

std::string get_str(std::istream& in) {
  const auto n = get<std::uint32_t>(in);
  if (n > (1u << 26)) throw DataError("corrupt string length in binary file");
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (!in) throw DataError("unexpected end of binary file");
  return s;
}

void get_doubles(std::istream& in, double* p, std::size_t n) {
  in.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw DataError("unexpected end of binary file");
}

void put_meta(std::ostream& out, const Metadata& meta) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(meta.size()));
  for (const auto& [k, v] : meta) {
    put_str(out, k);
    put_str(out, v);
  }
}

Metadata get_meta(std::istream& in) {
  Metadata meta;
  const auto n = get<std::uint32_t>(in);
  for (std::uint32_t i = 0; i < n; ++i) {
    auto k = get_str(in);
    meta[k] = get_str(in);
  }
  return meta;
}

void check_magic(std::istream& in, const char (&magic)[8], const char* what) {
  char buf[8];
  in.read(buf, 8);
  if (!in || std::memcmp(buf, magic, 8) != 0) throw DataError(std::string("not an lcintent ") + what + " file");
}

}  // namespace

const Tensor& Checkpoint::tensor(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return t;
  }
  throw DataError("checkpoint has no tensor '" + name + "'");
}

const std::string& Checkpoint::meta_value(const std::string& key) const {
  auto it = meta.find(key);
  if (it == meta.end()) throw DataError("checkpoint has no metadata key '" + key + "'");
  return it->second;
}

void Checkpoint::add(std::string name, const Eigen::MatrixXd& m) {
  Tensor t;
  t.name = std::move(name);
  t.rows = static_cast<std::uint32_t>(m.rows());
  t.cols = static_cast<std::uint32_t>(m.cols());
  t.data.assign(m.data(), m.data() + m.size());
  tensors.push_back(std::move(t));
}

Eigen::MatrixXd Checkpoint::matrix(const std::string& name) const {
  const auto& t = tensor(name);
  return Eigen::Map<const Eigen::MatrixXd>(t.data.data(), t.rows, t.cols);
}

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  out.write(kCheckpointMagic, 8);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.kind));
  put_meta(out, ckpt.meta);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const auto& t : ckpt.tensors) {
    put_str(out, t.name);
    put<std::uint32_t>(out, t.rows);
    put<std::uint32_t>(out, t.cols);
    put_doubles(out, t.data.data(), t.data.size());
  }
}

Checkpoint read_checkpoint(std::istream& in) {
  check_magic(in, kCheckpointMagic, "checkpoint");
  const auto version = get<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw ConfigError("checkpoint format version " + std::to_string(version) + " is not supported (expected " +
                      std::to_string(kCheckpointVersion) + ")");
  }
  Checkpoint ckpt;
  ckpt.kind = static_cast<CheckpointKind>(get<std::uint32_t>(in));
  ckpt.meta = get_meta(in);
  const auto n = get<std::uint32_t>(in);
  for (std::uint32_t i = 0; i < n; ++i) {
    Tensor t;
    t.name = get_str(in);
    t.rows = get<std::uint32_t>(in);
    t.cols = get<std::uint32_t>(in);
    const std::uint64_t count = static_cast<std::uint64_t>(t.rows) * t.cols;
    if (count > (1ull << 31)) throw DataError("corrupt tensor shape in checkpoint");
    t.data.resize(count);
    get_doubles(in, t.data.data(), t.data.size());
    ckpt.tensors.push_back(std::move(t));
  }
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  write_checkpoint(out, ckpt);
  if (!out) throw DataError("write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path, CheckpointKind expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  auto ckpt = read_checkpoint(in);
  if (ckpt.kind != expected) throw ConfigError(path.string() + ": unexpected checkpoint kind");
  return ckpt;
}

Checkpoint scaler_to_checkpoint(const Scaler& scaler) {
  Checkpoint c;
  c.kind = CheckpointKind::Scaler;
  c.meta["layout_version"] = std::to_string(kFeatureLayoutVersion);
  c.add("mean", scaler.mean);
  c.add("std", scaler.std);
  Eigen::MatrixXd fl(kSeqChannels, 1);
  for (int i = 0; i < kSeqChannels; ++i) fl(i, 0) = scaler.floored[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
  c.add("floored", fl);
  return c;
}

Scaler scaler_from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.kind != CheckpointKind::Scaler) throw ConfigError("checkpoint is not a scaler");
  if (ckpt.meta_value("layout_version") != std::to_string(kFeatureLayoutVersion)) {
    throw ConfigError("scaler was fitted for a different feature layout version");
  }
  Scaler s;
  const auto mean = ckpt.matrix("mean");
  const auto sd = ckpt.matrix("std");
  const auto fl = ckpt.matrix("floored");
  if (mean.size() != kSeqChannels || sd.size() != kSeqChannels || fl.size() != kSeqChannels) {
    throw DataError("scaler checkpoint has wrong channel count");
  }
  for (int i = 0; i < kSeqChannels; ++i) {
    s.mean(i) = mean(i);
    s.std(i) = sd(i);
    s.floored[static_cast<std::size_t>(i)] = fl(i) != 0.0;
  }
  return s;
}

Metadata describe(const ExtractionParams& p) {
  using detail::format_double;
  return {
      {"extract.history_frames", std::to_string(p.history_frames)},
      {"extract.downsample", std::to_string(p.downsample)},
      {"extract.prediction_window", format_double(p.prediction_window)},
      {"extract.lk_ttlc", format_double(p.lk_ttlc)},
      {"extract.lc_step_frames", std::to_string(p.lc_step_frames)},
      {"extract.lk_step_frames", std::to_string(p.lk_step_frames)},
      {"extract.sv_range", format_double(p.sv_range)},
      {"extract.lk_halving", p.lk_halving ? "1" : "0"},
      {"extract.seed", std::to_string(p.seed)},
  };
}

ExtractionParams extraction_params_from(const Metadata& meta) {
  ExtractionParams p;
  auto num = [&](const char* key, auto& field) {
    auto it = meta.find(key);
    if (it == meta.end()) return;
    auto v = detail::parse_double(it->second);
    if (!v) throw DataError(std::string("bad metadata value for ") + key);
    field = static_cast<std::remove_reference_t<decltype(field)>>(*v);
  };
  num("extract.history_frames", p.history_frames);
  num("extract.downsample", p.downsample);
  num("extract.prediction_window", p.prediction_window);
  num("extract.lk_ttlc", p.lk_ttlc);
  num("extract.lc_step_frames", p.lc_step_frames);
  num("extract.lk_step_frames", p.lk_step_frames);
  num("extract.sv_range", p.sv_range);
  if (auto it = meta.find("extract.lk_halving"); it != meta.end()) p.lk_halving = it->second == "1";
  if (auto it = meta.find("extract.seed"); it != meta.end()) {
    auto v = detail::parse_uint(it->second);
    if (!v) throw DataError("bad metadata value for extract.seed");
    p.seed = *v;
  }
  return p;
}

void write_observations(std::ostream& out, std::span<const Observation> obs, const Metadata& meta) {
  out.write(kObservationMagic, 8);
  put<std::uint32_t>(out, kObservationFormatVersion);
  put<std::uint32_t>(out, kFeatureLayoutVersion);
  put<std::uint32_t>(out, kSeqLen);
  put<std::uint32_t>(out, kSeqChannels);
  put<std::uint32_t>(out, kStaticDim);
  put_meta(out, meta);
  put<std::uint64_t>(out, obs.size());
  for (const auto& o : obs) {
    put<std::uint8_t>(out, static_cast<std::uint8_t>(index_of(o.label)));
    put<double>(out, o.ttlc);
    put<std::int64_t>(out, o.tv_id);
    put<double>(out, o.t_end);
    put_str(out, o.dataset);
    put_doubles(out, o.static_features.data(), kStaticDim);
    put_doubles(out, o.seq.data(), kFlatSeqSize);
  }
}

ObservationSet read_observations(std::istream& in) {
  check_magic(in, kObservationMagic, "observation set");
  const auto version = get<std::uint32_t>(in);
  if (version != kObservationFormatVersion) {
    throw ConfigError("observation set format version " + std::to_string(version) + " is not supported");
  }
  const auto layout = get<std::uint32_t>(in);
  if (layout != kFeatureLayoutVersion) {
    throw ConfigError("observation set uses feature layout version " + std::to_string(layout) + ", expected " +
                      std::to_string(kFeatureLayoutVersion));
  }
  if (get<std::uint32_t>(in) != kSeqLen || get<std::uint32_t>(in) != kSeqChannels ||
      get<std::uint32_t>(in) != kStaticDim) {
    throw ConfigError("observation set shape does not match this build's feature layout");
  }
  ObservationSet set;
  set.meta = get_meta(in);
  const auto count = get<std::uint64_t>(in);
  set.observations.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(count, 1u << 20)));
  for (std::uint64_t i = 0; i < count; ++i) {
    Observation o;
    const auto label = get<std::uint8_t>(in);
    if (label >= kNumClasses) throw DataError("corrupt label in observation set");
    o.label = maneuver_at(label);
    o.ttlc = get<double>(in);
    o.tv_id = get<std::int64_t>(in);
    o.t_end = get<double>(in);
    o.dataset = get_str(in);
    get_doubles(in, o.static_features.data(), kStaticDim);
    get_doubles(in, o.seq.data(), kFlatSeqSize);
    set.observations.push_back(std::move(o));
  }
  return set;
}

void save_observations(const std::filesystem::path& path, std::span<const Observation> obs, const Metadata& meta) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  write_observations(out, obs, meta);
  if (!out) throw DataError("write failed for " + path.string());
}

ObservationSet load_observations(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return read_observations(in);
}

}  // namespace lcintent
