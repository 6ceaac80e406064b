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
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "lcintent/features.hpp"

namespace lcintent {

using Metadata = std::map<std::string, std::string>;

// Checkpoint file (little-endian):
//   "LCCKPT\0\0"  u32 format_version  u32 kind
//   u32 n_meta   { str key, str value }*
//   u32 n_tensor { str name, u32 rows, u32 cols, f64[rows*cols] column-major }*
// where str = u32 length + bytes. Tensors are stored bit-exact.
inline constexpr std::uint32_t kCheckpointVersion = 1;

enum class CheckpointKind : std::uint32_t { Autoencoder = 1, Classifier = 2, Scaler = 3 };

struct Tensor {
  std::string name;
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<double> data;

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

struct Checkpoint {
  CheckpointKind kind = CheckpointKind::Autoencoder;
  Metadata meta;
  std::vector<Tensor> tensors;

  const Tensor& tensor(const std::string& name) const;
  const std::string& meta_value(const std::string& key) const;
  void add(std::string name, const Eigen::MatrixXd& m);
  Eigen::MatrixXd matrix(const std::string& name) const;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
/// Throws ConfigError on a version mismatch, DataError on corrupt input.
Checkpoint read_checkpoint(std::istream& in);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path, CheckpointKind expected);

Checkpoint scaler_to_checkpoint(const Scaler& scaler);
Scaler scaler_from_checkpoint(const Checkpoint& ckpt);

// Observation set file (little-endian):
//   "LCOBSET\0"  u32 format_version  u32 layout_version  u32 seq_len  u32 channels  u32 static_dim
//   u32 n_meta { str, str }*     -- extraction params, seed, dataset
//   u64 count
//   per observation: u8 label, f64 ttlc, i64 tv_id, f64 t_end, str dataset,
//                    f64[static_dim] static, f64[seq_len*channels] seq (time-major)
inline constexpr std::uint32_t kObservationFormatVersion = 1;

struct ObservationSet {
  std::vector<Observation> observations;
  Metadata meta;
};

Metadata describe(const ExtractionParams& params);
ExtractionParams extraction_params_from(const Metadata& meta);

void write_observations(std::ostream& out, std::span<const Observation> obs, const Metadata& meta);
ObservationSet read_observations(std::istream& in);
void save_observations(const std::filesystem::path& path, std::span<const Observation> obs, const Metadata& meta);
ObservationSet load_observations(const std::filesystem::path& path);

}  // namespace lcintent
