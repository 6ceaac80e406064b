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
#include <string>
#include <vector>

#include "lcintent/classifier.hpp"
#include "lcintent/ensemble.hpp"
#include "lcintent/features.hpp"
#include "lcintent/ingest.hpp"
#include "lcintent/optim.hpp"
#include "lcintent/synth.hpp"

namespace lcintent {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kManifestVersion = 1;

/// Everything one pipeline invocation needs. Stage seeds are derived from
/// `seed` by stream name; the per-module seed fields are overwritten.
struct RunConfig {
  std::filesystem::path workdir = "lcintent-work";
  std::filesystem::path input;         // ingest: raw recording
  std::filesystem::path geometry;      // ingest: lane geometry file
  std::filesystem::path cross_target;  // cross-eval: other workdir or .obs file
  std::string dataset = "ngsim";       // ingest: dataset tag
  std::uint64_t seed = 0;

  ScenarioConfig synth;
  ColumnMap columns;
  SmoothingOptions smoothing;
  ExtractionParams extraction;
  double split_ratio = 0.75;

  int embedding = 512;
  TrainHyperparams autoencoder;
  TrainHyperparams classifier;
  LossMode loss_mode = LossMode::CrossEntropy;
  EnsembleConfig ensemble;
  bool static_features = false;

  double tau = 1.5;
  double bin_width = 0.5;
  bool eval_balance = false;
};

using KeyValues = std::map<std::string, std::string>;

/// Flat `key = value` lines; `#` starts a comment. Throws ConfigError with
/// the line number on malformed lines.
KeyValues parse_key_values(std::istream& in);

/// Applies `values` on top of `base`. Unknown keys and unparsable values
/// throw ConfigError.
RunConfig apply_config(RunConfig base, const KeyValues& values);

/// Every reproducibility-relevant setting as key=value (workdir excluded).
KeyValues effective_config(const RunConfig& config);
std::string config_text(const KeyValues& values);

/// Full command-line entry point. Returns the process exit code:
/// 0 success, 1 other failure, 2 configuration or missing prerequisite,
/// 3 data error, 4 numeric failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lcintent
