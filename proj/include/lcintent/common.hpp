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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lcintent {

/// Maneuver classes in the fixed index order used by every probability
/// vector and confusion matrix: (LCL, LK, LCR).
enum class Maneuver : int { LCL = 0, LK = 1, LCR = 2 };

inline constexpr std::size_t kNumClasses = 3;

constexpr std::size_t index_of(Maneuver m) { return static_cast<std::size_t>(m); }
constexpr Maneuver maneuver_at(std::size_t i) { return static_cast<Maneuver>(static_cast<int>(i)); }
constexpr bool is_lane_change(Maneuver m) { return m != Maneuver::LK; }

std::string_view to_string(Maneuver m);
std::optional<Maneuver> parse_maneuver(std::string_view s);

/// Vehicle class codes as they appear in NGSIM's v_Class column.
enum class VehicleClass : int { Motorcycle = 1, Auto = 2, Truck = 3 };

std::string_view to_string(VehicleClass c);
std::optional<VehicleClass> vehicle_class_from_code(long code);

inline constexpr double kSampleRateHz = 10.0;
inline constexpr double kFramePeriod = 0.1;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration, missing prerequisite, or version mismatch.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input data that violates a contract (malformed files, empty classes).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values or divergence during computation.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace lcintent
