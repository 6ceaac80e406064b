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

#include "lcintent/common.hpp"
#include "lcintent/rng.hpp"

namespace lcintent {

std::string_view to_string(Maneuver m) {
  switch (m) {
    case Maneuver::LCL:
      return "LCL";
    case Maneuver::LK:
      return "LK";
    case Maneuver::LCR:
      return "LCR";
  }
  return "?";
}

std::optional<Maneuver> parse_maneuver(std::string_view s) {
  if (s == "LCL") return Maneuver::LCL;
  if (s == "LK") return Maneuver::LK;
  if (s == "LCR") return Maneuver::LCR;
  return std::nullopt;
}

std::string_view to_string(VehicleClass c) {
  switch (c) {
    case VehicleClass::Motorcycle:
      return "Motorcycle";
    case VehicleClass::Auto:
      return "Auto";
    case VehicleClass::Truck:
      return "Truck";
  }
  return "?";
}

std::optional<VehicleClass> vehicle_class_from_code(long code) {
  if (code >= 1 && code <= 3) return static_cast<VehicleClass>(code);
  return std::nullopt;
}

std::uint64_t fnv1a64(std::span<const unsigned char> bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a64(std::string_view text, std::uint64_t seed) {
  return fnv1a64(std::span(reinterpret_cast<const unsigned char*>(text.data()), text.size()), seed);
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::string_view stream, std::uint64_t index) {
  std::uint64_t s = splitmix64(master);
  s = splitmix64(s ^ fnv1a64(stream));
  return splitmix64(s ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

}  // namespace lcintent
