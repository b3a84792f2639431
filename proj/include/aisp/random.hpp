// Copyright 2026 The aisp Authors
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

#include <array>
#include <cmath>
#include <cstdint>

namespace aisp {

/// splitmix64 finalizer (Steele et al.), used for seeding and key mixing.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives a child seed from a parent seed and one key. Chaining derive_seed
/// calls builds a substream tree: every (tag, index...) path maps to its own
/// statistically independent stream, so evaluation order never matters.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t key) {
  std::uint64_t state = seed ^ (0x9e3779b97f4a7c15ULL * (key + 1));
  return splitmix64(state);
}

template <typename... Keys>
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t key, Keys... rest) {
  return derive_seed(derive_seed(seed, key), rest...);
}

/// Deterministic 64-bit generator: xoshiro256++ (Blackman & Vigna, public
/// domain reference implementation) seeded through splitmix64. Chosen over
/// <random> engines + distributions because normal_distribution's output is
/// implementation-defined; this generator produces the same stream on every
/// platform with IEEE-754 doubles.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    for (auto& word : state_) word = splitmix64(seed);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller; pairs are cached, so a stream of calls
  /// consumes exactly one uniform pair per two normals.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * kPi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

 private:
  static constexpr double kPi = 3.141592653589793238462643383279502884;

  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace aisp
