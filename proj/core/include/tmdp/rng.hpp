// Copyright 2026 The TMDP Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TMDP_RNG_HPP_
#define TMDP_RNG_HPP_

#include <cstddef>
#include <cstdint>
#include <random>

namespace tmdp {

// Seeded random source. The engine sequence of std::mt19937_64 is fixed by
// the standard; the std distributions are not, so the conversions to doubles
// and indices are done here to keep runs identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform double in [0, 1) with 53 random bits.
  double Uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n). n must be positive.
  std::size_t Index(std::size_t n) {
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return static_cast<std::size_t>(x % bound);
  }

  std::uint64_t NextU64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

// Splits one master seed into independent per-component streams. Component
// ids are fixed (environment 0, decision maker 1, adversary i at 2 + i) so
// adding a component never shifts the stream of another.
std::uint64_t DeriveSeed(std::uint64_t master, std::uint64_t component);

}  // namespace tmdp

#endif  // TMDP_RNG_HPP_
