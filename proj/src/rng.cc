// pase/rng.cc

// Copyright 2026  The pase-cpp Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "pase/rng.h"

#include <cmath>
#include <sstream>

#include "pase/common.h"

namespace pase {

double Rng::uniform() {
  // 53 random mantissa bits.
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

int64_t Rng::uniform_int(int64_t lo, int64_t hi) {
  check_arg(lo <= hi, "uniform_int: empty range");
  uint64_t span = static_cast<uint64_t>(hi) - static_cast<uint64_t>(lo) + 1;
  if (span == 0) return static_cast<int64_t>(next_u64());  // full 64-bit range
  uint64_t reject = (UINT64_MAX % span + 1) % span;
  uint64_t max_ok = UINT64_MAX - reject;
  uint64_t x;
  do {
    x = next_u64();
  } while (x > max_ok);
  return lo + static_cast<int64_t>(x % span);
}

double Rng::normal() {
  // Box-Muller; the sine branch is discarded to keep one draw = two u64s.
  double u1, u2;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::string Rng::serialize() const {
  std::ostringstream os;
  os << gen_;
  return os.str();
}

void Rng::deserialize(const std::string& state) {
  std::istringstream is(state);
  is >> gen_;
  check_arg(!is.fail(), "Rng::deserialize: malformed state string");
}

uint64_t derive_seed(uint64_t base, uint64_t a, uint64_t b) {
  // splitmix64 over the combined words.
  uint64_t x = base;
  for (uint64_t w : {a ^ 0x9e3779b97f4a7c15ull, b ^ 0xbf58476d1ce4e5b9ull}) {
    x += 0x9e3779b97f4a7c15ull + w;
    uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    x = z ^ (z >> 31);
  }
  return x;
}

}  // namespace pase
