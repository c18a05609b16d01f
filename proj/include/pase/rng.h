// pase/rng.h

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

#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace pase {

// Seeded RNG with self-contained distributions, so that a given seed produces
// the same draw sequence on every standard library implementation.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }
  double uniform();                             // [0, 1)
  double uniform(double lo, double hi);         // [lo, hi)
  int64_t uniform_int(int64_t lo, int64_t hi);  // inclusive, unbiased
  double normal();                              // standard normal

  std::string serialize() const;
  void deserialize(const std::string& state);

 private:
  std::mt19937_64 gen_;
};

// Stateless seed derivation for independent streams (per epoch, per purpose).
uint64_t derive_seed(uint64_t base, uint64_t a, uint64_t b = 0);

}  // namespace pase
