// pase/parallel.h

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
#include <functional>

namespace pase {

// Worker count used by parallel_for. 0 = auto (PASE_NUM_THREADS env or
// hardware concurrency).
int num_threads();
void set_num_threads(int n);

// Runs fn(i) for i in [0, n), split into contiguous blocks, one per worker.
// fn(i) must only write state owned by index i; results are then identical
// for any worker count.
void parallel_for(int64_t n, const std::function<void(int64_t)>& fn);

}  // namespace pase
