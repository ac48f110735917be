// include/voicemix/random.hpp

// Copyright 2026  The voicemix Authors
//
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

namespace voicemix {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to decorrelate (seed, index) pairs.
std::uint64_t mix_seed(std::uint64_t x);

/// Per-item generator derived from the run seed and the item index, so that
/// results do not depend on which worker handles which item.
Rng derive_rng(std::uint64_t master_seed, std::uint64_t index);

/// Uniform draw in [0, 1).
double uniform01(Rng& rng);

/// Uniform integer in [0, n).
std::size_t uniform_index(Rng& rng, std::size_t n);

/// Gamma(shape, 1) draw.
double sample_gamma(Rng& rng, double shape);

}  // namespace voicemix
