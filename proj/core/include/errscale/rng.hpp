// Copyright 2026 The errscale Authors.
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
#include <initializer_list>

namespace errscale {

/// One step of SplitMix64 (Steele, Lea, Flood 2014). Advances `state` and
/// returns the mixed output.
std::uint64_t splitmix64(std::uint64_t& state);

/// Deterministically combines a master seed with a list of integer keys.
/// Used for per-instance, per-block and per-replicate stream derivation.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys);

/// xoshiro256** 1.0 (Blackman, Vigna) with its 256-bit state filled from
/// SplitMix64(seed). Output streams are identical on every platform.
///
/// Derived draws:
///  - uniform():   top 53 bits of next() scaled by 2^-53, in [0, 1)
///  - below(n):    Lemire's multiply-shift with rejection, unbiased in [0, n)
///  - normal():    Box-Muller on (1 - uniform(), uniform()), the cosine branch
///                 first, the sine branch cached for the following call
///  - gamma():     Marsaglia-Tsang squeeze; shape < 1 boosted by U^(1/shape)
///  - binomial():  sum of n Bernoulli(p) draws, each uniform() < p, for
///                 n <= kDirectBinomial; above that, exact splitting on the
///                 Beta-distributed middle order statistic until n is small
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed);

    std::uint64_t next();
    std::uint64_t operator()() { return next(); }
    static constexpr std::uint64_t min() { return 0; }
    static constexpr std::uint64_t max() { return ~std::uint64_t{0}; }

    double uniform();
    std::uint64_t below(std::uint64_t n);
    /// Uniform integer in the closed range [lo, hi].
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
    double normal();
    bool bernoulli(double p);
    double gamma(double shape);
    std::int64_t binomial(std::int64_t n, double p);

    static constexpr std::int64_t kDirectBinomial = 1000;

private:
    std::uint64_t s_[4];
    double cached_normal_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace errscale
