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

#include "errscale/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace errscale {

namespace {

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys) {
    std::uint64_t state = master;
    std::uint64_t out = splitmix64(state);
    for (std::uint64_t key : keys) {
        state = out ^ key;
        out = splitmix64(state);
    }
    return out;
}

Rng::Rng(std::uint64_t seed) {
    std::uint64_t state = seed;
    for (auto& word : s_) word = splitmix64(state);
}

std::uint64_t Rng::next() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::uint64_t Rng::below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below: n must be positive");
    unsigned __int128 m = static_cast<unsigned __int128>(next()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
        const std::uint64_t threshold = (0 - n) % n;
        while (low < threshold) {
            m = static_cast<unsigned __int128>(next()) * n;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
    if (hi < lo) throw std::invalid_argument("Rng::uniform_int: empty range");
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(below(span));
}

double Rng::normal() {
    if (has_cached_) {
        has_cached_ = false;
        return cached_normal_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    cached_normal_ = radius * std::sin(angle);
    has_cached_ = true;
    return radius * std::cos(angle);
}

bool Rng::bernoulli(double p) { return uniform() < p; }

double Rng::gamma(double shape) {
    if (!(shape > 0.0) || !std::isfinite(shape)) throw std::invalid_argument("Rng::gamma: shape must be positive");
    if (shape < 1.0) return gamma(shape + 1.0) * std::pow(1.0 - uniform(), 1.0 / shape);
    const double d = shape - 1.0 / 3.0;
    const double k = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = normal();
            v = 1.0 + k * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = 1.0 - uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

std::int64_t Rng::binomial(std::int64_t n, double p) {
    if (n < 0) throw std::invalid_argument("Rng::binomial: n must be nonnegative");
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("Rng::binomial: p must lie in [0, 1]");
    std::int64_t hits = 0;
    // The a-th smallest of n uniforms is Beta(a, n + 1 - a). Uniforms below
    // it are uniform on [0, X), those above on (X, 1).
    while (n > kDirectBinomial && p > 0.0 && p < 1.0) {
        const std::int64_t a = 1 + n / 2;
        const std::int64_t b = n + 1 - a;
        const double ga = gamma(static_cast<double>(a));
        const double x = ga / (ga + gamma(static_cast<double>(b)));
        if (x >= p) {
            n = a - 1;
            p /= x;
        } else {
            hits += a;
            n = b - 1;
            p = (p - x) / (1.0 - x);
        }
    }
    if (p <= 0.0) return hits;
    if (p >= 1.0) return hits + n;
    for (std::int64_t i = 0; i < n; ++i) hits += bernoulli(p) ? 1 : 0;
    return hits;
}

}  // namespace errscale
