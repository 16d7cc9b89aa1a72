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
#include <stdexcept>
#include <string>
#include <vector>

#include "errscale/specfun.hpp"

namespace errscale {

/// Raised when an asymptotic approximation is evaluated outside its regime.
class PreconditionError : public std::logic_error {
public:
    explicit PreconditionError(const std::string& what) : std::logic_error(what) {}
};

/// Noise rate r, error directions q and variance exponent alpha of the
/// accuracy law a(c) = P(q/2, q / (2 r c^(2 alpha))).
struct ErrorModelParams {
    double r = 1e-4;
    double q = 1.0;  // real-valued; fits rarely land on integers
    double alpha = 1.0;

    void validate() const;
    friend bool operator==(const ErrorModelParams&, const ErrorModelParams&) = default;
};

/// Second argument of the incomplete gamma, y = q / (2 r c^(2 alpha)).
double gamma_argument(const ErrorModelParams& params, double c);

/// Probability that a task of complexity c is solved without a single error.
/// Throws DomainError for c <= 0 or invalid params.
double accuracy(const ErrorModelParams& params, double c, const SpecFunConfig& cfg = {});

/// Power-law tail y^(q/2) / Gamma(q/2 + 1). Requires y < 0.1.
double accuracy_large_c(const ErrorModelParams& params, double c);

/// Plateau approximation 1 - y^(q/2 - 1) e^(-y) / Gamma(q/2). Requires y > 10.
double accuracy_small_c(const ErrorModelParams& params, double c);

/// i.i.d. per-token baseline (1 - rate)^l_out.
double naive_accuracy(double rate, std::int64_t l_out);

/// Parameters describing the same curve after c -> lambda c:
/// r -> lambda^(-2 alpha) r, q and alpha unchanged.
ErrorModelParams rescale(const ErrorModelParams& params, double lambda);

// ---------------------------------------------------------------------------
// Monte Carlo

struct MonteCarloConfig {
    double sigma = 0.1;
    double tau = 1.0;
    int q = 1;  // dimension count, integer here unlike ErrorModelParams::q
    double alpha = 1.0;
    std::int64_t samples = 1'000'000;
    std::uint64_t seed = 0;

    /// r = q sigma^2 / tau^2.
    double implied_rate() const;
    void validate() const;

    /// tau = 1 and sigma = sqrt(r / q); params.q must be a positive integer.
    static MonteCarloConfig from_params(const ErrorModelParams& params, std::int64_t samples,
                                        std::uint64_t seed);
};

/// Number of samples each Monte Carlo block draws from its own stream.
/// Block b uses Rng(derive_seed(seed, {b})); results are independent of the
/// number of worker threads.
inline constexpr std::int64_t kMonteCarloBlock = 1 << 16;

/// Fraction of q-dimensional Gaussian error vectors (per-coordinate variance
/// sigma^2 c^(2 alpha)) whose squared norm stays below tau^2.
double mc_accuracy(const MonteCarloConfig& cfg, double c);

struct ScalingDemoConfig {
    int token_classes = 1;
    std::vector<std::int64_t> context_lengths = {16, 32, 64, 128, 256};
    std::int64_t trials_per_length = 10'000;
    double per_term_noise = 1.0;
    std::uint64_t seed = 0;

    void validate() const;
};

struct ScalingDemoResult {
    double alpha_uncorrelated = 0.0;
    double alpha_correlated = 0.0;
    std::vector<std::int64_t> context_lengths;
    std::vector<double> variance_uncorrelated;
    std::vector<double> variance_correlated;
};

/// Accumulates c noise terms per trial in two regimes and fits the growth of
/// the variance of the sum: every term drawn fresh (uncorrelated), or each
/// token drawn from `token_classes` classes whose members share one draw per
/// trial (correlated). Reports half the log-log slope as the alpha estimate.
ScalingDemoResult scaling_demo(const ScalingDemoConfig& cfg);

/// Least-squares slope of y on x. Throws std::invalid_argument with fewer
/// than two points or zero spread in x.
double regression_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace errscale
