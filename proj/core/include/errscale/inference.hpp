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
#include <optional>
#include <span>
#include <vector>

#include "errscale/error_model.hpp"

namespace errscale {

/// Aggregated outcome of N graded trials at one complexity value.
struct AccuracyPoint {
    std::int64_t c = 1;
    std::int64_t n_trials = 1;
    std::int64_t n_correct = 0;
    double mean_accuracy = 0.0;  // exactly n_correct / n_trials
    double ci_halfwidth = 0.0;   // 95% credible half-width

    /// Builds a point with mean and half-width derived from the counts.
    static AccuracyPoint from_counts(std::int64_t c, std::int64_t n_trials, std::int64_t n_correct,
                                     double level = 0.95);
    void validate() const;
};

/// Flat-prior posterior density of the success probability after R of N.
double posterior_density(double p, std::int64_t n_correct, std::int64_t n_trials);

/// Posterior CDF, I_p(R + 1, N - R + 1).
double posterior_cdf(double p, std::int64_t n_correct, std::int64_t n_trials);

/// Half-width mu of the clipped credible interval
/// [max(R/N - mu, 0), min(R/N + mu, 1)] holding `level` posterior mass,
/// found by bisection to `tolerance`.
double credible_halfwidth(std::int64_t n_correct, std::int64_t n_trials, double level = 0.95,
                          double tolerance = 1e-10);

/// Mean over points of ((a_c - a_hat_c) / halfwidth_c)^2.
double chi_squared(std::span<const AccuracyPoint> points, const ErrorModelParams& params);

class AlphaMode {
public:
    static AlphaMode fixed(double alpha);
    static AlphaMode free(double initial = 1.0);

    bool is_free() const { return free_; }
    double value() const { return value_; }

private:
    AlphaMode(bool is_free, double value) : free_(is_free), value_(value) {}
    bool free_;
    double value_;
};

struct FitOptions {
    std::uint64_t seed = 0;
    int bootstrap_replicates = 200;
    double parameter_tolerance = 1e-8;  // simplex size in log-parameter space
    int max_evaluations = 20'000;
    int grid_r_points = 31;  // log10 r from -6 to -1
    int grid_q_points = 25;  // log10 q from -1 to 2
    std::vector<double> grid_alpha = {0.5, 1.0, 2.0};  // used only for AlphaMode::free
    int descents = 4;  // best grid seeds refined by simplex descent
};

struct FitCandidate {
    ErrorModelParams params;
    double chi_squared = 0.0;
};

struct FitResult {
    ErrorModelParams params;
    double se_r = 0.0;
    double se_q = 0.0;
    std::optional<double> se_alpha;
    double chi_squared = 0.0;
    std::int64_t n_points = 0;
    bool converged = false;
    bool degenerate = false;  // every point at accuracy 0, or every point at 1
    int bootstrap_replicates = 0;
    int evaluations = 0;
    /// Descents finishing within 1% of the optimum chi^2.
    std::vector<FitCandidate> near_optimal;
};

/// Minimizes chi_squared over (log r, log q[, log alpha]) from a log-grid
/// seed followed by Nelder-Mead descent, then estimates one-sigma
/// uncertainties by parametric bootstrap: R_c ~ Binomial(N_c, a_hat_c) for
/// every point, refit, sample standard deviation across replicates.
///
/// Throws std::invalid_argument for fewer than 3 points, repeated c values
/// or a zero half-width.
FitResult fit(std::span<const AccuracyPoint> points, AlphaMode alpha_mode, const FitOptions& options = {});

/// Derivative-free Nelder-Mead minimizer (standard coefficients 1, 2, 0.5,
/// 0.5) with one restart from the converged vertex.
struct SimplexResult {
    std::vector<double> x;
    double value = 0.0;
    int evaluations = 0;
    bool converged = false;
};

template <class F>
SimplexResult nelder_mead(F&& objective, std::vector<double> start, double initial_step,
                          double tolerance, int max_evaluations);

}  // namespace errscale

#include "errscale/detail/nelder_mead.hpp"
