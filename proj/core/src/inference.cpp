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

#include "errscale/inference.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>
#include <stdexcept>
#include <thread>

#include "errscale/rng.hpp"
#include "errscale/specfun.hpp"

namespace errscale {

namespace {

void check_counts(std::int64_t n_correct, std::int64_t n_trials) {
    if (n_trials < 0) throw DomainError("trial count N must be nonnegative");
    if (n_correct < 0 || n_correct > n_trials) throw DomainError("correct count R must lie in [0, N]");
}

void check_probability(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("p must lie in [0, 1]");
}

}  // namespace

AccuracyPoint AccuracyPoint::from_counts(std::int64_t c, std::int64_t n_trials, std::int64_t n_correct,
                                         double level) {
    AccuracyPoint p;
    p.c = c;
    p.n_trials = n_trials;
    p.n_correct = n_correct;
    if (n_trials < 1) throw DomainError("AccuracyPoint: N must be at least 1");
    check_counts(n_correct, n_trials);
    p.mean_accuracy = static_cast<double>(n_correct) / static_cast<double>(n_trials);
    p.ci_halfwidth = credible_halfwidth(n_correct, n_trials, level);
    p.validate();
    return p;
}

void AccuracyPoint::validate() const {
    if (c < 1) throw std::invalid_argument("AccuracyPoint: c must be a positive integer");
    if (n_trials < 1) throw std::invalid_argument("AccuracyPoint: N must be at least 1");
    if (n_correct < 0 || n_correct > n_trials) throw std::invalid_argument("AccuracyPoint: R must lie in [0, N]");
    if (mean_accuracy != static_cast<double>(n_correct) / static_cast<double>(n_trials)) {
        throw std::invalid_argument("AccuracyPoint: mean accuracy must equal R / N");
    }
    if (!(ci_halfwidth >= 0.0 && ci_halfwidth <= 1.0)) {
        throw std::invalid_argument("AccuracyPoint: half-width must lie in [0, 1]");
    }
}

double posterior_density(double p, std::int64_t n_correct, std::int64_t n_trials) {
    check_probability(p);
    check_counts(n_correct, n_trials);
    if (n_trials == 0) return 1.0;
    const auto n = static_cast<double>(n_trials);
    const auto r = static_cast<double>(n_correct);
    double log_density = ln_gamma(n + 2.0) - ln_gamma(r + 1.0) - ln_gamma(n - r + 1.0);
    if (n_correct > 0) {
        if (p == 0.0) return 0.0;
        log_density += r * std::log(p);
    }
    if (n_trials - n_correct > 0) {
        if (p == 1.0) return 0.0;
        log_density += (n - r) * std::log1p(-p);
    }
    return std::exp(log_density);
}

double posterior_cdf(double p, std::int64_t n_correct, std::int64_t n_trials) {
    check_probability(p);
    check_counts(n_correct, n_trials);
    return reg_incomplete_beta(static_cast<double>(n_correct) + 1.0,
                               static_cast<double>(n_trials - n_correct) + 1.0, p);
}

double credible_halfwidth(std::int64_t n_correct, std::int64_t n_trials, double level, double tolerance) {
    if (n_trials < 1) throw DomainError("credible_halfwidth: N must be at least 1");
    check_counts(n_correct, n_trials);
    if (!(level > 0.0 && level < 1.0)) throw DomainError("credible_halfwidth: level must lie in (0, 1)");
    if (!(tolerance > 0.0)) throw DomainError("credible_halfwidth: tolerance must be positive");

    const double mean = static_cast<double>(n_correct) / static_cast<double>(n_trials);
    auto mass = [&](double mu) {
        const double upper = std::min(mean + mu, 1.0);
        const double lower = std::max(mean - mu, 0.0);
        return posterior_cdf(upper, n_correct, n_trials) - posterior_cdf(lower, n_correct, n_trials);
    };
    double lo = 0.0;
    double hi = 1.0;
    while (hi - lo > tolerance) {
        const double mid = 0.5 * (lo + hi);
        if (mass(mid) < level) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double chi_squared(std::span<const AccuracyPoint> points, const ErrorModelParams& params) {
    if (points.empty()) throw std::invalid_argument("chi_squared: no points");
    double total = 0.0;
    for (const auto& pt : points) {
        if (!(pt.ci_halfwidth > 0.0)) throw std::invalid_argument("chi_squared: zero half-width");
        const double residual = pt.mean_accuracy - accuracy(params, static_cast<double>(pt.c));
        total += residual * residual / (pt.ci_halfwidth * pt.ci_halfwidth);
    }
    return total / static_cast<double>(points.size());
}

AlphaMode AlphaMode::fixed(double alpha) {
    if (!(std::isfinite(alpha) && alpha > 0.0)) throw std::invalid_argument("AlphaMode: alpha must be positive");
    return AlphaMode(false, alpha);
}

AlphaMode AlphaMode::free(double initial) {
    if (!(std::isfinite(initial) && initial > 0.0)) throw std::invalid_argument("AlphaMode: alpha must be positive");
    return AlphaMode(true, initial);
}

namespace {

struct Objective {
    std::span<const AccuracyPoint> points;
    AlphaMode mode;

    ErrorModelParams params_of(const std::vector<double>& theta) const {
        ErrorModelParams p;
        p.r = std::exp(theta[0]);
        p.q = std::exp(theta[1]);
        p.alpha = mode.is_free() ? std::exp(theta[2]) : mode.value();
        return p;
    }

    double operator()(const std::vector<double>& theta) const {
        const ErrorModelParams p = params_of(theta);
        if (!(p.r > 0.0 && p.q > 0.0 && p.alpha > 0.0) || !std::isfinite(p.r) || !std::isfinite(p.q) ||
            !std::isfinite(p.alpha)) {
            return HUGE_VAL;
        }
        try {
            return chi_squared(points, p);
        } catch (const ConvergenceError&) {
            return HUGE_VAL;
        } catch (const DomainError&) {
            return HUGE_VAL;
        }
    }
};

void validate_fit_input(std::span<const AccuracyPoint> points) {
    if (points.size() < 3) throw std::invalid_argument("fit: need at least 3 points");
    std::set<std::int64_t> seen;
    for (const auto& pt : points) {
        pt.validate();
        if (!(pt.ci_halfwidth > 0.0)) throw std::invalid_argument("fit: every half-width must be positive");
        if (!seen.insert(pt.c).second) throw std::invalid_argument("fit: complexity values must be distinct");
    }
}

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> out;
    if (n == 1) return {0.5 * (lo + hi)};
    for (int i = 0; i < n; ++i) out.push_back(lo + (hi - lo) * i / (n - 1));
    return out;
}

constexpr double kInitialStep = 0.5;

double stddev(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

FitResult fit(std::span<const AccuracyPoint> points, AlphaMode alpha_mode, const FitOptions& options) {
    validate_fit_input(points);
    if (options.bootstrap_replicates < 0) throw std::invalid_argument("fit: bootstrap_replicates must be >= 0");
    if (options.descents < 1) throw std::invalid_argument("fit: descents must be >= 1");

    const Objective objective{points, alpha_mode};
    FitResult result;
    result.n_points = static_cast<std::int64_t>(points.size());
    result.degenerate = std::all_of(points.begin(), points.end(), [](const auto& p) { return p.n_correct == 0; }) ||
                        std::all_of(points.begin(), points.end(),
                                    [](const auto& p) { return p.n_correct == p.n_trials; });

    // Coarse grid in log space.
    const double ln10 = std::log(10.0);
    std::vector<std::pair<double, std::vector<double>>> seeds;
    std::vector<double> alphas = alpha_mode.is_free() ? options.grid_alpha : std::vector<double>{alpha_mode.value()};
    if (alphas.empty()) alphas.push_back(alpha_mode.value());
    for (double lr : linspace(-6.0, -1.0, options.grid_r_points)) {
        for (double lq : linspace(-1.0, 2.0, options.grid_q_points)) {
            for (double a : alphas) {
                std::vector<double> theta = {lr * ln10, lq * ln10};
                if (alpha_mode.is_free()) theta.push_back(std::log(a));
                seeds.emplace_back(objective(theta), std::move(theta));
                ++result.evaluations;
            }
        }
    }
    std::stable_sort(seeds.begin(), seeds.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

    std::vector<SimplexResult> descents;
    const std::size_t n_descents = std::min<std::size_t>(static_cast<std::size_t>(options.descents), seeds.size());
    for (std::size_t i = 0; i < n_descents; ++i) {
        descents.push_back(nelder_mead(objective, seeds[i].second, kInitialStep, options.parameter_tolerance,
                                       options.max_evaluations));
        result.evaluations += descents.back().evaluations;
    }
    const auto best_it = std::min_element(descents.begin(), descents.end(),
                                          [](const auto& a, const auto& b) { return a.value < b.value; });
    const SimplexResult& best = *best_it;
    result.params = objective.params_of(best.x);
    result.chi_squared = best.value;
    result.converged = best.converged && std::isfinite(best.value) && !result.degenerate;

    const double slack = std::max(0.01 * best.value, 1e-12);
    for (const auto& d : descents) {
        if (d.value <= best.value + slack) result.near_optimal.push_back({objective.params_of(d.x), d.value});
    }

    // Parametric bootstrap around the fitted curve.
    const int replicates = options.bootstrap_replicates;
    if (replicates > 0) {
        std::vector<double> expected;
        for (const auto& pt : points) expected.push_back(accuracy(result.params, static_cast<double>(pt.c)));

        std::vector<std::vector<double>> estimates(static_cast<std::size_t>(replicates));
        std::atomic<int> next{0};
        auto worker = [&] {
            for (int b = next++; b < replicates; b = next++) {
                Rng rng(derive_seed(options.seed, {static_cast<std::uint64_t>(b)}));
                std::vector<AccuracyPoint> resampled;
                resampled.reserve(points.size());
                for (std::size_t i = 0; i < points.size(); ++i) {
                    const auto r = rng.binomial(points[i].n_trials, expected[i]);
                    resampled.push_back(AccuracyPoint::from_counts(points[i].c, points[i].n_trials, r));
                }
                const Objective replicate_objective{resampled, alpha_mode};
                const SimplexResult refit = nelder_mead(replicate_objective, best.x, kInitialStep,
                                                        options.parameter_tolerance, options.max_evaluations);
                estimates[static_cast<std::size_t>(b)] = refit.x;
            }
        };
        const auto hw = std::max(1u, std::thread::hardware_concurrency());
        const auto n_threads = std::min<unsigned>(hw, static_cast<unsigned>(replicates));
        {
            std::vector<std::jthread> pool;
            for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
            worker();
        }

        std::vector<double> rs, qs, as;
        for (const auto& theta : estimates) {
            const ErrorModelParams p = objective.params_of(theta);
            rs.push_back(p.r);
            qs.push_back(p.q);
            as.push_back(p.alpha);
        }
        result.se_r = stddev(rs);
        result.se_q = stddev(qs);
        if (alpha_mode.is_free()) result.se_alpha = stddev(as);
        result.bootstrap_replicates = replicates;
    }
    return result;
}

}  // namespace errscale
