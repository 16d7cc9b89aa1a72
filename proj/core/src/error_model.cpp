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

#include "errscale/error_model.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "errscale/rng.hpp"

namespace errscale {

void ErrorModelParams::validate() const {
    if (!(std::isfinite(r) && r > 0.0)) throw DomainError("ErrorModelParams: r must be positive");
    if (!(std::isfinite(q) && q > 0.0)) throw DomainError("ErrorModelParams: q must be positive");
    if (!(std::isfinite(alpha) && alpha > 0.0)) {
        throw DomainError("ErrorModelParams: alpha must be positive");
    }
}

double gamma_argument(const ErrorModelParams& params, double c) {
    params.validate();
    if (!(std::isfinite(c) && c > 0.0)) throw DomainError("complexity c must be positive");
    return params.q / (2.0 * params.r * std::pow(c, 2.0 * params.alpha));
}

double accuracy(const ErrorModelParams& params, double c, const SpecFunConfig& cfg) {
    const double y = gamma_argument(params, c);
    if (std::isinf(y)) return 1.0;
    return reg_lower_gamma(0.5 * params.q, y, cfg);
}

double accuracy_large_c(const ErrorModelParams& params, double c) {
    const double y = gamma_argument(params, c);
    if (!(y < 0.1)) {
        throw PreconditionError("accuracy_large_c: requires q/(2 r c^(2 alpha)) < 0.1");
    }
    const double s = 0.5 * params.q;
    return std::exp(s * std::log(y) - ln_gamma(s + 1.0));
}

double accuracy_small_c(const ErrorModelParams& params, double c) {
    const double y = gamma_argument(params, c);
    if (!(y > 10.0)) {
        throw PreconditionError("accuracy_small_c: requires q/(2 r c^(2 alpha)) > 10");
    }
    const double s = 0.5 * params.q;
    return 1.0 - std::exp((s - 1.0) * std::log(y) - y - ln_gamma(s));
}

double naive_accuracy(double rate, std::int64_t l_out) {
    if (!(rate >= 0.0 && rate <= 1.0)) throw DomainError("naive_accuracy: rate must lie in [0, 1]");
    if (l_out < 0) throw DomainError("naive_accuracy: l_out must be nonnegative");
    return std::pow(1.0 - rate, static_cast<double>(l_out));
}

ErrorModelParams rescale(const ErrorModelParams& params, double lambda) {
    params.validate();
    if (!(std::isfinite(lambda) && lambda > 0.0)) throw DomainError("rescale: lambda must be positive");
    ErrorModelParams out = params;
    out.r = params.r * std::pow(lambda, -2.0 * params.alpha);
    return out;
}

// ---------------------------------------------------------------------------

double MonteCarloConfig::implied_rate() const { return q * sigma * sigma / (tau * tau); }

void MonteCarloConfig::validate() const {
    if (!(std::isfinite(sigma) && sigma > 0.0)) throw std::invalid_argument("MonteCarloConfig: sigma must be positive");
    if (!(std::isfinite(tau) && tau > 0.0)) throw std::invalid_argument("MonteCarloConfig: tau must be positive");
    if (q < 1) throw std::invalid_argument("MonteCarloConfig: q must be at least 1");
    if (!(std::isfinite(alpha) && alpha > 0.0)) throw std::invalid_argument("MonteCarloConfig: alpha must be positive");
    if (samples < 1000) throw std::invalid_argument("MonteCarloConfig: samples must be at least 1000");
    const double rate = implied_rate();
    if (!(std::isfinite(rate) && rate > 0.0)) {
        throw std::invalid_argument("MonteCarloConfig: implied rate q sigma^2 / tau^2 must be finite and positive");
    }
}

MonteCarloConfig MonteCarloConfig::from_params(const ErrorModelParams& params, std::int64_t samples,
                                               std::uint64_t seed) {
    params.validate();
    const double rounded = std::round(params.q);
    if (rounded < 1.0 || rounded != params.q) {
        throw std::invalid_argument("MonteCarloConfig: q must be a positive integer for simulation");
    }
    MonteCarloConfig cfg;
    cfg.q = static_cast<int>(rounded);
    cfg.tau = 1.0;
    cfg.sigma = std::sqrt(params.r / params.q);
    cfg.alpha = params.alpha;
    cfg.samples = samples;
    cfg.seed = seed;
    return cfg;
}

double mc_accuracy(const MonteCarloConfig& cfg, double c) {
    cfg.validate();
    if (!(std::isfinite(c) && c > 0.0)) throw DomainError("mc_accuracy: c must be positive");

    // |E|^2 < tau^2 with E_i = sigma c^alpha Z_i  <=>  sum Z_i^2 < tau^2 / (sigma^2 c^(2 alpha))
    const double threshold = (cfg.tau * cfg.tau) / (cfg.sigma * cfg.sigma * std::pow(c, 2.0 * cfg.alpha));

    const std::int64_t n_blocks = (cfg.samples + kMonteCarloBlock - 1) / kMonteCarloBlock;
    std::vector<std::int64_t> hits(static_cast<std::size_t>(n_blocks), 0);
    std::atomic<std::int64_t> next_block{0};

    auto worker = [&] {
        for (std::int64_t b = next_block++; b < n_blocks; b = next_block++) {
            Rng rng(derive_seed(cfg.seed, {static_cast<std::uint64_t>(b)}));
            const std::int64_t begin = b * kMonteCarloBlock;
            const std::int64_t end = std::min(cfg.samples, begin + kMonteCarloBlock);
            std::int64_t count = 0;
            for (std::int64_t i = begin; i < end; ++i) {
                double norm2 = 0.0;
                for (int d = 0; d < cfg.q; ++d) {
                    const double z = rng.normal();
                    norm2 += z * z;
                }
                if (norm2 < threshold) ++count;
            }
            hits[static_cast<std::size_t>(b)] = count;
        }
    };

    const auto hw = std::max(1u, std::thread::hardware_concurrency());
    const auto n_threads = static_cast<unsigned>(std::min<std::int64_t>(hw, n_blocks));
    std::vector<std::jthread> pool;
    pool.reserve(n_threads > 0 ? n_threads - 1 : 0);
    for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    pool.clear();

    std::int64_t total = 0;
    for (auto h : hits) total += h;
    return static_cast<double>(total) / static_cast<double>(cfg.samples);
}

// ---------------------------------------------------------------------------

void ScalingDemoConfig::validate() const {
    if (token_classes < 1) throw std::invalid_argument("ScalingDemoConfig: token_classes must be at least 1");
    if (context_lengths.size() < 4) {
        throw std::invalid_argument("ScalingDemoConfig: need at least 4 context lengths");
    }
    for (std::size_t i = 0; i < context_lengths.size(); ++i) {
        if (context_lengths[i] < 1) throw std::invalid_argument("ScalingDemoConfig: context lengths must be positive");
        if (i > 0 && context_lengths[i] <= context_lengths[i - 1]) {
            throw std::invalid_argument("ScalingDemoConfig: context lengths must be strictly increasing");
        }
    }
    if (trials_per_length < 2) throw std::invalid_argument("ScalingDemoConfig: trials_per_length must be at least 2");
    if (!(std::isfinite(per_term_noise) && per_term_noise > 0.0)) {
        throw std::invalid_argument("ScalingDemoConfig: per_term_noise must be positive");
    }
}

double regression_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw std::invalid_argument("regression_slope: size mismatch");
    if (x.size() < 2) throw std::invalid_argument("regression_slope: need at least two points");
    const auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("regression_slope: x has zero spread");
    return sxy / sxx;
}

namespace {

double sample_variance(const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return ss / static_cast<double>(v.size() - 1);
}

}  // namespace

ScalingDemoResult scaling_demo(const ScalingDemoConfig& cfg) {
    cfg.validate();
    ScalingDemoResult out;
    out.context_lengths = cfg.context_lengths;
    const auto trials = static_cast<std::size_t>(cfg.trials_per_length);
    std::vector<double> sums(trials);
    std::vector<double> class_noise(static_cast<std::size_t>(cfg.token_classes));

    for (std::int64_t c : cfg.context_lengths) {
        const auto key = static_cast<std::uint64_t>(c);

        // Both regimes read noise from the same stream; token classes come
        // from a second one so that c = 1, one class gives identical sums.
        Rng noise(derive_seed(cfg.seed, {1, key}));
        for (auto& s : sums) {
            double acc = 0.0;
            for (std::int64_t j = 0; j < c; ++j) acc += cfg.per_term_noise * noise.normal();
            s = acc;
        }
        out.variance_uncorrelated.push_back(sample_variance(sums));

        Rng shared_noise(derive_seed(cfg.seed, {1, key}));
        Rng classes(derive_seed(cfg.seed, {2, key}));
        for (auto& s : sums) {
            for (auto& n : class_noise) n = cfg.per_term_noise * shared_noise.normal();
            double acc = 0.0;
            for (std::int64_t j = 0; j < c; ++j) {
                acc += class_noise[classes.below(class_noise.size())];
            }
            s = acc;
        }
        out.variance_correlated.push_back(sample_variance(sums));
    }

    std::vector<double> log_c, log_unc, log_cor;
    for (std::size_t i = 0; i < cfg.context_lengths.size(); ++i) {
        log_c.push_back(std::log(static_cast<double>(cfg.context_lengths[i])));
        log_unc.push_back(std::log(out.variance_uncorrelated[i]));
        log_cor.push_back(std::log(out.variance_correlated[i]));
    }
    out.alpha_uncorrelated = 0.5 * regression_slope(log_c, log_unc);
    out.alpha_correlated = 0.5 * regression_slope(log_c, log_cor);
    return out;
}

}  // namespace errscale
