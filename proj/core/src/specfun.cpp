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

#include "errscale/specfun.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace errscale {

namespace {

constexpr double kEulerGamma = 0.57721566490153286061;
constexpr double kHalfLog2Pi = 0.91893853320467274178;
// exp() of anything below this underflows to zero.
constexpr double kLogUnderflow = -745.0;
constexpr double kTiny = 1e-300;

// Bernoulli numbers B_2 .. B_16.
constexpr std::array<double, 8> kBernoulli = {
    1.0 / 6.0,     -1.0 / 30.0, 1.0 / 42.0,         -1.0 / 30.0,
    5.0 / 66.0, -691.0 / 2730.0, 7.0 / 6.0, -3617.0 / 510.0};

// zeta(k) - 1 for k = 2 .. kZetaTerms+1, by Euler-Maclaurin with the sum cut at n = 9.
constexpr int kZetaTerms = 60;

std::array<double, kZetaTerms> make_zeta_minus_one() {
    std::array<double, kZetaTerms> out{};
    constexpr int cut = 10;
    const double big_n = cut;
    for (int idx = 0; idx < kZetaTerms; ++idx) {
        const int k = idx + 2;
        double head = 0.0;
        for (int n = cut - 1; n >= 2; --n) head += std::pow(static_cast<double>(n), -k);
        double tail = std::pow(big_n, 1.0 - k) / (k - 1) + 0.5 * std::pow(big_n, -static_cast<double>(k));
        // B_{2j}/(2j)! * k (k+1) ... (k+2j-2) * N^{-k-2j+1}
        double rising = k;
        double factorial = 2.0;
        for (std::size_t j = 1; j <= kBernoulli.size(); ++j) {
            const int two_j = static_cast<int>(2 * j);
            tail += kBernoulli[j - 1] / factorial * rising * std::pow(big_n, -k - two_j + 1.0);
            rising *= static_cast<double>(k + two_j - 1) * (k + two_j);
            factorial *= static_cast<double>(two_j + 1) * (two_j + 2);
        }
        out[idx] = head + tail;
    }
    return out;
}

const std::array<double, kZetaTerms>& zeta_minus_one() {
    static const std::array<double, kZetaTerms> table = make_zeta_minus_one();
    return table;
}

// ln Gamma(1 + z) for |z| <= 0.5:
//   -log1p(z) + z (1 - gamma) + sum_{k>=2} (-1)^k (zeta(k) - 1) z^k / k
double ln_gamma_1p(double z) {
    const auto& zm1 = zeta_minus_one();
    double sum = 0.0;
    double zk = -z;  // becomes (-z)^k
    for (int idx = 0; idx < kZetaTerms; ++idx) {
        const int k = idx + 2;
        zk *= -z;
        const double term = zm1[idx] * zk / k;
        sum += term;
        if (std::fabs(term) < 1e-18 * std::fabs(sum)) break;
    }
    return -std::log1p(z) + z * (1.0 - kEulerGamma) + sum;
}

double ln_gamma_stirling(double x) {
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    double corr = 0.0;
    double pw = inv;
    for (std::size_t j = 1; j <= kBernoulli.size(); ++j) {
        const double two_j = 2.0 * j;
        corr += kBernoulli[j - 1] / (two_j * (two_j - 1.0)) * pw;
        pw *= inv2;
    }
    return (x - 0.5) * std::log(x) - x + kHalfLog2Pi + corr;
}

void require_finite(double v, const char* name, const char* fn) {
    if (!std::isfinite(v)) {
        std::ostringstream os;
        os << fn << ": " << name << " must be finite";
        throw DomainError(os.str());
    }
}

double clamp_unit(double v) {
    if (v < 0.0) return 0.0;
    if (v > 1.0) return 1.0;
    return v;
}

// Near x = s both expansions need O(sqrt(s)) terms: the series terms decay
// like exp(-n^2 / 2s), so 1e-16 needs about 8.6 sqrt(s) of them.
int gamma_budget(double s, const SpecFunConfig& cfg) {
    const double extra = 12.0 * std::sqrt(std::max(s, 0.0));
    return cfg.max_iterations + static_cast<int>(std::min(extra, 1e8));
}

// P(s, x) by power series; caller guarantees 0 < x < s + 1.
double lower_gamma_series(double s, double x, const SpecFunConfig& cfg) {
    const double log_prefactor = s * std::log(x) - x - ln_gamma(s + 1.0);
    // The series sum is bounded by e^x.
    if (log_prefactor + x < kLogUnderflow) return 0.0;
    double sum = 1.0;
    double term = 1.0;
    const int budget = gamma_budget(s, cfg);
    for (int n = 1; n <= budget; ++n) {
        const double ratio = x / (s + n);
        term *= ratio;
        sum += term;
        // Geometric bound on the remaining tail.
        const double next_ratio = x / (s + n + 1.0);
        if (term < sum * cfg.rel_tolerance * (1.0 - next_ratio)) {
            return std::exp(log_prefactor + std::log(sum));
        }
    }
    throw ConvergenceError("reg_lower_gamma: series did not converge");
}

// Q(s, x) by modified Lentz continued fraction; caller guarantees x >= s + 1.
double upper_gamma_cf(double s, double x, const SpecFunConfig& cfg) {
    const double log_prefactor = s * std::log(x) - x - ln_gamma(s);
    if (log_prefactor < kLogUnderflow) return 0.0;
    double b = x + 1.0 - s;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    const int budget = gamma_budget(s, cfg);
    for (int i = 1; i <= budget; ++i) {
        const double an = -i * (i - s);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < cfg.rel_tolerance) {
            return std::exp(log_prefactor) * h;
        }
    }
    throw ConvergenceError("reg_lower_gamma: continued fraction did not converge");
}

void check_gamma_args(double s, double x, const char* fn) {
    require_finite(s, "s", fn);
    require_finite(x, "x", fn);
    if (s <= 0.0) throw DomainError(std::string(fn) + ": s must be positive");
    if (x < 0.0) throw DomainError(std::string(fn) + ": x must be nonnegative");
}

// Continued fraction for I_x(a, b), evaluated where it converges fast.
double beta_cf(double a, double b, double x, const SpecFunConfig& cfg) {
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= cfg.max_iterations; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < cfg.rel_tolerance) return h;
    }
    throw ConvergenceError("reg_incomplete_beta: continued fraction did not converge");
}

}  // namespace

void SpecFunConfig::validate() const {
    if (!(rel_tolerance > 0.0 && rel_tolerance < 1e-6)) {
        throw std::invalid_argument("SpecFunConfig: rel_tolerance must lie in (0, 1e-6)");
    }
    if (max_iterations < 50) {
        throw std::invalid_argument("SpecFunConfig: max_iterations must be at least 50");
    }
}

double ln_gamma(double x) {
    require_finite(x, "x", "ln_gamma");
    if (x <= 0.0) throw DomainError("ln_gamma: x must be positive");
    if (x < 0.5) return ln_gamma_1p(x) - std::log(x);
    if (x < 1.5) return ln_gamma_1p(x - 1.0);
    if (x < 2.5) return ln_gamma_1p(x - 2.0) + std::log1p(x - 2.0);
    if (x >= 10.0) return ln_gamma_stirling(x);
    double shifted = x;
    double product = 1.0;
    while (shifted < 10.0) {
        product *= shifted;
        shifted += 1.0;
    }
    return ln_gamma_stirling(shifted) - std::log(product);
}

double reg_lower_gamma(double s, double x, const SpecFunConfig& cfg) {
    check_gamma_args(s, x, "reg_lower_gamma");
    cfg.validate();
    if (x == 0.0) return 0.0;
    if (x < s + 1.0) return clamp_unit(lower_gamma_series(s, x, cfg));
    return clamp_unit(1.0 - upper_gamma_cf(s, x, cfg));
}

double reg_upper_gamma(double s, double x, const SpecFunConfig& cfg) {
    check_gamma_args(s, x, "reg_upper_gamma");
    cfg.validate();
    if (x == 0.0) return 1.0;
    if (x < s + 1.0) return clamp_unit(1.0 - lower_gamma_series(s, x, cfg));
    return clamp_unit(upper_gamma_cf(s, x, cfg));
}

double reg_incomplete_beta(double a, double b, double x, const SpecFunConfig& cfg) {
    require_finite(a, "a", "reg_incomplete_beta");
    require_finite(b, "b", "reg_incomplete_beta");
    require_finite(x, "x", "reg_incomplete_beta");
    if (a <= 0.0 || b <= 0.0) throw DomainError("reg_incomplete_beta: a and b must be positive");
    if (x < 0.0 || x > 1.0) throw DomainError("reg_incomplete_beta: x must lie in [0, 1]");
    cfg.validate();
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double log_front =
        ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * std::log(x) + b * std::log1p(-x);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return clamp_unit(std::exp(log_front) * beta_cf(a, b, x, cfg) / a);
    }
    return clamp_unit(1.0 - std::exp(log_front) * beta_cf(b, a, 1.0 - x, cfg) / b);
}

}  // namespace errscale
