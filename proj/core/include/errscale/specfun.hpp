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

#include <stdexcept>
#include <string>

namespace errscale {

/// Raised when an argument lies outside a function's mathematical domain.
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Raised when an iterative evaluation fails to reach its tolerance.
class ConvergenceError : public std::runtime_error {
public:
    explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

struct SpecFunConfig {
    double rel_tolerance = 1e-12;
    int max_iterations = 500;

    /// Throws std::invalid_argument unless 0 < rel_tolerance < 1e-6 and max_iterations >= 50.
    void validate() const;
};

/// ln Gamma(x) for x > 0.
///
/// Uses the Taylor expansion of ln Gamma(1 + z) around the two zeros of the
/// function (x = 1, 2) so that relative accuracy survives there, the
/// Stirling series for x >= 10, and upward recurrence in between.
double ln_gamma(double x);

/// Regularized lower incomplete gamma P(s, x) = gamma(s, x) / Gamma(s).
///
/// Series for x < s + 1, Lentz continued fraction for the complement
/// otherwise. Throws ConvergenceError if the tolerance is not met within
/// cfg.max_iterations plus 12 sqrt(s) steps.
double reg_lower_gamma(double s, double x, const SpecFunConfig& cfg = {});

/// Regularized upper incomplete gamma Q(s, x) = 1 - P(s, x), computed
/// without cancellation in the tail.
double reg_upper_gamma(double s, double x, const SpecFunConfig& cfg = {});

/// Regularized incomplete beta I_x(a, b).
double reg_incomplete_beta(double a, double b, double x, const SpecFunConfig& cfg = {});

}  // namespace errscale
