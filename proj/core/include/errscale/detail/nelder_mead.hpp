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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace errscale {

namespace detail {

template <class F>
SimplexResult nelder_mead_once(F& objective, const std::vector<double>& start, double step,
                               double tolerance, int budget) {
    const std::size_t n = start.size();
    std::vector<std::vector<double>> vertex(n + 1, start);
    std::vector<double> value(n + 1);
    int evals = 0;
    auto eval = [&](const std::vector<double>& x) {
        ++evals;
        const double v = objective(x);
        return std::isfinite(v) ? v : HUGE_VAL;
    };
    for (std::size_t i = 0; i < n; ++i) vertex[i + 1][i] += step;
    for (std::size_t i = 0; i <= n; ++i) value[i] = eval(vertex[i]);

    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), trial(n), trial2(n);
    bool converged = false;
    while (evals < budget) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return value[a] < value[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second_worst = order[n - 1];

        double size = 0.0;
        for (std::size_t i = 0; i <= n; ++i) {
            for (std::size_t d = 0; d < n; ++d) {
                size = std::max(size, std::fabs(vertex[i][d] - vertex[best][d]));
            }
        }
        if (size < tolerance) {
            converged = true;
            break;
        }

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == worst) continue;
            for (std::size_t d = 0; d < n; ++d) centroid[d] += vertex[i][d] / static_cast<double>(n);
        }
        for (std::size_t d = 0; d < n; ++d) trial[d] = centroid[d] + (centroid[d] - vertex[worst][d]);
        const double reflected = eval(trial);

        if (reflected < value[best]) {
            for (std::size_t d = 0; d < n; ++d) trial2[d] = centroid[d] + 2.0 * (centroid[d] - vertex[worst][d]);
            const double expanded = eval(trial2);
            if (expanded < reflected) {
                vertex[worst] = trial2;
                value[worst] = expanded;
            } else {
                vertex[worst] = trial;
                value[worst] = reflected;
            }
            continue;
        }
        if (reflected < value[second_worst]) {
            vertex[worst] = trial;
            value[worst] = reflected;
            continue;
        }
        // Contraction, outside when the reflection improved on the worst vertex.
        const bool outside = reflected < value[worst];
        for (std::size_t d = 0; d < n; ++d) {
            trial2[d] = outside ? centroid[d] + 0.5 * (trial[d] - centroid[d])
                                : centroid[d] + 0.5 * (vertex[worst][d] - centroid[d]);
        }
        const double contracted = eval(trial2);
        if (contracted < std::min(reflected, value[worst])) {
            vertex[worst] = trial2;
            value[worst] = contracted;
            continue;
        }
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == best) continue;
            for (std::size_t d = 0; d < n; ++d) {
                vertex[i][d] = vertex[best][d] + 0.5 * (vertex[i][d] - vertex[best][d]);
            }
            value[i] = eval(vertex[i]);
        }
    }
    const auto best_it = std::min_element(value.begin(), value.end());
    const auto best_idx = static_cast<std::size_t>(best_it - value.begin());
    return SimplexResult{vertex[best_idx], value[best_idx], evals, converged};
}

}  // namespace detail

template <class F>
SimplexResult nelder_mead(F&& objective, std::vector<double> start, double initial_step, double tolerance,
                          int max_evaluations) {
    SimplexResult first = detail::nelder_mead_once(objective, start, initial_step, tolerance, max_evaluations);
    if (!first.converged) return first;
    // A collapsed simplex can stall off the minimum; restart once from it.
    SimplexResult second = detail::nelder_mead_once(objective, first.x, initial_step, tolerance,
                                                    max_evaluations - first.evaluations);
    second.evaluations += first.evaluations;
    if (second.value > first.value) {
        first.evaluations = second.evaluations;
        first.converged = second.converged;
        return first;
    }
    return second;
}

}  // namespace errscale
