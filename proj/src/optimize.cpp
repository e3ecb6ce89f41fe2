// SPDX-License-Identifier: Apache-2.0
//
// dband-gbsm: stochastic channel synthesis and distribution fitting for D-band MIMO links
// Copyright (C) 2026 The dband-gbsm authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "gbsm/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace gbsm
{
    namespace
    {
        constexpr double inf = std::numeric_limits<double>::infinity();

        double guarded(const std::function<double(const std::vector<double> &)> &f, const std::vector<double> &x)
        {
            const double v = f(x);
            return std::isfinite(v) ? v : inf;
        }

        struct Simplex
        {
            std::vector<std::vector<double>> points;
            std::vector<double> values;
        };

        Simplex build_simplex(const std::function<double(const std::vector<double> &)> &f,
                              const std::vector<double> &start, double step, std::size_t &evals)
        {
            const std::size_t n = start.size();
            Simplex s;
            s.points.push_back(start);
            s.values.push_back(guarded(f, start));
            ++evals;
            for (std::size_t i = 0; i < n; ++i)
            {
                std::vector<double> p = start;
                p[i] = (p[i] != 0.0) ? p[i] * (1.0 + step) : step;
                s.points.push_back(p);
                s.values.push_back(guarded(f, p));
                ++evals;
            }
            return s;
        }
    }

    MinimizeResult nelder_mead(const std::function<double(const std::vector<double> &)> &objective,
                               std::vector<double> start, const NelderMeadOptions &options)
    {
        const std::size_t n = start.size();
        MinimizeResult result;
        result.x = start;
        if (n == 0)
        {
            result.value = guarded(objective, start);
            result.evaluations = 1;
            result.converged = true;
            return result;
        }

        // Standard coefficients: reflection, expansion, contraction, shrink
        constexpr double rho = 1.0, chi = 2.0, psi = 0.5, sigma = 0.5;

        std::size_t evals = 0;
        std::vector<double> best = start;
        double best_value = inf;
        bool converged = false;

        for (std::size_t round = 0; round <= options.restarts; ++round)
        {
            Simplex s = build_simplex(objective, best, options.initial_step, evals);
            std::vector<std::size_t> order(n + 1);
            converged = false;

            while (evals < options.max_evaluations)
            {
                std::iota(order.begin(), order.end(), 0);
                std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b)
                          { return s.values[a] < s.values[b]; });
                const std::size_t lo = order.front(), hi = order.back(), second = order[n - 1];

                // Convergence: simplex values and vertices both collapsed
                double x_spread = 0.0;
                for (std::size_t i = 0; i <= n; ++i)
                    for (std::size_t j = 0; j < n; ++j)
                        x_spread = std::max(x_spread, std::abs(s.points[i][j] - s.points[lo][j]));
                const double f_spread = std::abs(s.values[hi] - s.values[lo]);
                if (std::isfinite(s.values[hi]) &&
                    f_spread <= options.f_tolerance * (std::abs(s.values[lo]) + 1e-300) &&
                    x_spread <= options.x_tolerance * (1.0 + std::abs(s.points[lo][0])))
                {
                    converged = true;
                    break;
                }
                if (std::isfinite(s.values[hi]) && f_spread == 0.0 && x_spread <= options.x_tolerance * 1e3)
                {
                    converged = true;
                    break;
                }

                std::vector<double> centroid(n, 0.0);
                for (std::size_t i = 0; i <= n; ++i)
                    if (i != hi)
                        for (std::size_t j = 0; j < n; ++j)
                            centroid[j] += s.points[i][j] / static_cast<double>(n);

                auto along = [&](double t)
                {
                    std::vector<double> p(n);
                    for (std::size_t j = 0; j < n; ++j)
                        p[j] = centroid[j] + t * (s.points[hi][j] - centroid[j]);
                    return p;
                };

                std::vector<double> xr = along(-rho);
                const double fr = guarded(objective, xr);
                ++evals;

                if (fr < s.values[lo])
                {
                    std::vector<double> xe = along(-rho * chi);
                    const double fe = guarded(objective, xe);
                    ++evals;
                    if (fe < fr)
                        s.points[hi] = std::move(xe), s.values[hi] = fe;
                    else
                        s.points[hi] = std::move(xr), s.values[hi] = fr;
                    continue;
                }
                if (fr < s.values[second])
                {
                    s.points[hi] = std::move(xr), s.values[hi] = fr;
                    continue;
                }

                // Contraction, outside if the reflected point improved on the worst
                const bool outside = fr < s.values[hi];
                std::vector<double> xc = along(outside ? -rho * psi : psi);
                const double fc = guarded(objective, xc);
                ++evals;
                if (outside ? fc <= fr : fc < s.values[hi])
                {
                    s.points[hi] = std::move(xc), s.values[hi] = fc;
                    continue;
                }

                for (std::size_t i = 0; i <= n; ++i)
                {
                    if (i == lo)
                        continue;
                    for (std::size_t j = 0; j < n; ++j)
                        s.points[i][j] = s.points[lo][j] + sigma * (s.points[i][j] - s.points[lo][j]);
                    s.values[i] = guarded(objective, s.points[i]);
                    ++evals;
                }
            }

            const auto it = std::min_element(s.values.begin(), s.values.end());
            const std::size_t idx = static_cast<std::size_t>(it - s.values.begin());
            const bool improved = *it < best_value;
            const double previous = best_value;
            if (improved)
            {
                best_value = *it;
                best = s.points[idx];
            }
            if (evals >= options.max_evaluations)
                break;
            // A restart that does not move the optimum means we are done
            if (round > 0 && std::isfinite(previous) &&
                std::abs(previous - best_value) <= options.f_tolerance * (std::abs(best_value) + 1e-300))
                break;
        }

        result.x = std::move(best);
        result.value = best_value;
        result.evaluations = evals;
        result.converged = converged;
        return result;
    }

    double golden_section(const std::function<double(double)> &objective, double lo, double hi,
                          double tolerance, std::size_t max_iterations)
    {
        const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
        double a = lo, b = hi;
        double c = b - invphi * (b - a);
        double d = a + invphi * (b - a);
        double fc = objective(c), fd = objective(d);
        for (std::size_t i = 0; i < max_iterations && std::abs(b - a) > tolerance * (1.0 + std::abs(a) + std::abs(b)); ++i)
        {
            if (!(fc >= fd)) // also takes this branch when fd is NaN
            {
                b = d;
                d = c;
                fd = fc;
                c = b - invphi * (b - a);
                fc = objective(c);
            }
            else
            {
                a = c;
                c = d;
                fc = fd;
                d = a + invphi * (b - a);
                fd = objective(d);
            }
        }
        return 0.5 * (a + b);
    }
}
