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

#ifndef GBSM_OPTIMIZE_HPP
#define GBSM_OPTIMIZE_HPP

#include <cstddef>
#include <functional>
#include <vector>

namespace gbsm
{
    struct NelderMeadOptions
    {
        double initial_step = 0.1;    // simplex edge length relative to each start coordinate (absolute if the coordinate is 0)
        double f_tolerance = 1e-12;   // relative spread of simplex values
        double x_tolerance = 1e-10;   // absolute spread of simplex vertices
        std::size_t max_evaluations = 20000;
        std::size_t restarts = 2;     // rebuild the simplex around the best point this many times
    };

    struct MinimizeResult
    {
        std::vector<double> x;
        double value = 0.0;
        std::size_t evaluations = 0;
        bool converged = false;
    };

    // Derivative-free minimization. Non-finite objective values are treated as +inf,
    // which lets callers encode constraints by returning infinity.
    MinimizeResult nelder_mead(const std::function<double(const std::vector<double> &)> &objective,
                               std::vector<double> start,
                               const NelderMeadOptions &options = {});

    // Golden-section search for a 1-D minimum on [lo, hi].
    double golden_section(const std::function<double(double)> &objective, double lo, double hi,
                          double tolerance = 1e-10, std::size_t max_iterations = 200);
}

#endif
