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

#include "gbsm/random.hpp"

#include <cmath>
#include <numbers>

namespace gbsm
{
    namespace
    {
        constexpr std::uint64_t golden_gamma = 0x9E3779B97F4A7C15ULL;
    }

    std::uint64_t mix64(std::uint64_t x)
    {
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

    RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream)
        : key_(mix64(seed ^ mix64(stream + golden_gamma)))
    {
    }

    RandomStream RandomStream::substream(std::uint64_t index) const
    {
        return RandomStream(mix64(key_ ^ mix64((index + 1) * golden_gamma)), 0, 0);
    }

    std::uint64_t RandomStream::operator()()
    {
        ++counter_;
        return mix64(key_ + counter_ * golden_gamma);
    }

    double RandomStream::uniform()
    {
        // 53 random bits, shifted by half an ulp so that 0 and 1 are never returned
        return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
    }

    double RandomStream::normal()
    {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    double RandomStream::exponential()
    {
        return -std::log(uniform());
    }

    double RandomStream::gamma(double shape)
    {
        if (shape < 1.0)
        {
            // Boost to shape + 1 and scale back: G(a) = G(a+1) * U^(1/a)
            const double g = gamma(shape + 1.0);
            return g * std::pow(uniform(), 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        while (true)
        {
            double x, v;
            do
            {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x)
                return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
                return d * v;
        }
    }

    std::uint64_t RandomStream::uniform_int(std::uint64_t lo, std::uint64_t hi)
    {
        if (hi <= lo)
            return lo;
        const std::uint64_t span = hi - lo + 1;
        if (span == 0) // full 64-bit range
            return (*this)();
        // Rejection to remove modulo bias
        const std::uint64_t limit = max() - max() % span;
        std::uint64_t r;
        do
        {
            r = (*this)();
        } while (r >= limit);
        return lo + r % span;
    }
}
