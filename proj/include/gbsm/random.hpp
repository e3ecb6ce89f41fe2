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

#ifndef GBSM_RANDOM_HPP
#define GBSM_RANDOM_HPP

#include <cstdint>
#include <limits>

namespace gbsm
{
    // Counter-based random stream.
    //
    // A stream is identified by (seed, stream id); the n-th output is a pure function of
    // (seed, stream id, n). Substreams are derived by hashing the parent key with an index,
    // so parallel workers that pick their substream by a work-item counter produce the same
    // numbers regardless of scheduling.
    //
    // Satisfies UniformRandomBitGenerator.
    class RandomStream
    {
    public:
        using result_type = std::uint64_t;

        explicit RandomStream(std::uint64_t seed, std::uint64_t stream = 0);

        // Independent child stream; does not advance this stream.
        RandomStream substream(std::uint64_t index) const;

        std::uint64_t operator()();
        static constexpr result_type min() { return 0; }
        static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

        double uniform();                     // in the open interval (0, 1)
        double normal();                      // standard normal (Box-Muller, two uniforms per draw)
        double exponential();                 // rate 1
        double gamma(double shape);           // unit scale, shape > 0 (Marsaglia-Tsang)
        std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi); // inclusive range

        std::uint64_t key() const { return key_; }
        std::uint64_t counter() const { return counter_; }

    private:
        RandomStream(std::uint64_t key, std::uint64_t counter, int) : key_(key), counter_(counter) {}

        std::uint64_t key_;
        std::uint64_t counter_ = 0;
    };

    // SplitMix64 finalizer
    std::uint64_t mix64(std::uint64_t x);
}

#endif
