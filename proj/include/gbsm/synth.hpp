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

#ifndef GBSM_SYNTH_HPP
#define GBSM_SYNTH_HPP

#include "gbsm/catalog.hpp"
#include "gbsm/random.hpp"
#include "gbsm/statdist.hpp"

#include <armadillo>
#include <json.hpp>

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <variant>
#include <vector>

namespace gbsm
{
    inline constexpr double speed_of_light = 299792458.0;

    // Free-space path loss 20 log10(4 pi f d / c) in dB. Throws DomainError for non-positive input.
    double fspl_db(double distance_m, double freq_hz);

    // Uniform linear array. Element k of the response to azimuth `angle` is
    //   amplitude_k * exp(-i 2 pi spacing k sin(angle)),   k = 0 ... n-1
    // with spacing in wavelengths. `element_amplitudes`, if non-empty, overrides the common amplitude
    // per element and must then have exactly n entries.
    struct ArrayConfig
    {
        arma::uword n_tx = 1;
        arma::uword n_rx = 1;
        double spacing_wavelengths = 0.5;
        std::complex<double> element_amplitude{1.0, 0.0};
        std::vector<std::complex<double>> tx_amplitudes;
        std::vector<std::complex<double>> rx_amplitudes;

        void validate() const;
    };

    arma::cx_vec steering_vector(arma::uword n, double spacing_wavelengths, double angle_rad,
                                 std::complex<double> amplitude = {1.0, 0.0});
    arma::cx_vec steering_vector(double spacing_wavelengths, double angle_rad,
                                 const std::vector<std::complex<double>> &amplitudes);

    struct Path
    {
        double delay_s = 0.0;        // absolute propagation delay
        double excess_gain_db = 0.0; // gain relative to free space
        double aod_rad = 0.0;
        double aoa_rad = 0.0;
        double phase_rad = 0.0; // in [0, 2 pi)

        bool operator==(const Path &) const = default;
    };

    struct PathSet
    {
        std::vector<Path> paths; // sorted by delay
        double link_distance_m = 0.0;
        double center_freq_hz = 0.0;
        bool los_pinned = false;
        bool distance_in_range = true; // false if the link distance lies outside the campaign range

        bool operator==(const PathSet &) const = default;
    };

    // Number-of-paths sources
    struct NopFixed
    {
        int count = 1;
    };
    struct NopEmpiricalMean // catalog mean, rounded stochastically so the expected count equals the mean
    {
    };
    struct NopUniform // uniform integer in [min, max]
    {
        int min = 1;
        int max = 1;
    };
    using NopSource = std::variant<NopEmpiricalMean, NopFixed, NopUniform>;

    // Angle models (azimuth only)
    struct UniformAzimuth // every AoA/AoD independent and uniform in [0, 2 pi)
    {
    };
    struct LogNormalSpread
    {
        // Angular spread in degrees; one value is drawn per realization and link end.
        DistSpec spread_deg{DistFamily::LogNormal, {0.5}, 0.0, 10.0};
        // Mean direction in radians; drawn uniform in [0, 2 pi) per realization if empty.
        std::optional<double> mean_aoa_rad;
        std::optional<double> mean_aod_rad;
    };
    using AngleModel = std::variant<UniformAzimuth, LogNormalSpread>;

    struct SynthesisConfig
    {
        NopSource nop_source = NopEmpiricalMean{};
        AngleModel angle_model = UniformAzimuth{};
        bool pin_los_path = true; // LOS scenario only: path 0 at (d/c, 0 dB)
        std::uint64_t seed = 0;

        void validate() const;
    };

    // Draws one realization. Realization r uses substream r of cfg.seed; within it, independent
    // substreams feed the path count, delays, gains, angles and phases.
    PathSet draw_paths(const LocationProfile &profile, const ScenarioStats &stats, const SynthesisConfig &cfg,
                       double link_distance_m, std::uint64_t realization = 0);

    enum class FsplMode
    {
        PerFrequency,   // FSPL evaluated at every grid frequency
        CenterFrequency // FSPL evaluated once at the PathSet's center frequency
    };

    // n points spaced bandwidth/n apart, centered on center_hz: f_k = fc - B/2 + (k + 1/2) B / n
    std::vector<double> frequency_grid(double center_hz, double bandwidth_hz, std::size_t n);

    // Channel tensor H with slice k = n_rx x n_tx matrix at freq_grid[k].
    // Throws EmptyChannelError for a PathSet without paths.
    arma::cx_cube frequency_response(const PathSet &ps, const ArrayConfig &arr, const std::vector<double> &freq_grid,
                                     FsplMode mode = FsplMode::PerFrequency);

    struct Tap
    {
        double delay_s = 0.0;
        std::complex<double> amplitude;
    };

    // amplitude_l = 10^((excess_gain - fspl(c tau_l, ref_freq)) / 20) * exp(-i beta_l), sorted by delay
    std::vector<Tap> tap_delay_line(const PathSet &ps, double ref_freq_hz);

    void to_json(nlohmann::json &j, const Path &p);
    void from_json(const nlohmann::json &j, Path &p);
    void to_json(nlohmann::json &j, const PathSet &ps);
    void from_json(const nlohmann::json &j, PathSet &ps);

    // Binary channel layout: three little-endian uint32 {n_freq, n_rx, n_tx}, then n_freq*n_rx*n_tx
    // complex values as (float32 re, float32 im) pairs in row-major order [freq][rx][tx].
    void write_channel_binary(std::ostream &out, const arma::cx_cube &H);
    arma::cx_cube read_channel_binary(std::istream &in);

    // {"n_freq":..,"n_rx":..,"n_tx":..,"frequencies_hz":[..],"re":[..],"im":[..]} with the same ordering
    nlohmann::json channel_to_json(const arma::cx_cube &H, const std::vector<double> &freq_grid);
}

#endif
