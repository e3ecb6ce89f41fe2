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

#include "gbsm/synth.hpp"
#include "gbsm/errors.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <numbers>
#include <ostream>

namespace gbsm
{
    namespace
    {
        constexpr double two_pi = 2.0 * std::numbers::pi;

        // Maps an angle into [0, 2 pi). std::remainder is exact, so angle and angle + 2 pi land on the
        // same value whenever the sum itself was representable.
        double wrap_angle(double a)
        {
            double r = std::remainder(a, two_pi);
            if (r < 0.0)
                r += two_pi;
            return r >= two_pi ? 0.0 : r;
        }

        double uniform_angle(RandomStream &rng)
        {
            return wrap_angle(two_pi * rng.uniform());
        }

        double db_to_amplitude(double db)
        {
            return std::pow(10.0, db / 20.0);
        }

        void put_u32(std::ostream &out, std::uint32_t v)
        {
            const std::array<char, 4> b = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                                           static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
            out.write(b.data(), 4);
        }

        std::uint32_t get_u32(std::istream &in)
        {
            std::array<unsigned char, 4> b{};
            if (!in.read(reinterpret_cast<char *>(b.data()), 4))
                throw ParseError("channel header", "truncated binary channel file");
            return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) | (std::uint32_t(b[3]) << 24);
        }

        void put_f32(std::ostream &out, double v)
        {
            put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
        }

        double get_f32(std::istream &in)
        {
            return static_cast<double>(std::bit_cast<float>(get_u32(in)));
        }
    }

    double fspl_db(double distance_m, double freq_hz)
    {
        if (!(distance_m > 0.0) || !(freq_hz > 0.0) || !std::isfinite(distance_m) || !std::isfinite(freq_hz))
            throw DomainError("free-space path loss needs positive, finite distance and frequency");
        return 20.0 * std::log10(4.0 * std::numbers::pi * freq_hz * distance_m / speed_of_light);
    }

    void ArrayConfig::validate() const
    {
        if (n_tx < 1 || n_rx < 1)
            throw ParameterError("array sizes must be at least 1");
        if (!(spacing_wavelengths > 0.0) || !std::isfinite(spacing_wavelengths))
            throw ParameterError("element spacing must be positive");
        if (!tx_amplitudes.empty() && tx_amplitudes.size() != n_tx)
            throw ParameterError("tx_amplitudes must have n_tx entries");
        if (!rx_amplitudes.empty() && rx_amplitudes.size() != n_rx)
            throw ParameterError("rx_amplitudes must have n_rx entries");
    }

    arma::cx_vec steering_vector(arma::uword n, double spacing_wavelengths, double angle_rad, std::complex<double> amplitude)
    {
        return steering_vector(spacing_wavelengths, angle_rad, std::vector<std::complex<double>>(n, amplitude));
    }

    arma::cx_vec steering_vector(double spacing_wavelengths, double angle_rad, const std::vector<std::complex<double>> &amplitudes)
    {
        if (amplitudes.empty())
            throw ParameterError("steering vector needs at least one element");
        const double s = std::sin(wrap_angle(angle_rad));
        arma::cx_vec a(amplitudes.size());
        for (arma::uword k = 0; k < a.n_elem; ++k)
            a(k) = amplitudes[k] * std::polar(1.0, -two_pi * spacing_wavelengths * static_cast<double>(k) * s);
        return a;
    }

    void SynthesisConfig::validate() const
    {
        if (const auto *f = std::get_if<NopFixed>(&nop_source); f && f->count < 1)
            throw ParameterError("fixed number of paths must be at least 1");
        if (const auto *u = std::get_if<NopUniform>(&nop_source); u && (u->min < 1 || u->max < u->min))
            throw ParameterError("uniform number of paths needs 1 <= min <= max");
        if (const auto *a = std::get_if<LogNormalSpread>(&angle_model))
        {
            gbsm::validate(a->spread_deg);
            if (a->spread_deg.family != DistFamily::LogNormal)
                throw ParameterError("angular spread must be log-normal");
            if (a->spread_deg.loc < 0.0)
                throw ParameterError("angular spread loc must be non-negative");
        }
    }

    PathSet draw_paths(const LocationProfile &profile, const ScenarioStats &stats, const SynthesisConfig &cfg,
                       double link_distance_m, std::uint64_t realization)
    {
        cfg.validate();
        gbsm::validate(stats.npd);
        gbsm::validate(stats.ndd);
        if (!(link_distance_m > 0.0) || !std::isfinite(link_distance_m))
            throw ParameterError("link distance must be positive");

        const RandomStream root = RandomStream(cfg.seed).substream(realization);
        RandomStream nop_rng = root.substream(0);
        RandomStream delay_rng = root.substream(1);
        RandomStream gain_rng = root.substream(2);
        RandomStream angle_rng = root.substream(3);
        RandomStream phase_rng = root.substream(4);

        int count = 1;
        if (std::holds_alternative<NopEmpiricalMean>(cfg.nop_source))
        {
            const double m = stats.nop.mean;
            const double base = std::floor(m);
            count = static_cast<int>(base) + (nop_rng.uniform() < m - base ? 1 : 0);
        }
        else if (const auto *f = std::get_if<NopFixed>(&cfg.nop_source))
            count = f->count;
        else
        {
            const auto &u = std::get<NopUniform>(cfg.nop_source);
            count = static_cast<int>(nop_rng.uniform_int(static_cast<std::uint64_t>(u.min), static_cast<std::uint64_t>(u.max)));
        }
        count = std::max(count, 1);

        PathSet ps;
        ps.link_distance_m = link_distance_m;
        ps.center_freq_hz = profile.center_freq_hz;
        ps.los_pinned = cfg.pin_los_path && stats.scenario == Scenario::LOS;
        ps.distance_in_range = link_distance_m >= profile.link_distance_range_m.first &&
                               link_distance_m <= profile.link_distance_range_m.second;

        const double tau0 = link_distance_m / speed_of_light;

        // Angle generator for this realization
        const auto *spread = std::get_if<LogNormalSpread>(&cfg.angle_model);
        double mean_aoa = 0.0, mean_aod = 0.0, sd_aoa = 0.0, sd_aod = 0.0;
        if (spread)
        {
            mean_aoa = spread->mean_aoa_rad ? *spread->mean_aoa_rad : uniform_angle(angle_rng);
            mean_aod = spread->mean_aod_rad ? *spread->mean_aod_rad : uniform_angle(angle_rng);
            sd_aoa = std::max(draw(spread->spread_deg, angle_rng), 0.0) * std::numbers::pi / 180.0;
            sd_aod = std::max(draw(spread->spread_deg, angle_rng), 0.0) * std::numbers::pi / 180.0;
        }

        ps.paths.resize(static_cast<std::size_t>(count));
        for (std::size_t i = 0; i < ps.paths.size(); ++i)
        {
            Path &p = ps.paths[i];
            const bool pinned = ps.los_pinned && i == 0;
            if (pinned)
            {
                p.delay_s = tau0;
                p.excess_gain_db = 0.0;
            }
            else
            {
                p.delay_s = tau0 + std::max(draw(stats.ndd, delay_rng), 0.0) * 1e-9;
                p.excess_gain_db = draw(stats.npd, gain_rng);
            }
            if (spread)
            {
                const double ua = angle_rng.normal(), ud = angle_rng.normal();
                p.aoa_rad = wrap_angle(mean_aoa + (pinned ? 0.0 : sd_aoa * ua));
                p.aod_rad = wrap_angle(mean_aod + (pinned ? 0.0 : sd_aod * ud));
            }
            else
            {
                p.aoa_rad = uniform_angle(angle_rng);
                p.aod_rad = uniform_angle(angle_rng);
            }
            p.phase_rad = uniform_angle(phase_rng);
        }
        std::stable_sort(ps.paths.begin(), ps.paths.end(), [](const Path &a, const Path &b) { return a.delay_s < b.delay_s; });
        return ps;
    }

    std::vector<double> frequency_grid(double center_hz, double bandwidth_hz, std::size_t n)
    {
        if (n == 0)
            throw UsageError("frequency grid needs at least one point");
        if (!(center_hz > 0.0) || !(bandwidth_hz >= 0.0))
            throw ParameterError("frequency grid needs a positive center and non-negative bandwidth");
        std::vector<double> f(n);
        const double step = bandwidth_hz / static_cast<double>(n);
        for (std::size_t k = 0; k < n; ++k)
            f[k] = center_hz - 0.5 * bandwidth_hz + (static_cast<double>(k) + 0.5) * step;
        return f;
    }

    arma::cx_cube frequency_response(const PathSet &ps, const ArrayConfig &arr, const std::vector<double> &freq_grid, FsplMode mode)
    {
        if (ps.paths.empty())
            throw EmptyChannelError("cannot build a channel from an empty path set");
        arr.validate();
        if (freq_grid.empty())
            throw UsageError("frequency grid is empty");
        for (double f : freq_grid)
            if (!(f > 0.0) || !std::isfinite(f))
                throw DomainError("grid frequencies must be positive");

        const std::vector<std::complex<double>> tx_amp = arr.tx_amplitudes.empty()
                                                             ? std::vector<std::complex<double>>(arr.n_tx, arr.element_amplitude)
                                                             : arr.tx_amplitudes;
        const std::vector<std::complex<double>> rx_amp = arr.rx_amplitudes.empty()
                                                             ? std::vector<std::complex<double>>(arr.n_rx, arr.element_amplitude)
                                                             : arr.rx_amplitudes;

        arma::cx_cube H(arr.n_rx, arr.n_tx, freq_grid.size(), arma::fill::zeros);
        for (const Path &p : ps.paths)
        {
            const arma::cx_vec ar = steering_vector(arr.spacing_wavelengths, p.aoa_rad, rx_amp);
            const arma::cx_vec at = steering_vector(arr.spacing_wavelengths, p.aod_rad, tx_amp);
            const arma::cx_mat outer = ar * at.t();
            const double range_m = speed_of_light * p.delay_s;
            const std::complex<double> path_phasor = std::polar(1.0, -p.phase_rad);
            const double g_center = mode == FsplMode::CenterFrequency
                                        ? db_to_amplitude(p.excess_gain_db - fspl_db(range_m, ps.center_freq_hz))
                                        : 0.0;
            for (std::size_t k = 0; k < freq_grid.size(); ++k)
            {
                const double f = freq_grid[k];
                const double g = mode == FsplMode::CenterFrequency ? g_center
                                                                   : db_to_amplitude(p.excess_gain_db - fspl_db(range_m, f));
                // Reduce f * tau to a fraction of a cycle before forming the phasor
                const double cycles = f * p.delay_s;
                H.slice(k) += (std::polar(g, -two_pi * (cycles - std::floor(cycles))) * path_phasor) * outer;
            }
        }
        return H;
    }

    std::vector<Tap> tap_delay_line(const PathSet &ps, double ref_freq_hz)
    {
        std::vector<Tap> taps;
        taps.reserve(ps.paths.size());
        for (const Path &p : ps.paths)
        {
            const double g = db_to_amplitude(p.excess_gain_db - fspl_db(speed_of_light * p.delay_s, ref_freq_hz));
            taps.push_back({p.delay_s, std::polar(g, -p.phase_rad)});
        }
        std::stable_sort(taps.begin(), taps.end(), [](const Tap &a, const Tap &b) { return a.delay_s < b.delay_s; });
        return taps;
    }

    void to_json(nlohmann::json &j, const Path &p)
    {
        j = {{"delay_s", p.delay_s},
             {"excess_gain_db", p.excess_gain_db},
             {"aod_rad", p.aod_rad},
             {"aoa_rad", p.aoa_rad},
             {"phase_rad", p.phase_rad}};
    }

    void from_json(const nlohmann::json &j, Path &p)
    {
        p.delay_s = j.at("delay_s").get<double>();
        p.excess_gain_db = j.at("excess_gain_db").get<double>();
        p.aod_rad = j.at("aod_rad").get<double>();
        p.aoa_rad = j.at("aoa_rad").get<double>();
        p.phase_rad = j.at("phase_rad").get<double>();
    }

    void to_json(nlohmann::json &j, const PathSet &ps)
    {
        j = {{"paths", ps.paths},
             {"link_distance_m", ps.link_distance_m},
             {"center_freq_hz", ps.center_freq_hz},
             {"los_pinned", ps.los_pinned},
             {"distance_in_range", ps.distance_in_range}};
    }

    void from_json(const nlohmann::json &j, PathSet &ps)
    {
        ps.paths = j.at("paths").get<std::vector<Path>>();
        ps.link_distance_m = j.at("link_distance_m").get<double>();
        ps.center_freq_hz = j.at("center_freq_hz").get<double>();
        ps.los_pinned = j.value("los_pinned", false);
        ps.distance_in_range = j.value("distance_in_range", true);
    }

    void write_channel_binary(std::ostream &out, const arma::cx_cube &H)
    {
        put_u32(out, static_cast<std::uint32_t>(H.n_slices));
        put_u32(out, static_cast<std::uint32_t>(H.n_rows));
        put_u32(out, static_cast<std::uint32_t>(H.n_cols));
        for (arma::uword k = 0; k < H.n_slices; ++k)
            for (arma::uword r = 0; r < H.n_rows; ++r)
                for (arma::uword t = 0; t < H.n_cols; ++t)
                {
                    put_f32(out, H(r, t, k).real());
                    put_f32(out, H(r, t, k).imag());
                }
    }

    arma::cx_cube read_channel_binary(std::istream &in)
    {
        const std::uint32_t n_freq = get_u32(in), n_rx = get_u32(in), n_tx = get_u32(in);
        arma::cx_cube H(n_rx, n_tx, n_freq);
        for (arma::uword k = 0; k < n_freq; ++k)
            for (arma::uword r = 0; r < n_rx; ++r)
                for (arma::uword t = 0; t < n_tx; ++t)
                {
                    const double re = get_f32(in);
                    const double im = get_f32(in);
                    H(r, t, k) = {re, im};
                }
        return H;
    }

    nlohmann::json channel_to_json(const arma::cx_cube &H, const std::vector<double> &freq_grid)
    {
        std::vector<double> re, im;
        re.reserve(H.n_elem);
        im.reserve(H.n_elem);
        for (arma::uword k = 0; k < H.n_slices; ++k)
            for (arma::uword r = 0; r < H.n_rows; ++r)
                for (arma::uword t = 0; t < H.n_cols; ++t)
                {
                    re.push_back(H(r, t, k).real());
                    im.push_back(H(r, t, k).imag());
                }
        return {{"n_freq", H.n_slices}, {"n_rx", H.n_rows}, {"n_tx", H.n_cols},
                {"frequencies_hz", freq_grid}, {"re", re}, {"im", im}};
    }
}
