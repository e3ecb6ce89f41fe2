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

#include "gbsm/errors.hpp"
#include "gbsm/synth.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>
#include <sstream>

using namespace gbsm;
using Catch::Approx;

namespace
{
    constexpr double pi = std::numbers::pi;

    // 20 log10(4 pi f d / c) in extended precision
    double fspl_oracle(long double d, long double f)
    {
        return static_cast<double>(20.0L * std::log10(4.0L * std::numbers::pi_v<long double> * f * d / 299792458.0L));
    }

    PathSet single_path(double delay_s, double gain_db, double beta, double center = 142e9)
    {
        PathSet ps;
        ps.paths.push_back({delay_s, gain_db, 0.3, -0.7, beta});
        ps.link_distance_m = delay_s * speed_of_light;
        ps.center_freq_hz = center;
        return ps;
    }

    double wrap_pi(double a)
    {
        return std::remainder(a, 2.0 * pi);
    }
}

TEST_CASE("free-space path loss", "[synth]")
{
    CHECK(fspl_db(1.0, 142e9) == Approx(75.49).margin(0.01));
    CHECK(fspl_db(1.0, 142e9) == Approx(fspl_oracle(1.0L, 142e9L)).epsilon(1e-14));
    CHECK(fspl_db(37.0, 143.1e9) == Approx(fspl_oracle(37.0L, 143.1e9L)).epsilon(1e-14));
    CHECK(fspl_db(20.0, 142e9) - fspl_db(10.0, 142e9) == Approx(6.0206).margin(1e-4));
    CHECK(std::abs(fspl_db(20.0, 142e9) - fspl_db(10.0, 142e9) - 20.0 * std::log10(2.0)) < 1e-9);
    CHECK(std::abs(fspl_db(10.0, 284e9) - fspl_db(10.0, 142e9) - 20.0 * std::log10(2.0)) < 1e-9);
    CHECK_THROWS_AS(fspl_db(0.0, 142e9), DomainError);
    CHECK_THROWS_AS(fspl_db(1.0, -1.0), DomainError);
}

TEST_CASE("steering vector examples", "[synth]")
{
    const std::complex<double> a0(0.3, 0.4);
    const arma::cx_vec v = steering_vector(4, 0.37, 0.0, a0);
    REQUIRE(v.n_elem == 4);
    for (const auto &x : v)
        CHECK(x == a0);

    const arma::cx_vec w = steering_vector(2, 0.5, pi / 2);
    CHECK(std::abs(w(0) - std::complex<double>(1.0, 0.0)) < 1e-15);
    CHECK(std::abs(w(1) - std::complex<double>(-1.0, 0.0)) < 1e-15);

    const arma::cx_vec u = steering_vector(8, 0.5, pi / 6, a0);
    const std::complex<double> ip = arma::cdot(u, u);
    CHECK(ip.real() == Approx(8.0 * std::norm(a0)).epsilon(1e-14));
    CHECK(std::abs(ip.imag()) < 1e-14);

    const arma::cx_vec p = steering_vector(0.5, 0.2, {{1.0, 0.0}, {0.5, 0.0}, {0.25, 0.0}});
    CHECK(std::abs(p(2)) == Approx(0.25).epsilon(1e-15));
}

TEST_CASE("steering vectors are unchanged by a full turn", "[synth]")
{
    RandomStream rng(12);
    int tested = 0;
    for (int i = 0; i < 2000 && tested < 500; ++i)
    {
        // angles on a 2^-40 grid so that adding 2 pi is exact
        const double a = std::ldexp(std::round(std::ldexp(rng.uniform() * 40.0 - 20.0, 40)), -40);
        const double shifted = a + 2.0 * pi;
        if (shifted - 2.0 * pi != a)
            continue;
        ++tested;
        const arma::cx_vec x = steering_vector(16, 0.5, a), y = steering_vector(16, 0.5, shifted);
        for (arma::uword k = 0; k < x.n_elem; ++k)
            REQUIRE(std::memcmp(&x(k), &y(k), sizeof(std::complex<double>)) == 0);
    }
    CHECK(tested >= 100);
}

TEST_CASE("LOS draw with a fixed path count", "[synth]")
{
    const Catalog &c = embedded_catalog();
    const auto &p = c.profile("Sello");
    const auto &s = c.stats("Sello", Scenario::LOS);
    SynthesisConfig cfg;
    cfg.nop_source = NopFixed{19};
    cfg.seed = 7;

    double sum = 0.0;
    std::size_t count = 0;
    for (std::uint64_t r = 0; count < 100000; ++r)
    {
        const PathSet ps = draw_paths(p, s, cfg, 30.0, r);
        REQUIRE(ps.paths.size() == 19);
        REQUIRE(ps.paths[0].delay_s * 1e9 == Approx(100.07).margin(0.005));
        REQUIRE(ps.paths[0].excess_gain_db == 0.0);
        for (std::size_t i = 1; i < ps.paths.size(); ++i)
        {
            REQUIRE(ps.paths[i].delay_s >= ps.paths[i - 1].delay_s);
            sum += (ps.paths[i].delay_s - ps.paths[0].delay_s) * 1e9;
            ++count;
        }
    }
    const double mean = sum / count;
    CHECK(mean >= 50.0);
    CHECK(mean <= 51.0);
}

TEST_CASE("a one-path LOS draw is the pinned direct path", "[synth]")
{
    const Catalog &c = embedded_catalog();
    SynthesisConfig cfg;
    cfg.nop_source = NopFixed{1};
    const PathSet ps = draw_paths(c.profile("Campus"), c.stats("Campus", Scenario::LOS), cfg, 45.0);
    REQUIRE(ps.paths.size() == 1);
    CHECK(ps.paths[0].delay_s == 45.0 / speed_of_light);
    CHECK(ps.paths[0].excess_gain_db == 0.0);
    CHECK(ps.los_pinned);
}

TEST_CASE("NLOS excess gains follow the catalog spec", "[synth]")
{
    const Catalog &c = embedded_catalog();
    const auto &s = c.stats("TUAS2", Scenario::NLOS);
    SynthesisConfig cfg;
    cfg.seed = 3;
    std::vector<double> gains;
    for (std::uint64_t r = 0; gains.size() < 100000; ++r)
    {
        const PathSet ps = draw_paths(c.profile("TUAS2"), s, cfg, 20.0, r);
        CHECK_FALSE(ps.los_pinned);
        for (const Path &p : ps.paths)
        {
            REQUIRE(p.delay_s >= 20.0 / speed_of_light);
            REQUIRE(p.phase_rad >= 0.0);
            REQUIRE(p.phase_rad < 2.0 * pi);
            gains.push_back(p.excess_gain_db);
        }
    }
    std::nth_element(gains.begin(), gains.begin() + gains.size() / 2, gains.end());
    CHECK(gains[gains.size() / 2] == Approx(-25.7).margin(0.5));
}

TEST_CASE("path counts follow the configured source", "[synth]")
{
    const Catalog &c = embedded_catalog();
    const auto &p = c.profile("TUAS2");
    const auto &s = c.stats("TUAS2", Scenario::NLOS);
    SynthesisConfig cfg;
    double total = 0.0;
    const int n = 20000;
    for (int r = 0; r < n; ++r)
    {
        const auto size = draw_paths(p, s, cfg, 10.0, r).paths.size();
        REQUIRE((size == 29 || size == 30));
        total += static_cast<double>(size);
    }
    CHECK(total / n == Approx(29.7).margin(0.02));

    cfg.nop_source = NopUniform{3, 6};
    for (int r = 0; r < 200; ++r)
    {
        const auto size = draw_paths(p, s, cfg, 10.0, r).paths.size();
        REQUIRE(size >= 3);
        REQUIRE(size <= 6);
    }
    cfg.nop_source = NopFixed{0};
    CHECK_THROWS_AS(draw_paths(p, s, cfg, 10.0), ParameterError);
    cfg.nop_source = NopUniform{5, 2};
    CHECK_THROWS_AS(draw_paths(p, s, cfg, 10.0), ParameterError);
    cfg.nop_source = NopFixed{2};
    CHECK_THROWS_AS(draw_paths(p, s, cfg, -1.0), ParameterError);
    CHECK_FALSE(draw_paths(p, s, cfg, 500.0).distance_in_range);
}

TEST_CASE("draws are reproducible", "[synth]")
{
    const Catalog &c = embedded_catalog();
    SynthesisConfig cfg;
    cfg.seed = 99;
    const auto &p = c.profile("City");
    const auto &s = c.stats("City", Scenario::LOS);
    CHECK(draw_paths(p, s, cfg, 50.0, 4) == draw_paths(p, s, cfg, 50.0, 4));
    CHECK_FALSE(draw_paths(p, s, cfg, 50.0, 4) == draw_paths(p, s, cfg, 50.0, 5));
    cfg.seed = 100;
    SynthesisConfig other = cfg;
    other.seed = 99;
    CHECK_FALSE(draw_paths(p, s, cfg, 50.0, 4) == draw_paths(p, s, other, 50.0, 4));
}

TEST_CASE("log-normal angular spread concentrates paths around the mean direction", "[synth]")
{
    const Catalog &c = embedded_catalog();
    SynthesisConfig cfg;
    LogNormalSpread spread;
    spread.spread_deg = {DistFamily::LogNormal, {0.2}, 0.0, 2.0};
    spread.mean_aoa_rad = 1.0;
    spread.mean_aod_rad = 4.0;
    cfg.angle_model = spread;
    cfg.nop_source = NopFixed{50};
    const PathSet ps = draw_paths(c.profile("Campus"), c.stats("Campus", Scenario::LOS), cfg, 30.0);
    CHECK(ps.paths[0].aoa_rad == Approx(1.0).epsilon(1e-14));
    for (const Path &p : ps.paths)
    {
        CHECK(std::abs(wrap_pi(p.aoa_rad - 1.0)) < 0.3);
        CHECK(std::abs(wrap_pi(p.aod_rad - 4.0)) < 0.3);
    }
    spread.spread_deg = {DistFamily::Gamma, {2.0}, 0.0, 2.0};
    cfg.angle_model = spread;
    CHECK_THROWS_AS(draw_paths(c.profile("Campus"), c.stats("Campus", Scenario::LOS), cfg, 30.0), ParameterError);
}

TEST_CASE("frequency grid is centered", "[synth]")
{
    const auto f = frequency_grid(142e9, 4e9, 4);
    REQUIRE(f.size() == 4);
    CHECK(f[0] == Approx(140.5e9));
    CHECK(f[3] == Approx(143.5e9));
    CHECK(frequency_grid(142e9, 4e9, 1) == std::vector<double>{142e9});
    CHECK_THROWS_AS(frequency_grid(142e9, 4e9, 0), UsageError);
}

TEST_CASE("single-path response: magnitude and phase slope", "[synth]")
{
    const double tau = 123.456e-9;
    const PathSet ps = single_path(tau, -7.5, 1.1);
    ArrayConfig arr;
    const auto grid = frequency_grid(142e9, 4e9, 64);
    const arma::cx_cube H = frequency_response(ps, arr, grid);
    REQUIRE(H.n_rows == 1);
    REQUIRE(H.n_cols == 1);
    REQUIRE(H.n_slices == 64);
    for (std::size_t k = 0; k < grid.size(); ++k)
        CHECK(std::abs(H(0, 0, k)) == Approx(std::pow(10.0, (-fspl_oracle(tau * speed_of_light, grid[k]) - 7.5) / 20.0)).epsilon(1e-12));
    for (std::size_t k = 1; k < grid.size(); ++k)
    {
        const double measured = std::arg(H(0, 0, k) / H(0, 0, k - 1));
        const double expected = wrap_pi(-2.0 * pi * (grid[k] - grid[k - 1]) * tau);
        CHECK(std::abs(wrap_pi(measured - expected)) < 1e-9);
    }
}

TEST_CASE("channel rank is bounded by paths and antennas", "[synth]")
{
    const Catalog &c = embedded_catalog();
    RandomStream rng(5);
    for (int trial = 0; trial < 25; ++trial)
    {
        SynthesisConfig cfg;
        cfg.seed = trial;
        cfg.nop_source = NopFixed{static_cast<int>(rng.uniform_int(1, 6))};
        ArrayConfig arr;
        arr.n_tx = rng.uniform_int(1, 8);
        arr.n_rx = rng.uniform_int(1, 8);
        const PathSet ps = draw_paths(c.profile("City"), c.stats("City", Scenario::NLOS), cfg, 60.0);
        const arma::cx_cube H = frequency_response(ps, arr, frequency_grid(142e9, 4e9, 8));
        const arma::uword bound = std::min<arma::uword>({ps.paths.size(), arr.n_rx, arr.n_tx});
        for (arma::uword k = 0; k < H.n_slices; ++k)
            REQUIRE(arma::rank(arma::cx_mat(H.slice(k))) <= bound);
    }
}

TEST_CASE("opposite-phase twin paths cancel", "[synth]")
{
    PathSet ps = single_path(80e-9, -3.0, 0.4);
    ps.paths.push_back(ps.paths[0]);
    ps.paths[1].phase_rad = 0.4 + pi;
    ArrayConfig arr;
    arr.n_tx = 4;
    arr.n_rx = 3;
    const arma::cx_cube H = frequency_response(ps, arr, frequency_grid(142e9, 4e9, 16));
    const double single = std::pow(10.0, (-fspl_db(80e-9 * speed_of_light, 142e9) - 3.0) / 20.0);
    CHECK(arma::abs(H).max() <= 8.0 * std::numeric_limits<double>::epsilon() * single);
}

TEST_CASE("empty path sets and invalid arrays are rejected", "[synth]")
{
    PathSet empty;
    empty.center_freq_hz = 142e9;
    CHECK_THROWS_AS(frequency_response(empty, ArrayConfig{}, {142e9}), EmptyChannelError);
    CHECK(tap_delay_line(empty, 142e9).empty());
    ArrayConfig bad;
    bad.n_tx = 0;
    CHECK_THROWS_AS(frequency_response(single_path(1e-8, 0, 0), bad, {142e9}), ParameterError);
    ArrayConfig wrong;
    wrong.n_tx = 2;
    wrong.tx_amplitudes = {{1.0, 0.0}};
    CHECK_THROWS_AS(frequency_response(single_path(1e-8, 0, 0), wrong, {142e9}), ParameterError);
}

TEST_CASE("tap delay line", "[synth]")
{
    const auto taps = tap_delay_line(single_path(1.0 / speed_of_light, 0.0, 0.0), 142e9);
    REQUIRE(taps.size() == 1);
    CHECK(std::abs(taps[0].amplitude) == Approx(std::pow(10.0, -fspl_oracle(1.0L, 142e9L) / 20.0)).epsilon(1e-12));
    CHECK(std::abs(taps[0].amplitude) == Approx(1.68e-4).epsilon(0.005));

    const Catalog &c = embedded_catalog();
    for (std::uint64_t seed = 0; seed < 20; ++seed)
    {
        SynthesisConfig cfg;
        cfg.seed = seed;
        const auto t = tap_delay_line(draw_paths(c.profile("Residential"), c.stats("Residential", Scenario::NLOS), cfg, 80.0), 142e9);
        for (std::size_t i = 1; i < t.size(); ++i)
            REQUIRE(t[i].delay_s >= t[i - 1].delay_s);
    }
}

TEST_CASE("tap energy equals mean channel energy over the band", "[synth]")
{
    const std::size_t n = 64;
    const double bw = 4e9, df = bw / n;
    PathSet ps;
    ps.center_freq_hz = 142e9;
    ps.link_distance_m = 12.0;
    const double tau0 = 40e-9;
    const int bins[] = {0, 3, 10, 17, 41};
    for (int k : bins)
        ps.paths.push_back({tau0 + k / (n * df), -2.0 * k, 0.1 * k, -0.2 * k, 0.37 * k});
    const arma::cx_cube H = frequency_response(ps, ArrayConfig{}, frequency_grid(142e9, bw, n), FsplMode::CenterFrequency);
    double mean_power = 0.0;
    for (arma::uword k = 0; k < n; ++k)
        mean_power += std::norm(H(0, 0, k));
    mean_power /= n;
    double tap_power = 0.0;
    for (const Tap &t : tap_delay_line(ps, ps.center_freq_hz))
        tap_power += std::norm(t.amplitude);
    CHECK(mean_power == Approx(tap_power).epsilon(1e-9));
}

TEST_CASE("narrowband limit removes the phase spread across the grid", "[synth]")
{
    const double tau = 300e-9, bw = 1.0;
    const arma::cx_cube H = frequency_response(single_path(tau, 0.0, 0.2), ArrayConfig{}, frequency_grid(142e9, bw, 16));
    double spread = 0.0;
    for (arma::uword k = 1; k < H.n_slices; ++k)
        spread = std::max(spread, std::abs(std::arg(H(0, 0, k) / H(0, 0, 0))));
    CHECK(spread < 2.0 * pi * bw * tau);
}

TEST_CASE("center-frequency FSPL keeps the magnitude flat", "[synth]")
{
    const arma::cx_cube H = frequency_response(single_path(50e-9, 0.0, 0.0), ArrayConfig{}, frequency_grid(142e9, 4e9, 8), FsplMode::CenterFrequency);
    for (arma::uword k = 1; k < H.n_slices; ++k)
        CHECK(std::abs(H(0, 0, k)) == Approx(std::abs(H(0, 0, 0))).epsilon(1e-14));
}

TEST_CASE("path sets and channels serialize", "[synth]")
{
    const Catalog &c = embedded_catalog();
    SynthesisConfig cfg;
    cfg.seed = 4;
    const PathSet ps = draw_paths(c.profile("Sello"), c.stats("Sello", Scenario::LOS), cfg, 30.0);
    const nlohmann::json j = ps;
    CHECK(nlohmann::json::parse(j.dump()).get<PathSet>() == ps);

    ArrayConfig arr;
    arr.n_tx = 3;
    arr.n_rx = 2;
    const auto grid = frequency_grid(143.1e9, 3.6e9, 5);
    const arma::cx_cube H = frequency_response(ps, arr, grid);
    std::stringstream buf;
    write_channel_binary(buf, H);
    const std::string bytes = buf.str();
    REQUIRE(bytes.size() == 12 + 8 * H.n_elem);
    CHECK(static_cast<unsigned char>(bytes[0]) == 5);
    CHECK(static_cast<unsigned char>(bytes[4]) == 2);
    CHECK(static_cast<unsigned char>(bytes[8]) == 3);
    // row-major [freq][rx][tx]: the second complex value is H(rx 0, tx 1, freq 0)
    float re1 = 0.0f;
    std::memcpy(&re1, bytes.data() + 12 + 8, 4);
    CHECK(re1 == static_cast<float>(H(0, 1, 0).real()));

    const arma::cx_cube back = read_channel_binary(buf);
    REQUIRE(back.n_slices == H.n_slices);
    for (arma::uword i = 0; i < H.n_elem; ++i)
        CHECK(std::abs(back(i) - H(i)) <= 1e-6 * std::abs(H(i)) + 1e-30);

    const nlohmann::json cj = channel_to_json(H, grid);
    CHECK(cj.at("n_freq") == 5);
    CHECK(cj.at("re").size() == H.n_elem);

    std::stringstream truncated(bytes.substr(0, 20));
    CHECK_THROWS_AS(read_channel_binary(truncated), ParseError);
}
