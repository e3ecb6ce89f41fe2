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

// Acceptance suite: each criterion prints its measurements followed by one PASS/FAIL line.
// The exit code is nonzero if any criterion fails.

#include "gbsm/errors.hpp"
#include "gbsm/metrics.hpp"
#include "gbsm/pipeline.hpp"
#include "gbsm/statdist.hpp"
#include "gbsm/synth.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

using namespace gbsm;

namespace
{
    constexpr double pi = std::numbers::pi;

    int failures = 0;

    void verdict(int id, const std::string &title, bool pass, double seconds)
    {
        std::printf("criterion %d %-34s %s (%.1f s)\n", id, title.c_str(), pass ? "PASS" : "FAIL", seconds);
        std::fflush(stdout);
        if (!pass)
            ++failures;
    }

    void run(int id, const std::string &title, const std::function<bool()> &body)
    {
        const auto t0 = std::chrono::steady_clock::now();
        bool pass = false;
        try
        {
            pass = body();
        }
        catch (const std::exception &e)
        {
            std::printf("  exception: %s\n", e.what());
        }
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        verdict(id, title, pass, s);
    }

    double fspl_oracle(long double d, long double f)
    {
        return static_cast<double>(20.0L * std::log10(4.0L * std::numbers::pi_v<long double> * f * d / 299792458.0L));
    }

    bool criterion_fspl()
    {
        const double l1 = fspl_db(1.0, 142e9);
        const double dd = fspl_db(2.0, 142e9) - l1;
        const double df = fspl_db(1.0, 284e9) - l1;
        std::printf("  fspl(1 m, 142 GHz) = %.6f dB (extended-precision oracle %.6f)\n", l1, fspl_oracle(1.0L, 142e9L));
        std::printf("  distance doubling +%.9f dB, frequency doubling +%.9f dB\n", dd, df);
        return std::abs(l1 - 75.49) <= 0.01 && std::abs(dd - 6.0206) <= 1e-6 && std::abs(df - 6.0206) <= 1e-6;
    }

    std::vector<DistSpec> engine_specs()
    {
        return {
            {DistFamily::Normal, {}, -30.0, 10.0},
            {DistFamily::Exponential, {}, 0.0, 50.52},
            {DistFamily::LogNormal, {0.37}, -35.5, 17.4},
            {DistFamily::Rayleigh, {}, -60.0, 15.0},
            {DistFamily::Rician, {1.5}, -50.0, 10.0},
            {DistFamily::Nakagami, {1.8}, -55.0, 20.0},
            {DistFamily::Gamma, {3.5}, -70.0, 6.0},
            {DistFamily::Beta, {2.5, 4.0}, -80.0, 70.0},
            {DistFamily::LogLogistic, {6.4}, -47.4, 21.7},
            {DistFamily::Weibull, {1.4}, 0.0, 60.0},
        };
    }

    bool criterion_engine()
    {
        bool pass = true;
        std::uint64_t seed = 100;
        for (const DistSpec &spec : engine_specs())
        {
            const auto big = sample(spec, 1000000, seed++);
            const double ks = ks_test(big, spec).statistic;

            const auto small = sample(spec, 100000, seed++);
            const DistSpec fit = fit_mle(spec.family, small);
            double worst = std::abs(fit.scale / spec.scale - 1.0);
            for (std::size_t i = 0; i < spec.shape.size(); ++i)
                worst = std::max(worst, std::abs(fit.shape[i] / spec.shape[i] - 1.0));
            const bool ok = ks < 0.005 && worst <= 0.03;
            pass = pass && ok;
            std::printf("  %-12s KS(1e6) = %.5f   worst relative shape/scale error (1e5 fit) = %.4f  %s\n",
                        std::string(family_name(spec.family)).c_str(), ks, worst, ok ? "ok" : "out of tolerance");
        }
        return pass;
    }

    bool criterion_catalog()
    {
        const Catalog &c = embedded_catalog();
        struct Expect
        {
            const char *location;
            Scenario sc;
            bool power;
            DistSpec spec;
        };
        const Expect expected[] = {
            {"Sello", Scenario::LOS, true, {DistFamily::LogNormal, {0.37}, -35.5, 17.4}},
            {"TUAS2", Scenario::NLOS, true, {DistFamily::LogLogistic, {6.4}, -47.4, 21.7}},
            {"Sello", Scenario::LOS, false, {DistFamily::Exponential, {}, 0.0, 50.52}},
            {"Campus", Scenario::LOS, false, {DistFamily::Exponential, {}, 0.0, 136.2}},
        };
        bool pass = true;
        for (const Expect &e : expected)
        {
            const auto &s = c.stats(e.location, e.sc);
            const DistSpec &got = e.power ? s.npd : s.ndd;
            const bool ok = got == e.spec;
            pass = pass && ok;
            std::printf("  %-6s %-4s %s = %s  %s\n", e.location, std::string(scenario_name(e.sc)).c_str(), e.power ? "NPD" : "NDD",
                        nlohmann::json(got).dump().c_str(), ok ? "ok" : "mismatch");
        }
        return pass;
    }

    bool criterion_med()
    {
        const Catalog &c = embedded_catalog();
        struct Cell
        {
            const char *location;
            Scenario sc;
            double published_model_ns;
        };
        const Cell cells[] = {
            {"Sello", Scenario::LOS, 113.2},   {"Airport", Scenario::LOS, 240.78}, {"TUAS2", Scenario::NLOS, 260.31},
            {"Campus", Scenario::LOS, 562.04}, {"City", Scenario::NLOS, 306.65},
        };
        std::printf("  %-8s %-5s %12s %12s %8s\n", "location", "scen", "model [ns]", "published", "ratio");
        bool pass = true;
        for (const Cell &cell : cells)
        {
            SynthesisConfig cfg;
            cfg.seed = 7;
            MedOptions o;
            o.n_draws = 10000;
            const MedSummary m = monte_carlo_med(c.profile(cell.location), c.stats(cell.location, cell.sc), cfg, o);
            const double ratio = m.mean_med_ns / cell.published_model_ns;
            const bool ok = ratio >= 0.7 && ratio <= 1.3;
            pass = pass && ok;
            std::printf("  %-8s %-5s %12.2f %12.2f %8.3f  %s\n", cell.location, std::string(scenario_name(cell.sc)).c_str(),
                        m.mean_med_ns, cell.published_model_ns, ratio, ok ? "within 30%" : "outside 30%");
        }
        return pass;
    }

    bool criterion_synthesis()
    {
        const Catalog &c = embedded_catalog();
        bool pass = true;

        // rank bound
        RandomStream rng(2024);
        int rank_violations = 0;
        const char *locations[] = {"Sello", "Airport", "TUAS", "TUAS2", "Campus", "City", "Residential"};
        for (int trial = 0; trial < 100; ++trial)
        {
            const char *loc = locations[rng.uniform_int(0, 6)];
            const Scenario sc = rng.uniform_int(0, 1) ? Scenario::NLOS : Scenario::LOS;
            SynthesisConfig cfg;
            cfg.seed = static_cast<std::uint64_t>(trial);
            cfg.nop_source = NopFixed{static_cast<int>(rng.uniform_int(1, 12))};
            ArrayConfig arr;
            arr.n_tx = rng.uniform_int(1, 8);
            arr.n_rx = rng.uniform_int(1, 8);
            const auto &p = c.profile(loc);
            const double d = p.link_distance_range_m.first + rng.uniform() * (p.link_distance_range_m.second - p.link_distance_range_m.first);
            const PathSet ps = draw_paths(p, c.stats(loc, sc), cfg, d);
            const arma::cx_cube H = frequency_response(ps, arr, frequency_grid(p.center_freq_hz, p.bandwidth_hz(), 16));
            const arma::uword bound = std::min<arma::uword>({ps.paths.size(), arr.n_rx, arr.n_tx});
            for (arma::uword k = 0; k < H.n_slices; ++k)
                rank_violations += arma::rank(arma::cx_mat(H.slice(k))) > bound;
        }
        std::printf("  rank bound violations over 100 configs: %d\n", rank_violations);
        pass = pass && rank_violations == 0;

        // phase slope of a single path
        PathSet one;
        one.center_freq_hz = 142e9;
        one.link_distance_m = 40.0;
        const double tau = 173.25e-9;
        one.paths.push_back({tau, -4.0, 0.2, 1.3, 2.1});
        const auto grid = frequency_grid(142e9, 4e9, 256);
        const arma::cx_cube H1 = frequency_response(one, ArrayConfig{}, grid);
        double slope_err = 0.0;
        for (std::size_t k = 1; k < grid.size(); ++k)
        {
            const double measured = std::arg(H1(0, 0, k) / H1(0, 0, k - 1));
            const double expected = std::remainder(-2.0 * pi * tau * (grid[k] - grid[k - 1]), 2.0 * pi);
            slope_err = std::max(slope_err, std::abs(std::remainder(measured - expected, 2.0 * pi)));
        }
        std::printf("  single-path phase step error: %.3e rad\n", slope_err);
        pass = pass && slope_err <= 1e-9;

        // opposite-phase twins
        PathSet twins = one;
        twins.paths.push_back(one.paths[0]);
        twins.paths[1].phase_rad = one.paths[0].phase_rad + pi;
        ArrayConfig arr;
        arr.n_tx = 4;
        arr.n_rx = 4;
        const double single = arma::abs(frequency_response(one, arr, grid)).max();
        const double residual = arma::abs(frequency_response(twins, arr, grid)).max();
        const double eps = std::numeric_limits<double>::epsilon();
        std::printf("  twin-path residual: %.3e of the single-path magnitude (%.1f machine epsilons)\n", residual / single,
                    residual / single / eps);
        pass = pass && residual <= 8.0 * eps * single;

        // thread-count reproducibility
        SynthesisConfig cfg;
        cfg.seed = 77;
        MedOptions o;
        o.n_draws = 500;
        o.threads = 1;
        const MedSummary a = monte_carlo_med(c.profile("City"), c.stats("City", Scenario::LOS), cfg, o);
        o.threads = 4;
        const MedSummary b = monte_carlo_med(c.profile("City"), c.stats("City", Scenario::LOS), cfg, o);
        const bool med_same = a.mean_med_ns == b.mean_med_ns && a.per_link_med_ns == b.per_link_med_ns &&
                              a.surviving_path_fraction == b.surviving_path_fraction;

        CellData cell;
        cell.location = "Sello";
        cell.npd = sample(c.stats("Sello", Scenario::LOS).npd, 304, 5);
        cell.ndd = sample(c.stats("Sello", Scenario::LOS).ndd, 304, 6);
        cell.nop = sample(DistSpec{DistFamily::Normal, {}, 19.0, 8.0}, 16, 7);
        cell.points = 304;
        cell.links = 16;
        FitOptions fo;
        fo.threads = 1;
        const FitReport r1 = run_fit_pipeline(std::vector<CellData>{cell}, fo);
        fo.threads = 4;
        const FitReport r4 = run_fit_pipeline(std::vector<CellData>{cell}, fo);
        const bool fit_same = emit_report(r1, ReportFormat::Csv) == emit_report(r4, ReportFormat::Csv);
        std::printf("  1 vs 4 threads: Monte Carlo MED %s, fit report %s\n", med_same ? "identical" : "DIFFERENT",
                    fit_same ? "identical" : "DIFFERENT");
        return pass && med_same && fit_same;
    }

    bool criterion_normalization()
    {
        const Catalog &c = embedded_catalog();
        bool pass = true;

        // pure free-space links
        int nonzero = 0;
        for (const std::string &loc : c.location_names())
        {
            const auto &p = c.profile(loc);
            for (double d : {1.0, 3.7, 25.0, 99.9, 170.0})
            {
                const double tau = d / speed_of_light;
                nonzero += normalize_power(free_space_power_dbm(p, tau), tau * 1e9, p) != 0.0;
            }
        }
        std::printf("  pure free-space links not at exactly 0 dB: %d of 35\n", nonzero);
        pass = pass && nonzero == 0;

        // first arrival of every synthetic link
        int bad_first = 0, links = 0;
        for (const std::string &loc : c.location_names())
            for (Scenario sc : c.scenarios(loc))
                for (std::uint64_t r = 0; r < 20; ++r)
                {
                    SynthesisConfig cfg;
                    const PathSet ps = draw_paths(c.profile(loc), c.stats(loc, sc), cfg, 30.0, r);
                    std::vector<double> ns;
                    for (const Path &path : ps.paths)
                        ns.push_back(path.delay_s * 1e9);
                    const auto nd = normalize_delay(ns);
                    ++links;
                    bad_first += nd.front() != 0.0;
                }
        std::printf("  links whose first normalized delay is not 0: %d of %d\n", bad_first, links);
        pass = pass && bad_first == 0;

        // translation invariance of the maximum excess delay
        RandomStream rng(3);
        double worst_shift = 0.0;
        for (int t = 0; t < 200; ++t)
        {
            std::vector<double> d(2 + rng.uniform_int(0, 40));
            for (double &x : d)
                x = 10.0 + 500.0 * rng.uniform();
            const double base = max_excess_delay(d);
            const double shift = 1000.0 * rng.uniform();
            for (double &x : d)
                x += shift;
            worst_shift = std::max(worst_shift, std::abs(max_excess_delay(d) - base) / base);
        }
        std::printf("  MED translation invariance, worst relative change: %.2e\n", worst_shift);
        pass = pass && worst_shift <= 1e-12;

        // monotone in the delay scale, default threshold, common random numbers
        ScenarioStats s = c.stats("Sello", Scenario::LOS);
        SynthesisConfig cfg;
        cfg.seed = 9;
        MedOptions o;
        o.n_draws = 2000;
        std::vector<double> meds;
        std::printf("  NDD scale sweep (ns -> mean MED ns):");
        for (double scale : {10.0, 25.0, 50.52, 75.0, 100.0})
        {
            s.ndd.scale = scale;
            meds.push_back(monte_carlo_med(c.profile("Sello"), s, cfg, o).mean_med_ns);
            std::printf(" %.2f -> %.2f;", scale, meds.back());
        }
        std::printf("\n");
        pass = pass && std::is_sorted(meds.begin(), meds.end());
        return pass;
    }

    bool criterion_self_consistency()
    {
        const DistSpec truth = embedded_catalog().stats("Sello", Scenario::LOS).npd;
        const auto families = default_power_families();
        int wins = 0;
        std::vector<int> winners(families.size(), 0);
        for (std::uint64_t rep = 0; rep < 100; ++rep)
        {
            const auto x = sample(truth, 304, 5000 + rep);
            double best_ks = std::numeric_limits<double>::infinity();
            std::size_t best = 0;
            for (std::size_t i = 0; i < families.size(); ++i)
            {
                try
                {
                    const GofResult g = fit_and_test(families[i], x);
                    if (g.ks_statistic < best_ks)
                    {
                        best_ks = g.ks_statistic;
                        best = i;
                    }
                }
                catch (const FitError &)
                {
                }
            }
            ++winners[best];
            wins += families[best] == truth.family;
        }
        std::printf("  best-KS family over 100 repetitions of 304 %s samples:", std::string(family_name(truth.family)).c_str());
        for (std::size_t i = 0; i < families.size(); ++i)
            if (winners[i])
                std::printf(" %s %d;", std::string(family_name(families[i])).c_str(), winners[i]);
        std::printf("\n  generating family recovered in %d of 100 (required: 95)\n", wins);
        return wins >= 95;
    }
}

int main()
{
    run(1, "FSPL oracle", criterion_fspl);
    run(2, "distribution engine", criterion_engine);
    run(3, "catalog fidelity", criterion_catalog);
    run(4, "MED reproduction", criterion_med);
    run(5, "channel synthesis properties", criterion_synthesis);
    run(6, "normalization properties", criterion_normalization);
    run(7, "pipeline self-consistency", criterion_self_consistency);
    std::printf("%d of 7 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
