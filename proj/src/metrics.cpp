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

#include "gbsm/metrics.hpp"
#include "gbsm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

namespace gbsm
{
    double free_space_power_dbm(const LocationProfile &profile, double delay_s, bool include_rx_gain)
    {
        if (!(delay_s > 0.0))
            throw DomainError("path delay must be positive");
        return profile.eirp_dbm + (include_rx_gain ? profile.rx_gain_dbi : 0.0) -
               fspl_db(speed_of_light * delay_s, profile.center_freq_hz);
    }

    double normalize_power(double power_dbm, double delay_ns, const LocationProfile &profile)
    {
        if (!(delay_ns > 0.0))
            throw DomainError("cannot normalize the power of a path with non-positive delay");
        return power_dbm - free_space_power_dbm(profile, delay_ns * 1e-9);
    }

    double normalize_power(const MpcRecord &rec, const LocationProfile &profile)
    {
        return normalize_power(rec.power_dbm, rec.delay_ns, profile);
    }

    std::vector<double> normalize_delay(std::span<const double> delays_ns)
    {
        if (delays_ns.empty())
            throw UsageError("cannot normalize the delays of an empty link");
        const double first = *std::min_element(delays_ns.begin(), delays_ns.end());
        std::vector<double> out(delays_ns.size());
        std::transform(delays_ns.begin(), delays_ns.end(), out.begin(), [first](double d) { return d - first; });
        return out;
    }

    std::vector<PdpPoint> pdp(std::span<const MpcRecord> records, const LocationProfile &profile)
    {
        std::vector<PdpPoint> out;
        out.reserve(records.size());
        for (const MpcRecord &r : records)
            out.push_back({r.delay_ns, normalize_power(r, profile)});
        std::stable_sort(out.begin(), out.end(), [](const PdpPoint &a, const PdpPoint &b) { return a.delay_ns < b.delay_ns; });
        return out;
    }

    std::vector<PdpPoint> pdp(const PathSet &ps)
    {
        std::vector<PdpPoint> out;
        out.reserve(ps.paths.size());
        for (const Path &p : ps.paths)
            out.push_back({p.delay_s * 1e9, p.excess_gain_db});
        std::stable_sort(out.begin(), out.end(), [](const PdpPoint &a, const PdpPoint &b) { return a.delay_ns < b.delay_ns; });
        return out;
    }

    std::vector<PathPower> received_powers(const PathSet &ps, const LocationProfile &profile, bool include_rx_gain)
    {
        std::vector<PathPower> out;
        out.reserve(ps.paths.size());
        for (const Path &p : ps.paths)
            out.push_back({p.delay_s, free_space_power_dbm(profile, p.delay_s, include_rx_gain) + p.excess_gain_db});
        return out;
    }

    std::vector<PathPower> apply_noise_floor(std::span<const PathPower> paths, double threshold_dbm)
    {
        if (std::isnan(threshold_dbm))
            throw ParameterError("noise threshold must not be NaN");
        std::vector<PathPower> out;
        std::copy_if(paths.begin(), paths.end(), std::back_inserter(out),
                     [threshold_dbm](const PathPower &p) { return p.power_dbm >= threshold_dbm; });
        return out;
    }

    std::vector<PathPower> apply_dynamic_range(std::span<const PathPower> paths, double range_db)
    {
        if (paths.empty())
            return {};
        const double peak = std::max_element(paths.begin(), paths.end(), [](const PathPower &a, const PathPower &b)
                                             { return a.power_dbm < b.power_dbm; })->power_dbm;
        return apply_noise_floor(paths, peak - range_db);
    }

    double max_excess_delay(std::span<const double> delays)
    {
        if (delays.empty())
            throw NotAvailableError("maximum excess delay is undefined without surviving paths");
        const auto [lo, hi] = std::minmax_element(delays.begin(), delays.end());
        return *hi - *lo;
    }

    double max_excess_delay(std::span<const PathPower> paths)
    {
        if (paths.empty())
            throw NotAvailableError("maximum excess delay is undefined without surviving paths");
        const auto [lo, hi] = std::minmax_element(paths.begin(), paths.end(), [](const PathPower &a, const PathPower &b)
                                                  { return a.delay_s < b.delay_s; });
        return hi->delay_s - lo->delay_s;
    }

    std::vector<double> default_link_distances(const LocationProfile &profile, const ScenarioStats &stats)
    {
        const std::size_t n = static_cast<std::size_t>(std::max(stats.measurements, 1));
        const auto [lo, hi] = profile.link_distance_range_m;
        if (n == 1)
            return {0.5 * (lo + hi)};
        std::vector<double> d(n);
        for (std::size_t i = 0; i < n; ++i)
            d[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
        return d;
    }

    namespace
    {
        struct LinkTally
        {
            double med_sum_s = 0.0;
            std::size_t med_count = 0;
            std::size_t drawn = 0;
            std::size_t survived = 0;
        };
    }

    MedSummary monte_carlo_med(const LocationProfile &profile, const ScenarioStats &stats, const SynthesisConfig &cfg,
                               const MedOptions &options)
    {
        if (options.n_draws < 1)
            throw UsageError("Monte Carlo MED needs at least one draw");
        cfg.validate();
        const std::vector<double> distances =
            options.link_distances_m.empty() ? default_link_distances(profile, stats) : options.link_distances_m;
        for (double d : distances)
            if (!(d > 0.0))
                throw ParameterError("link distances must be positive");
        if (!options.per_link_nop.empty() && options.per_link_nop.size() != distances.size())
            throw ParameterError("per-link path counts must match the number of link distances");
        const double threshold = options.threshold_dbm.value_or(profile.noise_threshold_dbm());

        const std::size_t n_links = distances.size();
        const std::size_t total = n_links * options.n_draws;

        // Each realization's outcome lands in its own slot; the reduction below runs in index order.
        std::vector<double> med_s(total, std::numeric_limits<double>::quiet_NaN());
        std::vector<std::uint32_t> drawn(total, 0), survived(total, 0);

        auto work = [&](std::size_t begin, std::size_t end)
        {
            for (std::size_t r = begin; r < end; ++r)
            {
                const std::size_t link = r / options.n_draws;
                SynthesisConfig c = cfg;
                if (!options.per_link_nop.empty())
                {
                    // A measured link without paths contributes nothing
                    if (options.per_link_nop[link] < 1)
                        continue;
                    c.nop_source = NopFixed{options.per_link_nop[link]};
                }
                const PathSet ps = draw_paths(profile, stats, c, distances[link], r);
                std::vector<PathPower> kept = apply_noise_floor(received_powers(ps, profile, options.include_rx_gain), threshold);
                if (options.dynamic_range_db)
                    kept = apply_dynamic_range(kept, *options.dynamic_range_db);
                drawn[r] = static_cast<std::uint32_t>(ps.paths.size());
                survived[r] = static_cast<std::uint32_t>(kept.size());
                if (!kept.empty())
                    med_s[r] = max_excess_delay(std::span<const PathPower>(kept));
            }
        };

        unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
        threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(total, 1)));
        if (threads <= 1)
            work(0, total);
        else
        {
            std::vector<std::thread> pool;
            const std::size_t chunk = (total + threads - 1) / threads;
            for (unsigned t = 0; t < threads; ++t)
            {
                const std::size_t b = std::min(total, t * chunk), e = std::min(total, b + chunk);
                pool.emplace_back(work, b, e);
            }
            for (auto &th : pool)
                th.join();
        }

        MedSummary out;
        out.n_draws = options.n_draws;
        std::size_t all_drawn = 0, all_survived = 0;
        for (std::size_t link = 0; link < n_links; ++link)
        {
            LinkTally t;
            for (std::size_t k = 0; k < options.n_draws; ++k)
            {
                const std::size_t r = link * options.n_draws + k;
                t.drawn += drawn[r];
                t.survived += survived[r];
                if (!std::isnan(med_s[r]))
                {
                    t.med_sum_s += med_s[r];
                    ++t.med_count;
                }
                else if (drawn[r] > 0)
                    ++out.extinguished_draws;
            }
            all_drawn += t.drawn;
            all_survived += t.survived;
            if (t.med_count == 0)
            {
                ++out.excluded_links;
                continue;
            }
            out.per_link_med_ns.push_back(t.med_sum_s / static_cast<double>(t.med_count) * 1e9);
            out.link_distances_m.push_back(distances[link]);
        }
        out.surviving_path_fraction = all_drawn ? static_cast<double>(all_survived) / static_cast<double>(all_drawn) : 0.0;
        if (out.per_link_med_ns.empty())
            out.mean_med_ns = std::numeric_limits<double>::quiet_NaN();
        else
        {
            double s = 0.0;
            for (double v : out.per_link_med_ns)
                s += v;
            out.mean_med_ns = s / static_cast<double>(out.per_link_med_ns.size());
        }
        return out;
    }

    MedSummary monte_carlo_med(const LocationProfile &profile, const ScenarioStats &stats, const SynthesisConfig &cfg,
                               const std::vector<double> &link_distances_m, std::size_t n_draws)
    {
        MedOptions o;
        o.link_distances_m = link_distances_m;
        o.n_draws = n_draws;
        return monte_carlo_med(profile, stats, cfg, o);
    }
}
