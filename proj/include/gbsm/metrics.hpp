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

#ifndef GBSM_METRICS_HPP
#define GBSM_METRICS_HPP

#include "gbsm/catalog.hpp"
#include "gbsm/synth.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gbsm
{
    // One measured multipath component
    struct MpcRecord
    {
        std::string location;
        std::string link_id;
        Scenario scenario = Scenario::LOS;
        double distance_m = 0.0;
        double delay_ns = 0.0;
        double power_dbm = 0.0;
        std::optional<double> aoa_deg;
        std::optional<double> aod_deg;
    };

    // Received power of a path that suffers only free-space loss:
    //   EIRP [+ Rx gain] - FSPL(c tau, fc)
    double free_space_power_dbm(const LocationProfile &profile, double delay_s, bool include_rx_gain = true);

    // Excess gain over free space, in dB: measured power minus free_space_power_dbm at the same delay.
    // A path that suffered only free-space loss maps to 0 dB. Throws DomainError for delay <= 0.
    double normalize_power(const MpcRecord &rec, const LocationProfile &profile);
    double normalize_power(double power_dbm, double delay_ns, const LocationProfile &profile);

    // Delays relative to the first arrival of the link. Throws UsageError for an empty group.
    std::vector<double> normalize_delay(std::span<const double> delays_ns);

    struct PdpPoint
    {
        double delay_ns = 0.0;
        double normalized_power_db = 0.0;
    };

    // Power delay profile, sorted by delay
    std::vector<PdpPoint> pdp(std::span<const MpcRecord> records, const LocationProfile &profile);
    std::vector<PdpPoint> pdp(const PathSet &ps);

    struct PathPower
    {
        double delay_s = 0.0;
        double power_dbm = 0.0;
    };

    // Absolute received power of every path of a realization
    std::vector<PathPower> received_powers(const PathSet &ps, const LocationProfile &profile, bool include_rx_gain = true);

    // Paths with power >= threshold, in their original order
    std::vector<PathPower> apply_noise_floor(std::span<const PathPower> paths, double threshold_dbm);

    // Paths within `range_db` of the strongest path, in their original order
    std::vector<PathPower> apply_dynamic_range(std::span<const PathPower> paths, double range_db);

    // Maximum excess delay: last arrival minus first arrival. Throws NotAvailableError if empty.
    double max_excess_delay(std::span<const double> delays);
    double max_excess_delay(std::span<const PathPower> paths); // seconds

    struct MedOptions
    {
        std::size_t n_draws = 10000;           // realizations per link
        std::vector<double> link_distances_m;  // empty: default_link_distances()
        std::vector<int> per_link_nop;         // optional path count per link (overrides cfg.nop_source)
        std::optional<double> threshold_dbm;   // empty: profile noise floor + margin
        bool include_rx_gain = true;
        std::optional<double> dynamic_range_db; // second filter relative to the strongest path
        unsigned threads = 0;                   // 0: hardware concurrency
    };

    struct MedSummary
    {
        double mean_med_ns = 0.0;
        std::vector<double> per_link_med_ns;  // links with at least one surviving draw
        std::vector<double> link_distances_m; // matching per_link_med_ns
        std::size_t n_draws = 0;
        double surviving_path_fraction = 0.0;
        std::size_t extinguished_draws = 0;   // realizations in which no path survived
        std::size_t excluded_links = 0;       // links in which no realization had a survivor
    };

    // Link distances used when none are given: one per measured link, evenly spread over the
    // campaign's distance range.
    std::vector<double> default_link_distances(const LocationProfile &profile, const ScenarioStats &stats);

    // For every link and draw: draw a realization, convert to absolute powers, drop paths below the
    // noise threshold and record the maximum excess delay. Per-link values average the draws with
    // at least one survivor; the result averages the links. Realization index link * n_draws + draw
    // fixes the random numbers, so the result does not depend on the thread count.
    MedSummary monte_carlo_med(const LocationProfile &profile, const ScenarioStats &stats, const SynthesisConfig &cfg,
                               const MedOptions &options = {});
    MedSummary monte_carlo_med(const LocationProfile &profile, const ScenarioStats &stats, const SynthesisConfig &cfg,
                               const std::vector<double> &link_distances_m, std::size_t n_draws);
}

#endif
