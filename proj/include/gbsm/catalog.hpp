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

#ifndef GBSM_CATALOG_HPP
#define GBSM_CATALOG_HPP

#include "gbsm/statdist.hpp"

#include <json.hpp>

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gbsm
{
    enum class Environment
    {
        Indoor,
        Outdoor
    };

    enum class Scenario
    {
        LOS,
        NLOS
    };

    std::string_view scenario_name(Scenario s) noexcept;                 // "LOS" / "NLOS"
    Scenario parse_scenario(std::string_view name);                      // case-insensitive
    std::string_view environment_name(Environment e) noexcept;           // "indoor" / "outdoor"

    // Campaign constants of one measurement site
    struct LocationProfile
    {
        std::string name;
        Environment environment = Environment::Indoor;
        std::pair<double, double> rf_band_hz{0.0, 0.0};
        double center_freq_hz = 0.0;
        double eirp_dbm = 0.0;
        double tx_gain_dbi = 0.0;
        double rx_gain_dbi = 0.0;
        double noise_floor_dbm = -128.0;
        double noise_margin_db = 10.0;
        std::pair<double, double> link_distance_range_m{0.0, 0.0};
        double tx_height_m = 0.0;
        double rx_height_m = 0.0;
        std::string rx_azimuth_range_deg;
        double azimuth_step_deg = 0.0;
        std::string notes;

        double bandwidth_hz() const { return rf_band_hz.second - rf_band_hz.first; }
        double noise_threshold_dbm() const { return noise_floor_dbm + noise_margin_db; }
    };

    struct NopStats
    {
        int max = 0;
        int min = 0;
        double mean = 0.0;
    };

    // One row of a published goodness-of-fit table. Missing cells are empty optionals.
    struct ReferenceFit
    {
        std::string quantity; // "npd", "ndd" or "nop"
        DistFamily family = DistFamily::Normal;
        std::optional<double> ks_statistic;
        std::optional<double> p_value;
        std::optional<double> qq_correlation;
        std::optional<double> loc;
        std::optional<double> scale;
        std::vector<std::optional<double>> shape;
        std::string note;

        // Complete DistSpec if every parameter is present, else nullopt
        std::optional<DistSpec> spec() const;
    };

    struct ScenarioStats
    {
        Scenario scenario = Scenario::LOS;
        DistSpec npd; // normalized power, dB
        DistSpec ndd; // normalized delay, ns, loc = 0
        NopStats nop;
        int data_points = 0;
        int measurements = 0;
        std::optional<double> med_empirical_ns;
        std::optional<double> med_model_ns;
        bool low_confidence = false;
        std::vector<ReferenceFit> reference_fits;
    };

    struct MedReference
    {
        double empirical_ns = 0.0;
        double model_ns = 0.0;
    };

    class Catalog
    {
    public:
        Catalog() = default;

        // Parses and validates. Schema violations throw ParseError naming the JSON path.
        static Catalog from_json(const nlohmann::json &j);
        static Catalog load(std::istream &in);
        static Catalog load_file(const std::string &path);

        nlohmann::json to_json() const;
        std::string dump() const; // canonical form: sorted keys, 2-space indent, trailing newline

        std::vector<std::string> location_names() const; // in catalog order
        bool has_location(std::string_view name) const;
        std::vector<Scenario> scenarios(std::string_view location) const;

        // Lookups are case-insensitive on the location name and throw LookupError for unknown keys
        const LocationProfile &profile(std::string_view location) const;
        const ScenarioStats &stats(std::string_view location, Scenario scenario) const;

        // Throws NotAvailableError when the published table has no entry for this cell
        MedReference med_reference(std::string_view location, Scenario scenario) const;

        // NPD family used for synthesis: LogLogistic for indoor NLOS, LogNormal otherwise
        DistFamily best_fit_policy(std::string_view location, Scenario scenario) const;
        // NDD family used for synthesis (always Exponential)
        DistFamily ndd_policy(std::string_view location, Scenario scenario) const;

    private:
        struct Entry
        {
            LocationProfile profile;
            std::map<Scenario, ScenarioStats> scenarios;
        };
        const Entry &entry(std::string_view location) const;

        int schema_version_ = 1;
        std::vector<Entry> entries_;
    };

    // Catalog compiled into the library, or the file named by the GBSM_CATALOG environment variable
    const Catalog &default_catalog();
    const Catalog &embedded_catalog();
}

#endif
