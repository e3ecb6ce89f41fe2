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

#include "gbsm/catalog.hpp"
#include "gbsm/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace gbsm::detail
{
    extern const std::string_view embedded_catalog_json;
}

namespace gbsm
{
    namespace
    {
        using nlohmann::json;

        std::string lower(std::string_view s)
        {
            std::string out(s);
            std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
            return out;
        }

        // Thin cursor over a JSON value that remembers where it is, for error messages
        class Node
        {
        public:
            Node(const json &j, std::string path) : j_(j), path_(std::move(path)) {}

            const json &value() const { return j_; }
            const std::string &path() const { return path_; }

            [[noreturn]] void fail(const std::string &what) const { throw ParseError(path_, what); }

            Node at(const char *key) const
            {
                if (!j_.is_object())
                    fail("expected an object");
                auto it = j_.find(key);
                if (it == j_.end())
                    throw ParseError(path_ + "." + key, "missing required field");
                return {*it, path_ + "." + key};
            }

            bool has(const char *key) const { return j_.is_object() && j_.contains(key); }

            Node at(std::size_t i) const { return {j_.at(i), path_ + "[" + std::to_string(i) + "]"}; }

            std::size_t array_size() const
            {
                if (!j_.is_array())
                    fail("expected an array");
                return j_.size();
            }

            double number() const
            {
                if (!j_.is_number())
                    fail("expected a number");
                return j_.get<double>();
            }

            std::optional<double> optional_number() const
            {
                if (j_.is_null())
                    return std::nullopt;
                return number();
            }

            int integer() const
            {
                if (!j_.is_number_integer())
                    fail("expected an integer");
                return j_.get<int>();
            }

            std::string string() const
            {
                if (!j_.is_string())
                    fail("expected a string");
                return j_.get<std::string>();
            }

            bool boolean() const
            {
                if (!j_.is_boolean())
                    fail("expected a boolean");
                return j_.get<bool>();
            }

            std::pair<double, double> range() const
            {
                if (array_size() != 2)
                    fail("expected a two-element array");
                const double lo = at(std::size_t{0}).number(), hi = at(std::size_t{1}).number();
                if (!(lo < hi))
                    fail("range must satisfy low < high");
                return {lo, hi};
            }

            DistSpec dist() const
            {
                DistSpec spec;
                try
                {
                    spec.family = parse_family(at("family").string());
                }
                catch (const ParameterError &e)
                {
                    at("family").fail(e.what());
                }
                spec.loc = at("loc").number();
                spec.scale = at("scale").number();
                const Node shape = at("shape");
                for (std::size_t i = 0; i < shape.array_size(); ++i)
                    spec.shape.push_back(shape.at(i).number());
                try
                {
                    validate(spec);
                }
                catch (const ParameterError &e)
                {
                    fail(e.what());
                }
                return spec;
            }

        private:
            const json &j_;
            std::string path_;
        };

        json opt(const std::optional<double> &v)
        {
            return v ? json(*v) : json(nullptr);
        }

        ReferenceFit parse_reference(const Node &n)
        {
            ReferenceFit r;
            r.quantity = n.at("quantity").string();
            if (r.quantity != "npd" && r.quantity != "ndd" && r.quantity != "nop")
                n.at("quantity").fail("expected one of npd, ndd, nop");
            try
            {
                r.family = parse_family(n.at("family").string());
            }
            catch (const ParameterError &e)
            {
                n.at("family").fail(e.what());
            }
            r.ks_statistic = n.at("ks_statistic").optional_number();
            r.p_value = n.at("p_value").optional_number();
            r.qq_correlation = n.at("qq_correlation").optional_number();
            r.loc = n.at("loc").optional_number();
            r.scale = n.at("scale").optional_number();
            const Node shape = n.at("shape");
            for (std::size_t i = 0; i < shape.array_size(); ++i)
                r.shape.push_back(shape.at(i).optional_number());
            if (r.shape.size() != shape_count(r.family))
                shape.fail("wrong number of shape entries for " + std::string(family_name(r.family)));
            if (n.has("note"))
                r.note = n.at("note").string();
            return r;
        }

        json reference_to_json(const ReferenceFit &r)
        {
            json shape = json::array();
            for (const auto &s : r.shape)
                shape.push_back(opt(s));
            json j = {{"quantity", r.quantity},
                      {"family", std::string(family_name(r.family))},
                      {"ks_statistic", opt(r.ks_statistic)},
                      {"p_value", opt(r.p_value)},
                      {"qq_correlation", opt(r.qq_correlation)},
                      {"loc", opt(r.loc)},
                      {"scale", opt(r.scale)},
                      {"shape", shape}};
            if (!r.note.empty())
                j["note"] = r.note;
            return j;
        }

        ScenarioStats parse_stats(const Node &n, Scenario scenario)
        {
            ScenarioStats s;
            s.scenario = scenario;
            s.npd = n.at("npd").dist();
            s.ndd = n.at("ndd").dist();
            if (s.ndd.loc != 0.0)
                n.at("ndd").at("loc").fail("normalized-delay distributions must have loc = 0");
            const Node nop = n.at("nop");
            s.nop.max = nop.at("max").integer();
            s.nop.min = nop.at("min").integer();
            s.nop.mean = nop.at("mean").number();
            if (!(s.nop.min <= s.nop.mean && s.nop.mean <= s.nop.max) || s.nop.min < 0)
                nop.fail("expected 0 <= min <= mean <= max");
            s.data_points = n.at("data_points").integer();
            s.measurements = n.at("measurements").integer();
            if (s.measurements < 0 || s.data_points < s.measurements)
                n.fail("expected data_points >= measurements >= 0");
            s.med_empirical_ns = n.at("med_empirical_ns").optional_number();
            s.med_model_ns = n.at("med_model_ns").optional_number();
            s.low_confidence = n.at("low_confidence").boolean();
            const Node refs = n.at("reference_fits");
            for (std::size_t i = 0; i < refs.array_size(); ++i)
                s.reference_fits.push_back(parse_reference(refs.at(i)));
            return s;
        }

        json dist_json(const DistSpec &d)
        {
            json j;
            gbsm::to_json(j, d);
            return j;
        }

        LocationProfile parse_profile(const Node &n)
        {
            LocationProfile p;
            p.name = n.at("name").string();
            if (p.name.empty())
                n.at("name").fail("location name must not be empty");
            const std::string env = n.at("environment").string();
            if (env == "indoor")
                p.environment = Environment::Indoor;
            else if (env == "outdoor")
                p.environment = Environment::Outdoor;
            else
                n.at("environment").fail("expected 'indoor' or 'outdoor'");
            p.rf_band_hz = n.at("rf_band_hz").range();
            p.center_freq_hz = n.at("center_freq_hz").number();
            if (!(p.center_freq_hz >= p.rf_band_hz.first && p.center_freq_hz <= p.rf_band_hz.second))
                n.at("center_freq_hz").fail("center frequency lies outside the RF band");
            p.eirp_dbm = n.at("eirp_dbm").number();
            p.tx_gain_dbi = n.at("tx_gain_dbi").number();
            p.rx_gain_dbi = n.at("rx_gain_dbi").number();
            p.noise_floor_dbm = n.at("noise_floor_dbm").number();
            p.noise_margin_db = n.at("noise_margin_db").number();
            p.link_distance_range_m = n.at("link_distance_range_m").range();
            if (!(p.link_distance_range_m.first > 0.0))
                n.at("link_distance_range_m").fail("link distances must be positive");
            p.tx_height_m = n.at("tx_height_m").number();
            p.rx_height_m = n.at("rx_height_m").number();
            p.rx_azimuth_range_deg = n.at("rx_azimuth_range_deg").string();
            p.azimuth_step_deg = n.at("azimuth_step_deg").number();
            if (n.has("notes"))
                p.notes = n.at("notes").string();
            return p;
        }

        json profile_json(const LocationProfile &p)
        {
            json j = {{"name", p.name},
                      {"environment", std::string(environment_name(p.environment))},
                      {"rf_band_hz", {p.rf_band_hz.first, p.rf_band_hz.second}},
                      {"center_freq_hz", p.center_freq_hz},
                      {"eirp_dbm", p.eirp_dbm},
                      {"tx_gain_dbi", p.tx_gain_dbi},
                      {"rx_gain_dbi", p.rx_gain_dbi},
                      {"noise_floor_dbm", p.noise_floor_dbm},
                      {"noise_margin_db", p.noise_margin_db},
                      {"link_distance_range_m", {p.link_distance_range_m.first, p.link_distance_range_m.second}},
                      {"tx_height_m", p.tx_height_m},
                      {"rx_height_m", p.rx_height_m},
                      {"rx_azimuth_range_deg", p.rx_azimuth_range_deg},
                      {"azimuth_step_deg", p.azimuth_step_deg}};
            if (!p.notes.empty())
                j["notes"] = p.notes;
            return j;
        }
    }

    std::string_view scenario_name(Scenario s) noexcept
    {
        return s == Scenario::LOS ? "LOS" : "NLOS";
    }

    Scenario parse_scenario(std::string_view name)
    {
        const std::string key = lower(name);
        if (key == "los")
            return Scenario::LOS;
        if (key == "nlos")
            return Scenario::NLOS;
        throw LookupError("unknown scenario '" + std::string(name) + "' (expected LOS or NLOS)");
    }

    std::string_view environment_name(Environment e) noexcept
    {
        return e == Environment::Indoor ? "indoor" : "outdoor";
    }

    std::optional<DistSpec> ReferenceFit::spec() const
    {
        if (!loc || !scale)
            return std::nullopt;
        DistSpec d{family, {}, *loc, *scale};
        for (const auto &s : shape)
        {
            if (!s)
                return std::nullopt;
            d.shape.push_back(*s);
        }
        try
        {
            validate(d);
        }
        catch (const ParameterError &)
        {
            return std::nullopt;
        }
        return d;
    }

    Catalog Catalog::from_json(const nlohmann::json &j)
    {
        const Node root(j, "$");
        Catalog c;
        c.schema_version_ = root.at("schema_version").integer();
        if (c.schema_version_ != 1)
            root.at("schema_version").fail("unsupported schema version " + std::to_string(c.schema_version_));
        const Node locs = root.at("locations");
        for (std::size_t i = 0; i < locs.array_size(); ++i)
        {
            const Node loc = locs.at(i);
            Entry e;
            e.profile = parse_profile(loc);
            if (c.has_location(e.profile.name))
                loc.at("name").fail("duplicate location '" + e.profile.name + "'");
            const Node scen = loc.at("scenarios");
            if (!scen.value().is_object() || scen.value().empty())
                scen.fail("expected a non-empty object keyed by LOS/NLOS");
            for (const auto &[key, val] : scen.value().items())
            {
                Scenario s;
                try
                {
                    s = parse_scenario(key);
                }
                catch (const LookupError &err)
                {
                    throw ParseError(scen.path() + "." + key, err.what());
                }
                e.scenarios.emplace(s, parse_stats(Node(val, scen.path() + "." + key), s));
            }
            c.entries_.push_back(std::move(e));
        }
        return c;
    }

    Catalog Catalog::load(std::istream &in)
    {
        json j;
        try
        {
            j = json::parse(in);
        }
        catch (const json::parse_error &e)
        {
            throw ParseError("$", std::string("malformed JSON: ") + e.what());
        }
        return from_json(j);
    }

    Catalog Catalog::load_file(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
            throw ParseError(path, "cannot open catalog file");
        return load(in);
    }

    nlohmann::json Catalog::to_json() const
    {
        json locs = json::array();
        for (const auto &e : entries_)
        {
            json j = profile_json(e.profile);
            json scen = json::object();
            for (const auto &[s, st] : e.scenarios)
            {
                json refs = json::array();
                for (const auto &r : st.reference_fits)
                    refs.push_back(reference_to_json(r));
                scen[std::string(scenario_name(s))] = {
                    {"npd", dist_json(st.npd)},
                    {"ndd", dist_json(st.ndd)},
                    {"nop", {{"max", st.nop.max}, {"min", st.nop.min}, {"mean", st.nop.mean}}},
                    {"data_points", st.data_points},
                    {"measurements", st.measurements},
                    {"med_empirical_ns", opt(st.med_empirical_ns)},
                    {"med_model_ns", opt(st.med_model_ns)},
                    {"low_confidence", st.low_confidence},
                    {"reference_fits", refs}};
            }
            j["scenarios"] = scen;
            locs.push_back(std::move(j));
        }
        return {{"schema_version", schema_version_}, {"locations", locs}};
    }

    std::string Catalog::dump() const
    {
        // nlohmann::json objects are std::map backed, so keys come out sorted
        return to_json().dump(2) + "\n";
    }

    std::vector<std::string> Catalog::location_names() const
    {
        std::vector<std::string> out;
        for (const auto &e : entries_)
            out.push_back(e.profile.name);
        return out;
    }

    bool Catalog::has_location(std::string_view name) const
    {
        const std::string key = lower(name);
        return std::any_of(entries_.begin(), entries_.end(), [&](const Entry &e) { return lower(e.profile.name) == key; });
    }

    std::vector<Scenario> Catalog::scenarios(std::string_view location) const
    {
        std::vector<Scenario> out;
        for (const auto &kv : entry(location).scenarios)
            out.push_back(kv.first);
        return out;
    }

    const Catalog::Entry &Catalog::entry(std::string_view location) const
    {
        const std::string key = lower(location);
        for (const auto &e : entries_)
            if (lower(e.profile.name) == key)
                return e;
        throw LookupError("unknown location '" + std::string(location) + "'");
    }

    const LocationProfile &Catalog::profile(std::string_view location) const
    {
        return entry(location).profile;
    }

    const ScenarioStats &Catalog::stats(std::string_view location, Scenario scenario) const
    {
        const Entry &e = entry(location);
        auto it = e.scenarios.find(scenario);
        if (it == e.scenarios.end())
            throw LookupError("location '" + e.profile.name + "' has no " + std::string(scenario_name(scenario)) + " statistics");
        return it->second;
    }

    MedReference Catalog::med_reference(std::string_view location, Scenario scenario) const
    {
        const ScenarioStats &s = stats(location, scenario);
        if (!s.med_empirical_ns || !s.med_model_ns)
            throw NotAvailableError("no published MED comparison for " + profile(location).name + " " +
                                    std::string(scenario_name(scenario)));
        return {*s.med_empirical_ns, *s.med_model_ns};
    }

    DistFamily Catalog::best_fit_policy(std::string_view location, Scenario scenario) const
    {
        stats(location, scenario);
        if (profile(location).environment == Environment::Indoor && scenario == Scenario::NLOS)
            return DistFamily::LogLogistic;
        return DistFamily::LogNormal;
    }

    DistFamily Catalog::ndd_policy(std::string_view location, Scenario scenario) const
    {
        stats(location, scenario);
        return DistFamily::Exponential;
    }

    const Catalog &embedded_catalog()
    {
        static const Catalog c = Catalog::from_json(json::parse(detail::embedded_catalog_json));
        return c;
    }

    const Catalog &default_catalog()
    {
        static const Catalog c = []()
        {
            if (const char *path = std::getenv("GBSM_CATALOG"); path && *path)
                return Catalog::load_file(path);
            return embedded_catalog();
        }();
        return c;
    }
}
