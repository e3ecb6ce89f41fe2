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

#include <catch_amalgamated.hpp>

#include <fstream>
#include <sstream>

using namespace gbsm;

namespace
{
    std::string read_text(const std::string &path)
    {
        std::ifstream in(path);
        std::stringstream s;
        s << in.rdbuf();
        return s.str();
    }

    nlohmann::json shipped_json()
    {
        return nlohmann::json::parse(read_text(GBSM_CATALOG_FILE));
    }

    std::string parse_error_path(const nlohmann::json &j)
    {
        try
        {
            Catalog::from_json(j);
        }
        catch (const ParseError &e)
        {
            return e.where();
        }
        return "no error";
    }
}

TEST_CASE("shipped catalog lists seven locations with both scenarios", "[catalog]")
{
    const Catalog &c = embedded_catalog();
    const std::vector<std::string> expected = {"Sello", "Airport", "TUAS", "TUAS2", "Campus", "City", "Residential"};
    CHECK(c.location_names() == expected);
    for (const auto &name : expected)
    {
        CHECK(c.scenarios(name) == std::vector<Scenario>{Scenario::LOS, Scenario::NLOS});
        const LocationProfile &p = c.profile(name);
        CHECK(p.rf_band_hz.first < p.rf_band_hz.second);
        CHECK(p.center_freq_hz >= p.rf_band_hz.first);
        CHECK(p.center_freq_hz <= p.rf_band_hz.second);
        CHECK(p.link_distance_range_m.first < p.link_distance_range_m.second);
        CHECK(p.rx_gain_dbi == 19.0);
        CHECK(p.noise_threshold_dbm() == -118.0);
        for (Scenario s : c.scenarios(name))
        {
            const ScenarioStats &st = c.stats(name, s);
            CHECK(st.ndd.loc == 0.0);
            CHECK(st.nop.min <= st.nop.mean);
            CHECK(st.nop.mean <= st.nop.max);
            CHECK(st.data_points >= st.measurements);
        }
    }
}

TEST_CASE("fitted statistics load verbatim", "[catalog]")
{
    const Catalog &c = embedded_catalog();
    CHECK(c.stats("Sello", Scenario::LOS).npd == DistSpec{DistFamily::LogNormal, {0.37}, -35.5, 17.4});
    CHECK(c.stats("TUAS2", Scenario::NLOS).npd == DistSpec{DistFamily::LogLogistic, {6.4}, -47.4, 21.7});
    CHECK(c.stats("Campus", Scenario::LOS).ndd == DistSpec{DistFamily::Exponential, {}, 0.0, 136.2});
    CHECK(c.stats("Sello", Scenario::LOS).ndd == DistSpec{DistFamily::Exponential, {}, 0.0, 50.52});
    CHECK(c.stats("Sello", Scenario::NLOS).ndd.scale == 43.51);

    const NopStats nop = c.stats("TUAS2", Scenario::NLOS).nop;
    CHECK(nop.max == 113);
    CHECK(nop.min == 0);
    CHECK(nop.mean == 29.7);
    CHECK(c.stats("Sello", Scenario::LOS).nop.mean == 19.0);
    CHECK(c.stats("Sello", Scenario::LOS).data_points == 304);
    CHECK(c.stats("Sello", Scenario::LOS).measurements == 16);
}

TEST_CASE("campaign constants", "[catalog]")
{
    const Catalog &c = embedded_catalog();
    CHECK(c.profile("Sello").eirp_dbm == -12.0);
    CHECK(c.profile("Airport").eirp_dbm == -12.0);
    for (const char *n : {"TUAS", "TUAS2", "Campus", "City", "Residential"})
        CHECK(c.profile(n).eirp_dbm == 5.0);
    CHECK(c.profile("Sello").center_freq_hz == 143.1e9);
    CHECK(c.profile("Campus").center_freq_hz == 142e9);
    CHECK(c.profile("Campus").link_distance_range_m == std::pair<double, double>{2.0, 172.0});
    CHECK(c.profile("sello").name == "Sello");
    CHECK(c.profile("Sello").environment == Environment::Indoor);
    CHECK(c.profile("City").environment == Environment::Outdoor);
}

TEST_CASE("published reference rows are kept with their gaps", "[catalog]")
{
    const ScenarioStats &s = embedded_catalog().stats("Sello", Scenario::LOS);
    const ReferenceFit *lognormal = nullptr, *beta = nullptr;
    for (const auto &r : s.reference_fits)
    {
        if (r.quantity == "npd" && r.family == DistFamily::LogNormal)
            lognormal = &r;
        if (r.quantity == "npd" && r.family == DistFamily::Beta)
            beta = &r;
    }
    REQUIRE(lognormal);
    CHECK(*lognormal->ks_statistic == 0.344);
    CHECK(*lognormal->p_value == 0.853);
    CHECK(lognormal->spec() == DistSpec{DistFamily::LogNormal, {0.37}, -35.5, 17.4});
    REQUIRE(beta);
    REQUIRE(beta->shape.size() == 2);
    CHECK(*beta->shape[0] == 1.04);
    CHECK_FALSE(beta->shape[1].has_value());
    CHECK_FALSE(beta->spec().has_value());
}

TEST_CASE("best-fit policy", "[catalog]")
{
    const Catalog &c = embedded_catalog();
    CHECK(c.best_fit_policy("TUAS", Scenario::NLOS) == DistFamily::LogLogistic);
    CHECK(c.best_fit_policy("Sello", Scenario::LOS) == DistFamily::LogNormal);
    CHECK(c.best_fit_policy("City", Scenario::NLOS) == DistFamily::LogNormal);
    CHECK(c.ndd_policy("City", Scenario::LOS) == DistFamily::Exponential);
    CHECK_THROWS_AS(c.best_fit_policy("Mars", Scenario::LOS), LookupError);
    for (const auto &name : c.location_names())
        for (Scenario s : c.scenarios(name))
        {
            CHECK(c.stats(name, s).npd.family == c.best_fit_policy(name, s));
            CHECK(c.stats(name, s).ndd.family == c.ndd_policy(name, s));
        }
}

TEST_CASE("MED reference pairs", "[catalog]")
{
    const Catalog &c = embedded_catalog();
    const MedReference sello = c.med_reference("Sello", Scenario::LOS);
    CHECK(sello.empirical_ns == 155.2);
    CHECK(sello.model_ns == 113.2);
    const MedReference campus = c.med_reference("Campus", Scenario::LOS);
    CHECK(campus.empirical_ns == 542.25);
    CHECK(campus.model_ns == 562.04);
    CHECK(c.med_reference("TUAS", Scenario::LOS).empirical_ns == 110.69);
    CHECK(c.med_reference("TUAS2", Scenario::LOS).empirical_ns == 110.69);
    CHECK_THROWS_AS(c.med_reference("Sello", Scenario::NLOS), NotAvailableError);
    CHECK_THROWS_AS(c.med_reference("Airport", Scenario::NLOS), NotAvailableError);
}

TEST_CASE("low-confidence cells are flagged", "[catalog]")
{
    const Catalog &c = embedded_catalog();
    const ScenarioStats &a = c.stats("Airport", Scenario::NLOS);
    CHECK(a.low_confidence);
    CHECK(a.measurements == 1);
    CHECK(a.data_points == 41);
    CHECK_FALSE(c.stats("Airport", Scenario::LOS).low_confidence);
}

TEST_CASE("lookups of unknown keys fail", "[catalog]")
{
    const Catalog &c = embedded_catalog();
    CHECK_THROWS_AS(c.profile("Atlantis"), LookupError);
    CHECK_THROWS_AS(parse_scenario("OLOS"), LookupError);
    CHECK(parse_scenario("nlos") == Scenario::NLOS);
}

TEST_CASE("catalog save/load round trip is byte-identical", "[catalog]")
{
    const std::string text = read_text(GBSM_CATALOG_FILE);
    std::istringstream in(text);
    const Catalog c = Catalog::load(in);
    CHECK(c.dump() == text);
    CHECK(c.to_json() == nlohmann::json::parse(text));
    std::istringstream again(c.dump());
    CHECK(Catalog::load(again).dump() == c.dump());
    CHECK(embedded_catalog().dump() == text);
}

TEST_CASE("schema violations name the offending path", "[catalog]")
{
    nlohmann::json j = shipped_json();
    j["locations"][0].erase("name");
    CHECK(parse_error_path(j) == "$.locations[0].name");

    j = shipped_json();
    j["locations"][2]["scenarios"]["LOS"]["npd"]["scale"] = -1.0;
    CHECK(parse_error_path(j) == "$.locations[2].scenarios.LOS.npd");

    j = shipped_json();
    j["locations"][1]["scenarios"]["NLOS"]["ndd"]["loc"] = 3.0;
    CHECK(parse_error_path(j) == "$.locations[1].scenarios.NLOS.ndd.loc");

    j = shipped_json();
    j["locations"][0]["rf_band_hz"] = {145e9, 141e9};
    CHECK(parse_error_path(j) == "$.locations[0].rf_band_hz");

    j = shipped_json();
    j["locations"][3]["scenarios"]["LOS"]["nop"]["min"] = 500;
    CHECK(parse_error_path(j) == "$.locations[3].scenarios.LOS.nop");

    j = shipped_json();
    j["locations"][0]["scenarios"]["XLOS"] = j["locations"][0]["scenarios"]["LOS"];
    CHECK(parse_error_path(j) == "$.locations[0].scenarios.XLOS");

    j = shipped_json();
    j["schema_version"] = 7;
    CHECK(parse_error_path(j) == "$.schema_version");

    std::istringstream broken("{\"schema_version\": 1, ");
    CHECK_THROWS_AS(Catalog::load(broken), ParseError);
}
