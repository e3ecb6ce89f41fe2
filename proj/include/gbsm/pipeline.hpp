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

#ifndef GBSM_PIPELINE_HPP
#define GBSM_PIPELINE_HPP

#include "gbsm/catalog.hpp"
#include "gbsm/metrics.hpp"
#include "gbsm/statdist.hpp"

#include <json.hpp>

#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace gbsm
{
    // ---------------------------------------------------------------------------------------------
    // Ingest
    // ---------------------------------------------------------------------------------------------

    // Expected header of a measurement CSV
    inline constexpr const char *mpc_csv_header = "location,link_id,scenario,distance_m,delay_ns,power_dbm,aoa_deg,aod_deg";

    // All components of one measured link, sorted by delay. A link may have no components: a row
    // with empty delay_ns and power_dbm declares a link on which nothing was detected.
    struct LinkGroup
    {
        std::string location;
        std::string link_id;
        Scenario scenario = Scenario::LOS;
        double distance_m = 0.0;
        std::vector<MpcRecord> records;
    };

    struct Dataset
    {
        std::vector<LinkGroup> links; // in order of first appearance
        std::vector<std::string> warnings;

        std::size_t record_count() const;
    };

    struct IngestOptions
    {
        const Catalog *catalog = nullptr; // nullptr: default_catalog()
        bool allow_unknown = false;       // accept locations missing from the catalog
    };

    // Reads the CSV layout above. Errors name the 1-based line (the header is line 1).
    Dataset ingest(std::istream &in, const IngestOptions &options = {});
    Dataset ingest_file(const std::string &path, const IngestOptions &options = {});

    // Converter for CSV files with other column layouts. The mapping document is JSON:
    //
    //   {
    //     "delimiter": ",",                          optional, one character
    //     "columns":   {"delay_ns": "Delay [s]", ...},   source column per target field
    //     "scale":     {"delay_ns": 1e9},               optional multiplier per numeric field
    //     "constants": {"location": "Sello", "scenario": "LOS"}   optional fixed values
    //   }
    //
    // Target fields are those of the native header. Each of location, link_id, scenario,
    // distance_m, delay_ns and power_dbm needs a column or a constant; the angles are optional.
    struct ColumnMapping
    {
        char delimiter = ',';
        std::map<std::string, std::string> columns;
        std::map<std::string, double> scale;
        std::map<std::string, std::string> constants;

        static ColumnMapping from_json(const nlohmann::json &j);
        static ColumnMapping load_file(const std::string &path);
    };

    Dataset ingest_mapped(std::istream &in, const ColumnMapping &mapping, const IngestOptions &options = {});

    // ---------------------------------------------------------------------------------------------
    // Fitting
    // ---------------------------------------------------------------------------------------------

    enum class Quantity
    {
        Npd, // normalized power
        Ndd, // normalized delay
        Nop  // number of paths per link
    };

    std::string_view quantity_name(Quantity q) noexcept; // "npd", "ndd", "nop"
    Quantity parse_quantity(std::string_view name);

    // Samples of one (location, scenario) cell
    struct CellData
    {
        std::string location;
        Scenario scenario = Scenario::LOS;
        std::vector<double> npd;  // dB; empty if the location has no profile
        std::vector<double> ndd;  // ns
        std::vector<double> nop;  // per-link counts
        std::vector<PdpPoint> pdp;
        std::vector<std::string> pdp_links; // link id of each pdp point
        std::size_t points = 0;
        std::size_t links = 0;
        bool has_profile = true;

        const std::vector<double> &values(Quantity q) const;
    };

    // Groups links into cells (sorted by location, then LOS before NLOS) and normalizes them
    std::vector<CellData> collect_cells(const Dataset &data, const Catalog &catalog);

    struct FitOptions
    {
        std::vector<DistFamily> npd_families; // empty: the nine power families, free loc
        std::vector<DistFamily> ndd_families; // empty: Exponential and Weibull, loc fixed at 0
        std::vector<DistFamily> nop_families; // empty: same as npd
        std::size_t min_points = 3;           // smaller npd/ndd cells are reported, not fitted
        std::size_t min_links = 3;            // smaller nop cells are reported, not fitted
        unsigned threads = 0;                 // 0: hardware concurrency
        const Catalog *catalog = nullptr;
    };

    std::vector<DistFamily> default_power_families();
    std::vector<DistFamily> default_delay_families();

    struct FitRow
    {
        std::string location;
        Scenario scenario = Scenario::LOS;
        Quantity quantity = Quantity::Npd;
        DistFamily family = DistFamily::Normal;
        std::string status; // "ok", "insufficient data" or "fit failed: ..."
        std::size_t n = 0;
        double ks_statistic = 0.0;
        double p_value = 0.0;
        double qq_correlation = 0.0;
        double loc = 0.0;
        double scale = 0.0;
        double shape1 = 0.0; // NaN when the family has fewer shapes
        double shape2 = 0.0;

        bool ok() const { return status == "ok"; }
        DistSpec spec() const; // valid only for ok rows
    };

    struct CellSummary
    {
        std::string location;
        Scenario scenario = Scenario::LOS;
        std::size_t points = 0;
        std::size_t links = 0;
        double nop_min = 0.0;
        double nop_max = 0.0;
        double nop_mean = 0.0;
    };

    struct FitReport
    {
        std::vector<FitRow> rows;
        std::vector<CellSummary> cells;

        // Best row (smallest KS statistic among ok rows) for a cell and quantity, or nullptr
        const FitRow *best(std::string_view location, Scenario scenario, Quantity quantity) const;
    };

    // Field-wise equality; NaN equals NaN
    bool same_report(const FitReport &a, const FitReport &b);

    FitReport run_fit_pipeline(const Dataset &data, const FitOptions &options = {});
    FitReport run_fit_pipeline(const std::vector<CellData> &cells, const FitOptions &options = {});

    // ---------------------------------------------------------------------------------------------
    // Report I/O
    // ---------------------------------------------------------------------------------------------

    enum class ReportFormat
    {
        Csv,
        Json
    };

    ReportFormat parse_report_format(std::string_view name);

    // CSV: one header line, one line per row; cell summaries follow as "# cell,..." lines.
    // JSON: {"cells": [...], "rows": [...]} with sorted keys. Missing numbers are empty / null.
    // Doubles are written in shortest round-trip form, so parse_report(emit_report(r)) == r.
    void emit_report(const FitReport &report, ReportFormat format, std::ostream &out);
    std::string emit_report(const FitReport &report, ReportFormat format);
    FitReport parse_report(std::istream &in, ReportFormat format);

    // Plot-ready data files written into `directory`:
    //   cdf_<location>_<scenario>_<quantity>.csv   x, empirical CDF and one model CDF column per ok row
    //   qq_<location>_<scenario>_<quantity>.csv    family, theoretical quantile, sample quantile
    //   pdp_<location>_<scenario>.csv              link_id, delay_ns, normalized_power_db
    // Returns the paths of the files written.
    std::vector<std::string> write_plot_data(const std::string &directory, const std::vector<CellData> &cells,
                                             const FitReport &report);

    // ---------------------------------------------------------------------------------------------
    // Command line
    // ---------------------------------------------------------------------------------------------

    // Runs the gbsm command line with `args` (without the program name). Returns 0 on success,
    // 1 on usage errors and 2 on data errors.
    int cli_dispatch(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);
}

#endif
