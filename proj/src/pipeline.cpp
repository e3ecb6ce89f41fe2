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

#include "gbsm/pipeline.hpp"
#include "gbsm/errors.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <set>
#include <thread>

namespace gbsm
{
    namespace
    {
        constexpr double nan = std::numeric_limits<double>::quiet_NaN();

        const char *const native_fields[] = {"location", "link_id", "scenario", "distance_m",
                                             "delay_ns", "power_dbm", "aoa_deg", "aod_deg"};
        constexpr std::size_t n_native = 8;

        std::string trim(std::string_view s)
        {
            const auto b = s.find_first_not_of(" \t\r");
            if (b == std::string_view::npos)
                return {};
            const auto e = s.find_last_not_of(" \t\r");
            return std::string(s.substr(b, e - b + 1));
        }

        // Splits one CSV line. Double quotes protect delimiters; "" inside quotes is a literal quote.
        std::vector<std::string> split_csv(std::string_view line, char delim, std::size_t line_no)
        {
            std::vector<std::string> out;
            std::string cur;
            bool quoted = false, was_quoted = false;
            for (std::size_t i = 0; i < line.size(); ++i)
            {
                const char c = line[i];
                if (quoted)
                {
                    if (c == '"')
                    {
                        if (i + 1 < line.size() && line[i + 1] == '"')
                            cur.push_back('"'), ++i;
                        else
                            quoted = false;
                    }
                    else
                        cur.push_back(c);
                }
                else if (c == '"')
                    quoted = was_quoted = true;
                else if (c == delim)
                {
                    out.push_back(was_quoted ? cur : trim(cur));
                    cur.clear();
                    was_quoted = false;
                }
                else
                    cur.push_back(c);
            }
            if (quoted)
                throw CsvError(line_no, "unterminated quoted field");
            out.push_back(was_quoted ? cur : trim(cur));
            return out;
        }

        bool read_line(std::istream &in, std::string &line)
        {
            if (!std::getline(in, line))
                return false;
            if (!line.empty() && line.back() == '\r')
                line.pop_back();
            return true;
        }

        double parse_number(const std::string &field, std::size_t line, std::string_view name)
        {
            double v = 0.0;
            const char *b = field.data(), *e = field.data() + field.size();
            if (!field.empty() && *b == '+')
                ++b;
            const auto [ptr, ec] = std::from_chars(b, e, v);
            if (field.empty() || ec != std::errc() || ptr != e)
                throw CsvError(line, std::string(name) + " is not a number: '" + field + "'");
            if (!std::isfinite(v))
                throw CsvError(line, std::string(name) + " must be finite");
            return v;
        }

        // One data row with its source line, fields keyed by native name
        struct RawRow
        {
            std::size_t line = 0;
            std::array<std::string, n_native> f;
        };

        Dataset build_dataset(const std::vector<RawRow> &rows, const std::map<std::string, double> &scale,
                              const IngestOptions &options)
        {
            const Catalog &catalog = options.catalog ? *options.catalog : default_catalog();
            auto scaled = [&](const std::string &field, std::size_t line, const char *name)
            {
                const double v = parse_number(field, line, name);
                auto it = scale.find(name);
                return it == scale.end() ? v : v * it->second;
            };

            Dataset ds;
            std::map<std::pair<std::string, std::string>, std::size_t> index;
            std::set<std::size_t> declared_empty;
            for (const RawRow &row : rows)
            {
                const auto &f = row.f;
                if (f[0].empty())
                    throw CsvError(row.line, "location is empty");
                if (f[1].empty())
                    throw CsvError(row.line, "link_id is empty");
                std::string location = f[0];
                if (catalog.has_location(location))
                    location = catalog.profile(location).name;
                else if (!options.allow_unknown)
                    throw CsvError(row.line, "unknown location '" + location + "'");

                Scenario scenario;
                try
                {
                    scenario = parse_scenario(f[2]);
                }
                catch (const LookupError &e)
                {
                    throw CsvError(row.line, e.what());
                }
                const double distance = scaled(f[3], row.line, "distance_m");
                if (!(distance > 0.0))
                    throw CsvError(row.line, "distance_m must be positive");

                auto key = std::make_pair(location, f[1]);
                auto it = index.find(key);
                if (it == index.end())
                {
                    it = index.emplace(key, ds.links.size()).first;
                    ds.links.push_back({location, f[1], scenario, distance, {}});
                }
                LinkGroup &g = ds.links[it->second];
                if (g.scenario != scenario)
                    throw CsvError(row.line, "link '" + g.link_id + "' mixes LOS and NLOS rows");
                if (g.distance_m != distance)
                    ds.warnings.push_back("line " + std::to_string(row.line) + ": link '" + g.link_id +
                                          "' changes distance; keeping the first value");

                if (f[4].empty() && f[5].empty())
                {
                    declared_empty.insert(it->second);
                    continue;
                }
                if (f[4].empty() || f[5].empty())
                    throw CsvError(row.line, "delay_ns and power_dbm must both be given or both be empty");

                MpcRecord r;
                r.location = location;
                r.link_id = f[1];
                r.scenario = scenario;
                r.distance_m = g.distance_m;
                r.delay_ns = scaled(f[4], row.line, "delay_ns");
                r.power_dbm = scaled(f[5], row.line, "power_dbm");
                if (!f[6].empty())
                    r.aoa_deg = scaled(f[6], row.line, "aoa_deg");
                if (!f[7].empty())
                    r.aod_deg = scaled(f[7], row.line, "aod_deg");
                if (!(r.delay_ns > 0.0))
                    throw CsvError(row.line, "delay_ns must be positive");
                const double los_ns = r.distance_m / speed_of_light * 1e9;
                if (r.delay_ns < los_ns)
                    ds.warnings.push_back("line " + std::to_string(row.line) + ": delay " + std::to_string(r.delay_ns) +
                                          " ns is shorter than the line-of-sight delay " + std::to_string(los_ns) + " ns");
                g.records.push_back(std::move(r));
            }
            for (std::size_t i : declared_empty)
                if (!ds.links[i].records.empty())
                    ds.warnings.push_back("link '" + ds.links[i].link_id + "' is declared empty but has components");
            for (LinkGroup &g : ds.links)
                std::stable_sort(g.records.begin(), g.records.end(),
                                 [](const MpcRecord &a, const MpcRecord &b) { return a.delay_ns < b.delay_ns; });
            return ds;
        }

        const std::vector<std::string> required_targets = {"location", "link_id", "scenario", "distance_m", "delay_ns", "power_dbm"};
    }

    std::size_t Dataset::record_count() const
    {
        std::size_t n = 0;
        for (const auto &g : links)
            n += g.records.size();
        return n;
    }

    Dataset ingest(std::istream &in, const IngestOptions &options)
    {
        std::string line;
        if (!read_line(in, line))
            throw CsvError(1, "input is empty");
        if (line.rfind("\xEF\xBB\xBF", 0) == 0)
            line.erase(0, 3);
        const auto header = split_csv(line, ',', 1);
        if (header.size() != n_native || !std::equal(header.begin(), header.end(), std::begin(native_fields)))
            throw CsvError(1, std::string("header must be '") + mpc_csv_header + "'");

        std::vector<RawRow> rows;
        for (std::size_t line_no = 2; read_line(in, line); ++line_no)
        {
            if (trim(line).empty())
                continue;
            const auto fields = split_csv(line, ',', line_no);
            if (fields.size() != n_native)
                throw CsvError(line_no, "expected 8 fields, found " + std::to_string(fields.size()));
            RawRow r;
            r.line = line_no;
            std::copy(fields.begin(), fields.end(), r.f.begin());
            rows.push_back(std::move(r));
        }
        return build_dataset(rows, {}, options);
    }

    Dataset ingest_file(const std::string &path, const IngestOptions &options)
    {
        std::ifstream in(path);
        if (!in)
            throw ParseError(path, "cannot open input file");
        return ingest(in, options);
    }

    ColumnMapping ColumnMapping::from_json(const nlohmann::json &j)
    {
        ColumnMapping m;
        if (!j.is_object())
            throw ParseError("$", "mapping must be a JSON object");
        const std::set<std::string> known(std::begin(native_fields), std::end(native_fields));
        auto check_target = [&](const std::string &section, const std::string &key)
        {
            if (!known.count(key))
                throw ParseError("$." + section + "." + key, "unknown target field");
        };
        if (j.contains("delimiter"))
        {
            const auto &d = j.at("delimiter");
            if (!d.is_string() || d.get<std::string>().size() != 1)
                throw ParseError("$.delimiter", "expected a one-character string");
            m.delimiter = d.get<std::string>()[0];
        }
        if (j.contains("columns"))
            for (const auto &[k, v] : j.at("columns").items())
            {
                check_target("columns", k);
                if (!v.is_string())
                    throw ParseError("$.columns." + k, "expected a column name");
                m.columns[k] = v.get<std::string>();
            }
        if (j.contains("scale"))
            for (const auto &[k, v] : j.at("scale").items())
            {
                check_target("scale", k);
                if (!v.is_number())
                    throw ParseError("$.scale." + k, "expected a number");
                m.scale[k] = v.get<double>();
            }
        if (j.contains("constants"))
            for (const auto &[k, v] : j.at("constants").items())
            {
                check_target("constants", k);
                if (v.is_string())
                    m.constants[k] = v.get<std::string>();
                else if (v.is_number())
                    m.constants[k] = v.dump();
                else
                    throw ParseError("$.constants." + k, "expected a string or number");
            }
        for (const auto &t : required_targets)
            if (!m.columns.count(t) && !m.constants.count(t))
                throw ParseError("$.columns." + t, "no column or constant for required field");
        return m;
    }

    ColumnMapping ColumnMapping::load_file(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
            throw ParseError(path, "cannot open mapping file");
        try
        {
            return from_json(nlohmann::json::parse(in));
        }
        catch (const nlohmann::json::parse_error &e)
        {
            throw ParseError(path, std::string("malformed JSON: ") + e.what());
        }
    }

    Dataset ingest_mapped(std::istream &in, const ColumnMapping &mapping, const IngestOptions &options)
    {
        std::string line;
        if (!read_line(in, line))
            throw CsvError(1, "input is empty");
        if (line.rfind("\xEF\xBB\xBF", 0) == 0)
            line.erase(0, 3);
        const auto header = split_csv(line, mapping.delimiter, 1);

        // Source column index per native field; -1 for constants or absent optional fields
        std::array<long, n_native> source{};
        for (std::size_t i = 0; i < n_native; ++i)
        {
            source[i] = -1;
            auto it = mapping.columns.find(native_fields[i]);
            if (it == mapping.columns.end())
                continue;
            auto pos = std::find(header.begin(), header.end(), it->second);
            if (pos == header.end())
                throw CsvError(1, "mapped column '" + it->second + "' not found in header");
            source[i] = static_cast<long>(pos - header.begin());
        }

        std::vector<RawRow> rows;
        for (std::size_t line_no = 2; read_line(in, line); ++line_no)
        {
            if (trim(line).empty())
                continue;
            const auto fields = split_csv(line, mapping.delimiter, line_no);
            if (fields.size() != header.size())
                throw CsvError(line_no, "expected " + std::to_string(header.size()) + " fields, found " + std::to_string(fields.size()));
            RawRow r;
            r.line = line_no;
            for (std::size_t i = 0; i < n_native; ++i)
            {
                if (source[i] >= 0)
                    r.f[i] = fields[static_cast<std::size_t>(source[i])];
                else if (auto c = mapping.constants.find(native_fields[i]); c != mapping.constants.end())
                    r.f[i] = c->second;
            }
            rows.push_back(std::move(r));
        }
        return build_dataset(rows, mapping.scale, options);
    }

    // ---------------------------------------------------------------------------------------------

    std::string_view quantity_name(Quantity q) noexcept
    {
        switch (q)
        {
        case Quantity::Npd:
            return "npd";
        case Quantity::Ndd:
            return "ndd";
        case Quantity::Nop:
            return "nop";
        }
        return "?";
    }

    Quantity parse_quantity(std::string_view name)
    {
        if (name == "npd")
            return Quantity::Npd;
        if (name == "ndd")
            return Quantity::Ndd;
        if (name == "nop")
            return Quantity::Nop;
        throw ParameterError("unknown quantity '" + std::string(name) + "'");
    }

    const std::vector<double> &CellData::values(Quantity q) const
    {
        switch (q)
        {
        case Quantity::Npd:
            return npd;
        case Quantity::Ndd:
            return ndd;
        default:
            return nop;
        }
    }

    std::vector<CellData> collect_cells(const Dataset &data, const Catalog &catalog)
    {
        const auto names = catalog.location_names();
        auto rank = [&](const std::string &loc)
        {
            auto it = std::find(names.begin(), names.end(), loc);
            return std::make_pair(static_cast<std::size_t>(it - names.begin()), loc);
        };
        std::map<std::tuple<std::size_t, std::string, Scenario>, CellData> cells;
        for (const LinkGroup &g : data.links)
        {
            const auto [r, name] = rank(g.location);
            CellData &c = cells[{r, name, g.scenario}];
            c.location = g.location;
            c.scenario = g.scenario;
            c.has_profile = catalog.has_location(g.location);
            ++c.links;
            c.points += g.records.size();
            c.nop.push_back(static_cast<double>(g.records.size()));
            if (g.records.empty())
                continue;
            std::vector<double> delays;
            for (const MpcRecord &rec : g.records)
                delays.push_back(rec.delay_ns);
            for (double d : normalize_delay(delays))
                c.ndd.push_back(d);
            if (c.has_profile)
            {
                const LocationProfile &p = catalog.profile(g.location);
                for (const MpcRecord &rec : g.records)
                {
                    const double v = normalize_power(rec, p);
                    c.npd.push_back(v);
                    c.pdp.push_back({rec.delay_ns, v});
                    c.pdp_links.push_back(rec.link_id);
                }
            }
        }
        std::vector<CellData> out;
        for (auto &kv : cells)
            out.push_back(std::move(kv.second));
        return out;
    }

    std::vector<DistFamily> default_power_families()
    {
        return {DistFamily::Normal, DistFamily::Exponential, DistFamily::LogNormal, DistFamily::Rayleigh, DistFamily::Rician,
                DistFamily::Nakagami, DistFamily::Gamma, DistFamily::Beta, DistFamily::LogLogistic};
    }

    std::vector<DistFamily> default_delay_families()
    {
        return {DistFamily::Exponential, DistFamily::Weibull};
    }

    DistSpec FitRow::spec() const
    {
        DistSpec s{family, {}, loc, scale};
        if (shape_count(family) > 0)
            s.shape.push_back(shape1);
        if (shape_count(family) > 1)
            s.shape.push_back(shape2);
        return s;
    }

    const FitRow *FitReport::best(std::string_view location, Scenario scenario, Quantity quantity) const
    {
        const FitRow *best = nullptr;
        for (const FitRow &r : rows)
            if (r.ok() && r.location == location && r.scenario == scenario && r.quantity == quantity &&
                (!best || r.ks_statistic < best->ks_statistic))
                best = &r;
        return best;
    }

    namespace
    {
        bool same(double a, double b)
        {
            return (std::isnan(a) && std::isnan(b)) || a == b;
        }
    }

    bool same_report(const FitReport &a, const FitReport &b)
    {
        if (a.rows.size() != b.rows.size() || a.cells.size() != b.cells.size())
            return false;
        for (std::size_t i = 0; i < a.rows.size(); ++i)
        {
            const FitRow &x = a.rows[i], &y = b.rows[i];
            if (x.location != y.location || x.scenario != y.scenario || x.quantity != y.quantity || x.family != y.family ||
                x.status != y.status || x.n != y.n || !same(x.ks_statistic, y.ks_statistic) || !same(x.p_value, y.p_value) ||
                !same(x.qq_correlation, y.qq_correlation) || !same(x.loc, y.loc) || !same(x.scale, y.scale) ||
                !same(x.shape1, y.shape1) || !same(x.shape2, y.shape2))
                return false;
        }
        for (std::size_t i = 0; i < a.cells.size(); ++i)
        {
            const CellSummary &x = a.cells[i], &y = b.cells[i];
            if (x.location != y.location || x.scenario != y.scenario || x.points != y.points || x.links != y.links ||
                !same(x.nop_min, y.nop_min) || !same(x.nop_max, y.nop_max) || !same(x.nop_mean, y.nop_mean))
                return false;
        }
        return true;
    }

    FitReport run_fit_pipeline(const Dataset &data, const FitOptions &options)
    {
        const Catalog &catalog = options.catalog ? *options.catalog : default_catalog();
        return run_fit_pipeline(collect_cells(data, catalog), options);
    }

    FitReport run_fit_pipeline(const std::vector<CellData> &cells, const FitOptions &options)
    {
        const auto npd_f = options.npd_families.empty() ? default_power_families() : options.npd_families;
        const auto ndd_f = options.ndd_families.empty() ? default_delay_families() : options.ndd_families;
        const auto nop_f = !options.nop_families.empty() ? options.nop_families
                           : !options.npd_families.empty() ? options.npd_families
                                                           : default_power_families();

        struct Job
        {
            const CellData *cell;
            Quantity quantity;
            DistFamily family;
        };
        std::vector<Job> jobs;
        FitReport report;
        for (const CellData &c : cells)
        {
            for (DistFamily f : npd_f)
                jobs.push_back({&c, Quantity::Npd, f});
            for (DistFamily f : ndd_f)
                jobs.push_back({&c, Quantity::Ndd, f});
            for (DistFamily f : nop_f)
                jobs.push_back({&c, Quantity::Nop, f});

            CellSummary s{c.location, c.scenario, c.points, c.links, nan, nan, nan};
            if (!c.nop.empty())
            {
                s.nop_min = *std::min_element(c.nop.begin(), c.nop.end());
                s.nop_max = *std::max_element(c.nop.begin(), c.nop.end());
                double sum = 0.0;
                for (double v : c.nop)
                    sum += v;
                s.nop_mean = sum / static_cast<double>(c.nop.size());
            }
            report.cells.push_back(s);
        }

        report.rows.resize(jobs.size());
        auto run = [&](std::size_t i)
        {
            const Job &job = jobs[i];
            const std::vector<double> &x = job.cell->values(job.quantity);
            FitRow &row = report.rows[i];
            row.location = job.cell->location;
            row.scenario = job.cell->scenario;
            row.quantity = job.quantity;
            row.family = job.family;
            row.n = x.size();
            row.ks_statistic = row.p_value = row.qq_correlation = row.loc = row.scale = row.shape1 = row.shape2 = nan;

            if (job.quantity == Quantity::Npd && !job.cell->has_profile)
            {
                row.status = "fit failed: no catalog profile for this location";
                return;
            }
            const bool small = job.quantity == Quantity::Nop ? job.cell->links < options.min_links : x.size() < options.min_points;
            if (small)
            {
                row.status = "insufficient data";
                return;
            }
            try
            {
                const std::optional<double> fix = job.quantity == Quantity::Ndd ? std::optional<double>(0.0) : std::nullopt;
                const GofResult g = fit_and_test(job.family, x, fix);
                row.ks_statistic = g.ks_statistic;
                row.p_value = g.p_value;
                row.qq_correlation = g.qq_correlation;
                row.loc = g.fitted.loc;
                row.scale = g.fitted.scale;
                if (!g.fitted.shape.empty())
                    row.shape1 = g.fitted.shape[0];
                if (g.fitted.shape.size() > 1)
                    row.shape2 = g.fitted.shape[1];
                row.status = "ok";
            }
            catch (const std::exception &e)
            {
                row.ks_statistic = row.p_value = row.qq_correlation = row.loc = row.scale = row.shape1 = row.shape2 = nan;
                row.status = std::string("fit failed: ") + e.what();
            }
        };

        unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
        threads = static_cast<unsigned>(std::min<std::size_t>(threads, jobs.size()));
        if (threads <= 1)
        {
            for (std::size_t i = 0; i < jobs.size(); ++i)
                run(i);
        }
        else
        {
            std::atomic<std::size_t> next{0};
            std::vector<std::thread> pool;
            for (unsigned t = 0; t < threads; ++t)
                pool.emplace_back([&]()
                                  {
                                      for (std::size_t i = next++; i < jobs.size(); i = next++)
                                          run(i); });
            for (auto &th : pool)
                th.join();
        }
        return report;
    }
}
