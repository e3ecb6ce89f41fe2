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
#include "gbsm/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace gbsm
{
    namespace
    {
        using nlohmann::json;
        constexpr double nan = std::numeric_limits<double>::quiet_NaN();

        const char *const row_header = "location,scenario,quantity,family,status,n,ks_statistic,p_value,qq_correlation,loc,scale,shape1,shape2";
        const char *const cell_prefix = "# cell,";

        std::string fmt(double v)
        {
            if (std::isnan(v))
                return {};
            char buf[64];
            const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
            return std::string(buf, end);
        }

        std::string quote(const std::string &s)
        {
            if (s.find_first_of(",\"\n#") == std::string::npos && (s.empty() || (s.front() != ' ' && s.back() != ' ')))
                return s;
            std::string out = "\"";
            for (char c : s)
            {
                if (c == '"')
                    out.push_back('"');
                out.push_back(c);
            }
            return out + "\"";
        }

        std::vector<std::string> split(const std::string &line, std::size_t line_no)
        {
            std::vector<std::string> out;
            std::string cur;
            bool quoted = false;
            for (std::size_t i = 0; i < line.size(); ++i)
            {
                const char c = line[i];
                if (quoted)
                {
                    if (c == '"' && i + 1 < line.size() && line[i + 1] == '"')
                        cur.push_back('"'), ++i;
                    else if (c == '"')
                        quoted = false;
                    else
                        cur.push_back(c);
                }
                else if (c == '"')
                    quoted = true;
                else if (c == ',')
                    out.push_back(std::move(cur)), cur.clear();
                else
                    cur.push_back(c);
            }
            if (quoted)
                throw CsvError(line_no, "unterminated quoted field");
            out.push_back(std::move(cur));
            return out;
        }

        double num(const std::string &s, std::size_t line_no)
        {
            if (s.empty())
                return nan;
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc() || ptr != s.data() + s.size())
                throw CsvError(line_no, "not a number: '" + s + "'");
            return v;
        }

        std::size_t count(const std::string &s, std::size_t line_no)
        {
            std::size_t v = 0;
            const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
                throw CsvError(line_no, "not a count: '" + s + "'");
            return v;
        }

        json jnum(double v)
        {
            return std::isnan(v) ? json(nullptr) : json(v);
        }

        double jget(const json &j, const char *key)
        {
            const json &v = j.at(key);
            return v.is_null() ? nan : v.get<double>();
        }

        template <class F>
        auto wrap_lookup(std::size_t line_no, F &&f)
        {
            try
            {
                return f();
            }
            catch (const std::exception &e)
            {
                throw CsvError(line_no, e.what());
            }
        }

        std::string file_token(std::string s)
        {
            for (char &c : s)
                if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-')
                    c = '_';
            return s;
        }
    }

    ReportFormat parse_report_format(std::string_view name)
    {
        std::string lower(name);
        std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
        if (lower == "csv")
            return ReportFormat::Csv;
        if (lower == "json")
            return ReportFormat::Json;
        throw UsageError("unknown report format '" + std::string(name) + "' (expected csv or json)");
    }

    void emit_report(const FitReport &report, ReportFormat format, std::ostream &out)
    {
        if (format == ReportFormat::Json)
        {
            json rows = json::array(), cells = json::array();
            for (const FitRow &r : report.rows)
                rows.push_back({{"location", r.location},
                                {"scenario", std::string(scenario_name(r.scenario))},
                                {"quantity", std::string(quantity_name(r.quantity))},
                                {"family", std::string(family_name(r.family))},
                                {"status", r.status},
                                {"n", r.n},
                                {"ks_statistic", jnum(r.ks_statistic)},
                                {"p_value", jnum(r.p_value)},
                                {"qq_correlation", jnum(r.qq_correlation)},
                                {"loc", jnum(r.loc)},
                                {"scale", jnum(r.scale)},
                                {"shape1", jnum(r.shape1)},
                                {"shape2", jnum(r.shape2)}});
            for (const CellSummary &c : report.cells)
                cells.push_back({{"location", c.location},
                                 {"scenario", std::string(scenario_name(c.scenario))},
                                 {"points", c.points},
                                 {"links", c.links},
                                 {"nop_min", jnum(c.nop_min)},
                                 {"nop_max", jnum(c.nop_max)},
                                 {"nop_mean", jnum(c.nop_mean)}});
            out << json{{"rows", rows}, {"cells", cells}}.dump(2) << "\n";
            return;
        }

        out << row_header << "\n";
        for (const FitRow &r : report.rows)
            out << quote(r.location) << ',' << scenario_name(r.scenario) << ',' << quantity_name(r.quantity) << ','
                << family_name(r.family) << ',' << quote(r.status) << ',' << r.n << ',' << fmt(r.ks_statistic) << ','
                << fmt(r.p_value) << ',' << fmt(r.qq_correlation) << ',' << fmt(r.loc) << ',' << fmt(r.scale) << ','
                << fmt(r.shape1) << ',' << fmt(r.shape2) << "\n";
        for (const CellSummary &c : report.cells)
            out << cell_prefix << quote(c.location) << ',' << scenario_name(c.scenario) << ',' << c.points << ',' << c.links
                << ',' << fmt(c.nop_min) << ',' << fmt(c.nop_max) << ',' << fmt(c.nop_mean) << "\n";
    }

    std::string emit_report(const FitReport &report, ReportFormat format)
    {
        std::ostringstream s;
        emit_report(report, format, s);
        return s.str();
    }

    FitReport parse_report(std::istream &in, ReportFormat format)
    {
        FitReport report;
        if (format == ReportFormat::Json)
        {
            json j;
            try
            {
                j = json::parse(in);
                for (const json &r : j.at("rows"))
                    report.rows.push_back({r.at("location").get<std::string>(),
                                           parse_scenario(r.at("scenario").get<std::string>()),
                                           parse_quantity(r.at("quantity").get<std::string>()),
                                           parse_family(r.at("family").get<std::string>()),
                                           r.at("status").get<std::string>(),
                                           r.at("n").get<std::size_t>(),
                                           jget(r, "ks_statistic"), jget(r, "p_value"), jget(r, "qq_correlation"),
                                           jget(r, "loc"), jget(r, "scale"), jget(r, "shape1"), jget(r, "shape2")});
                for (const json &c : j.at("cells"))
                    report.cells.push_back({c.at("location").get<std::string>(),
                                            parse_scenario(c.at("scenario").get<std::string>()),
                                            c.at("points").get<std::size_t>(), c.at("links").get<std::size_t>(),
                                            jget(c, "nop_min"), jget(c, "nop_max"), jget(c, "nop_mean")});
            }
            catch (const json::exception &e)
            {
                throw ParseError("$", std::string("malformed report: ") + e.what());
            }
            return report;
        }

        std::string line;
        std::size_t line_no = 1;
        if (!std::getline(in, line) || line != row_header)
            throw CsvError(1, std::string("report header must be '") + row_header + "'");
        while (std::getline(in, line))
        {
            ++line_no;
            if (line.empty())
                continue;
            if (line.rfind(cell_prefix, 0) == 0)
            {
                const auto f = split(line.substr(std::string_view(cell_prefix).size()), line_no);
                if (f.size() != 7)
                    throw CsvError(line_no, "cell summary needs 7 fields");
                report.cells.push_back({f[0], wrap_lookup(line_no, [&] { return parse_scenario(f[1]); }),
                                        count(f[2], line_no), count(f[3], line_no),
                                        num(f[4], line_no), num(f[5], line_no), num(f[6], line_no)});
                continue;
            }
            const auto f = split(line, line_no);
            if (f.size() != 13)
                throw CsvError(line_no, "report row needs 13 fields");
            report.rows.push_back({f[0], wrap_lookup(line_no, [&] { return parse_scenario(f[1]); }),
                                   wrap_lookup(line_no, [&] { return parse_quantity(f[2]); }),
                                   wrap_lookup(line_no, [&] { return parse_family(f[3]); }), f[4],
                                   count(f[5], line_no), num(f[6], line_no), num(f[7], line_no), num(f[8], line_no),
                                   num(f[9], line_no), num(f[10], line_no), num(f[11], line_no), num(f[12], line_no)});
        }
        return report;
    }

    std::vector<std::string> write_plot_data(const std::string &directory, const std::vector<CellData> &cells,
                                             const FitReport &report)
    {
        namespace fs = std::filesystem;
        fs::create_directories(directory);
        std::vector<std::string> written;
        auto open = [&](const std::string &name)
        {
            const fs::path path = fs::path(directory) / name;
            std::ofstream f(path);
            if (!f)
                throw ParseError(path.string(), "cannot write plot file");
            written.push_back(path.string());
            return f;
        };

        for (const CellData &c : cells)
        {
            const std::string stem = file_token(c.location) + "_" + std::string(scenario_name(c.scenario));
            for (Quantity q : {Quantity::Npd, Quantity::Ndd, Quantity::Nop})
            {
                std::vector<double> x = c.values(q);
                if (x.empty())
                    continue;
                std::sort(x.begin(), x.end());
                std::vector<const FitRow *> fits;
                for (const FitRow &r : report.rows)
                    if (r.ok() && r.location == c.location && r.scenario == c.scenario && r.quantity == q)
                        fits.push_back(&r);

                const std::string suffix = stem + "_" + std::string(quantity_name(q)) + ".csv";
                std::ofstream cdf_file = open("cdf_" + suffix);
                cdf_file << "x,empirical";
                for (const FitRow *r : fits)
                    cdf_file << ',' << family_name(r->family);
                cdf_file << "\n";
                const double m = static_cast<double>(x.size());
                for (std::size_t i = 0; i < x.size(); ++i)
                {
                    cdf_file << fmt(x[i]) << ',' << fmt(static_cast<double>(i + 1) / m);
                    for (const FitRow *r : fits)
                        cdf_file << ',' << fmt(cdf(r->spec(), x[i]));
                    cdf_file << "\n";
                }

                std::ofstream qq_file = open("qq_" + suffix);
                qq_file << "family,theoretical,sample\n";
                for (const FitRow *r : fits)
                {
                    const std::vector<double> t = qq_theoretical(x.size(), r->spec());
                    for (std::size_t i = 0; i < x.size(); ++i)
                        qq_file << family_name(r->family) << ',' << fmt(t[i]) << ',' << fmt(x[i]) << "\n";
                }
            }
            if (!c.pdp.empty())
            {
                std::ofstream pdp_file = open("pdp_" + stem + ".csv");
                pdp_file << "link_id,delay_ns,normalized_power_db\n";
                for (std::size_t i = 0; i < c.pdp.size(); ++i)
                    pdp_file << quote(c.pdp_links[i]) << ',' << fmt(c.pdp[i].delay_ns) << ',' << fmt(c.pdp[i].normalized_power_db) << "\n";
            }
        }
        return written;
    }
}
