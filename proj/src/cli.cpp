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
#include "gbsm/metrics.hpp"
#include "gbsm/pipeline.hpp"
#include "gbsm/synth.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

namespace gbsm
{
    namespace
    {
        std::string shortest(double v)
        {
            char buf[64];
            const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
            return std::string(buf, end);
        }

        std::ofstream open_out(const std::string &path)
        {
            std::ofstream f(path, std::ios::binary);
            if (!f)
                throw ParseError(path, "cannot open output file");
            return f;
        }

        std::vector<double> parse_list(const std::string &text, const char *what)
        {
            std::vector<double> out;
            std::stringstream ss(text);
            std::string item;
            while (std::getline(ss, item, ','))
            {
                double v = 0.0;
                const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
                if (item.empty() || ec != std::errc() || ptr != item.data() + item.size())
                    throw UsageError(std::string("invalid number '") + item + "' in " + what);
                out.push_back(v);
            }
            return out;
        }

        std::vector<DistFamily> parse_families(const std::string &text)
        {
            std::vector<DistFamily> out;
            std::stringstream ss(text);
            std::string item;
            while (std::getline(ss, item, ','))
                out.push_back(parse_family(item));
            return out;
        }

        void print_row(std::ostream &out, const std::string &label, double value, const std::string &unit)
        {
            out << std::left << std::setw(26) << label << shortest(value) << (unit.empty() ? "" : " " + unit) << "\n";
        }

        std::string dist_text(const DistSpec &d)
        {
            std::ostringstream s;
            s << family_name(d.family) << "(";
            for (double v : d.shape)
                s << "shape=" << shortest(v) << ", ";
            s << "loc=" << shortest(d.loc) << ", scale=" << shortest(d.scale) << ")";
            return s.str();
        }

        struct Options
        {
            std::string catalog_path;

            // fit
            std::string input, mapping, out, format = "csv", plots, families;
            bool allow_unknown = false;
            unsigned threads = 0;

            // generate / med
            std::string location, scenario;
            double distance = 0.0;
            unsigned ntx = 1, nrx = 1, nfreq = 256;
            std::uint64_t seed = 0;
            double bandwidth = -1.0, spacing = 0.5;
            int nop = 0;
            std::string angle_spread, fspl = "per-frequency", prefix = "channel";
            bool no_los_pin = false, channel_json = false;

            std::size_t draws = 10000;
            std::string distances;
            double threshold = 0.0, dynamic_range = 0.0;
            bool no_rx_gain = false;

            std::vector<std::string> catalog_args;
        };

        const Catalog &select_catalog(const Options &o, std::unique_ptr<Catalog> &holder)
        {
            if (o.catalog_path.empty())
                return default_catalog();
            holder = std::make_unique<Catalog>(Catalog::load_file(o.catalog_path));
            return *holder;
        }

        int run_fit(const Options &o, const Catalog &catalog, std::ostream &out, std::ostream &err)
        {
            IngestOptions io;
            io.catalog = &catalog;
            io.allow_unknown = o.allow_unknown;
            Dataset ds;
            {
                std::ifstream in(o.input);
                if (!in)
                    throw ParseError(o.input, "cannot open input file");
                ds = o.mapping.empty() ? ingest(in, io) : ingest_mapped(in, ColumnMapping::load_file(o.mapping), io);
            }
            for (const auto &w : ds.warnings)
                err << "warning: " << w << "\n";

            FitOptions fo;
            fo.catalog = &catalog;
            fo.threads = o.threads;
            if (!o.families.empty())
                fo.npd_families = fo.nop_families = parse_families(o.families);
            const auto cells = collect_cells(ds, catalog);
            const FitReport report = run_fit_pipeline(cells, fo);
            const ReportFormat fmt = parse_report_format(o.format);
            if (o.out.empty())
                emit_report(report, fmt, out);
            else
            {
                std::ofstream f = open_out(o.out);
                emit_report(report, fmt, f);
            }
            if (!o.plots.empty())
            {
                const auto files = write_plot_data(o.plots, cells, report);
                err << "wrote " << files.size() << " plot files to " << o.plots << "\n";
            }
            return 0;
        }

        SynthesisConfig synthesis_config(const Options &o)
        {
            SynthesisConfig cfg;
            cfg.seed = o.seed;
            cfg.pin_los_path = !o.no_los_pin;
            if (o.nop > 0)
                cfg.nop_source = NopFixed{o.nop};
            if (!o.angle_spread.empty())
            {
                const auto v = parse_list(o.angle_spread, "--angle-spread");
                if (v.size() != 3)
                    throw UsageError("--angle-spread expects shape,loc,scale in degrees");
                LogNormalSpread s;
                s.spread_deg = DistSpec{DistFamily::LogNormal, {v[0]}, v[1], v[2]};
                cfg.angle_model = s;
            }
            return cfg;
        }

        int run_generate(const Options &o, const Catalog &catalog, std::ostream &out, std::ostream &err)
        {
            const Scenario sc = parse_scenario(o.scenario);
            const LocationProfile &profile = catalog.profile(o.location);
            const ScenarioStats &stats = catalog.stats(o.location, sc);
            const SynthesisConfig cfg = synthesis_config(o);

            const PathSet ps = draw_paths(profile, stats, cfg, o.distance);
            if (!ps.distance_in_range)
                err << "warning: distance " << shortest(o.distance) << " m lies outside the campaign range of " << profile.name << "\n";

            ArrayConfig arr;
            arr.n_tx = o.ntx;
            arr.n_rx = o.nrx;
            arr.spacing_wavelengths = o.spacing;
            FsplMode mode;
            if (o.fspl == "per-frequency")
                mode = FsplMode::PerFrequency;
            else if (o.fspl == "center")
                mode = FsplMode::CenterFrequency;
            else
                throw UsageError("--fspl must be 'per-frequency' or 'center'");
            const double bw = o.bandwidth >= 0.0 ? o.bandwidth : profile.bandwidth_hz();
            const auto grid = frequency_grid(profile.center_freq_hz, bw, o.nfreq);
            const arma::cx_cube H = frequency_response(ps, arr, grid, mode);

            {
                std::ofstream f = open_out(o.prefix + "_paths.json");
                nlohmann::json j = ps;
                j["location"] = profile.name;
                j["scenario"] = std::string(scenario_name(sc));
                j["seed"] = o.seed;
                f << j.dump(2) << "\n";
            }
            {
                std::ofstream f = open_out(o.prefix + "_channel.bin");
                write_channel_binary(f, H);
            }
            if (o.channel_json)
            {
                std::ofstream f = open_out(o.prefix + "_channel.json");
                f << channel_to_json(H, grid).dump() << "\n";
            }
            {
                std::ofstream f = open_out(o.prefix + "_taps.csv");
                f << "delay_s,re,im\n";
                for (const Tap &t : tap_delay_line(ps, profile.center_freq_hz))
                    f << shortest(t.delay_s) << ',' << shortest(t.amplitude.real()) << ',' << shortest(t.amplitude.imag()) << "\n";
            }
            out << profile.name << " " << scenario_name(sc) << ": " << ps.paths.size() << " paths at "
                << shortest(o.distance) << " m, channel " << H.n_slices << " x " << H.n_rows << " x " << H.n_cols
                << " written to " << o.prefix << "_*\n";
            return 0;
        }

        int run_med(const Options &o, const Catalog &catalog, std::ostream &out, std::ostream &err)
        {
            const Scenario sc = parse_scenario(o.scenario);
            const LocationProfile &profile = catalog.profile(o.location);
            const ScenarioStats &stats = catalog.stats(o.location, sc);
            const SynthesisConfig cfg = synthesis_config(o);

            MedOptions mo;
            mo.n_draws = o.draws;
            mo.threads = o.threads;
            mo.include_rx_gain = !o.no_rx_gain;
            if (o.threshold != 0.0)
                mo.threshold_dbm = o.threshold;
            if (o.dynamic_range > 0.0)
                mo.dynamic_range_db = o.dynamic_range;
            if (!o.distances.empty())
                mo.link_distances_m = parse_list(o.distances, "--distances");

            std::optional<double> data_med;
            if (!o.input.empty())
            {
                IngestOptions io;
                io.catalog = &catalog;
                const Dataset ds = ingest_file(o.input, io);
                double sum = 0.0;
                std::size_t n = 0;
                for (const LinkGroup &g : ds.links)
                {
                    if (g.location != profile.name || g.scenario != sc)
                        continue;
                    if (o.distances.empty())
                    {
                        mo.link_distances_m.push_back(g.distance_m);
                        mo.per_link_nop.push_back(static_cast<int>(g.records.size()));
                    }
                    if (!g.records.empty())
                    {
                        std::vector<double> d;
                        for (const auto &r : g.records)
                            d.push_back(r.delay_ns);
                        sum += max_excess_delay(std::span<const double>(d));
                        ++n;
                    }
                }
                if (n == 0)
                    throw NotAvailableError("input has no links for " + profile.name + " " + std::string(scenario_name(sc)));
                data_med = sum / static_cast<double>(n);
            }

            const MedSummary s = monte_carlo_med(profile, stats, cfg, mo);
            out << profile.name << " " << scenario_name(sc) << "\n";
            print_row(out, "links", static_cast<double>(s.per_link_med_ns.size()), "");
            print_row(out, "draws per link", static_cast<double>(s.n_draws), "");
            print_row(out, "surviving path fraction", s.surviving_path_fraction, "");
            print_row(out, "extinguished draws", static_cast<double>(s.extinguished_draws), "");
            print_row(out, "mean MED (model)", s.mean_med_ns, "ns");
            if (data_med)
                print_row(out, "mean MED (input data)", *data_med, "ns");
            try
            {
                const MedReference ref = catalog.med_reference(profile.name, sc);
                print_row(out, "published MED empirical", ref.empirical_ns, "ns");
                print_row(out, "published MED model", ref.model_ns, "ns");
                print_row(out, "model / published model", s.mean_med_ns / ref.model_ns, "");
            }
            catch (const NotAvailableError &)
            {
                out << "published MED                n/a\n";
            }
            if (!o.out.empty())
            {
                nlohmann::json j = {{"location", profile.name},
                                    {"scenario", std::string(scenario_name(sc))},
                                    {"seed", o.seed},
                                    {"mean_med_ns", s.mean_med_ns},
                                    {"per_link_med_ns", s.per_link_med_ns},
                                    {"link_distances_m", s.link_distances_m},
                                    {"n_draws", s.n_draws},
                                    {"surviving_path_fraction", s.surviving_path_fraction},
                                    {"extinguished_draws", s.extinguished_draws},
                                    {"excluded_links", s.excluded_links}};
                std::ofstream f = open_out(o.out);
                f << j.dump(2) << "\n";
            }
            (void)err;
            return 0;
        }

        int run_catalog(const Options &o, const Catalog &catalog, std::ostream &out)
        {
            const auto &a = o.catalog_args;
            if (a.empty())
                throw UsageError("catalog needs an action: list, show <location> <scenario>, or dump");
            if (a[0] == "dump" && a.size() == 1)
            {
                out << catalog.dump();
                return 0;
            }
            if (a[0] == "list" && a.size() == 1)
            {
                for (const auto &name : catalog.location_names())
                {
                    const auto &p = catalog.profile(name);
                    out << std::left << std::setw(12) << name << std::setw(9) << environment_name(p.environment);
                    for (Scenario s : catalog.scenarios(name))
                        out << scenario_name(s) << " ";
                    out << "\n";
                }
                return 0;
            }
            if (a[0] == "show" && a.size() == 3)
            {
                const Scenario sc = parse_scenario(a[2]);
                const LocationProfile &p = catalog.profile(a[1]);
                const ScenarioStats &s = catalog.stats(a[1], sc);
                out << "location     " << p.name << " (" << environment_name(p.environment) << ")\n"
                    << "scenario     " << scenario_name(sc) << (s.low_confidence ? " (low confidence)" : "") << "\n"
                    << "center       " << shortest(p.center_freq_hz / 1e9) << " GHz, band " << shortest(p.rf_band_hz.first / 1e9)
                    << "-" << shortest(p.rf_band_hz.second / 1e9) << " GHz\n"
                    << "eirp         " << shortest(p.eirp_dbm) << " dBm, rx gain " << shortest(p.rx_gain_dbi) << " dBi\n"
                    << "threshold    " << shortest(p.noise_threshold_dbm()) << " dBm\n"
                    << "distance     " << shortest(p.link_distance_range_m.first) << "-" << shortest(p.link_distance_range_m.second) << " m\n"
                    << "npd          " << dist_text(s.npd) << "\n"
                    << "ndd          " << dist_text(s.ndd) << "\n"
                    << "nop          max " << s.nop.max << ", min " << s.nop.min << ", mean " << shortest(s.nop.mean) << "\n"
                    << "data         " << s.data_points << " points, " << s.measurements << " measurements\n"
                    << "med          empirical " << (s.med_empirical_ns ? shortest(*s.med_empirical_ns) + " ns" : "n/a")
                    << ", model " << (s.med_model_ns ? shortest(*s.med_model_ns) + " ns" : "n/a") << "\n";
                return 0;
            }
            throw UsageError("catalog actions: list | show <location> <scenario> | dump");
        }
    }

    int cli_dispatch(const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
    {
        CLI::App app{"Stochastic D-band channel synthesis and distribution fitting", "gbsm"};
        app.require_subcommand(1);
        Options o;
        app.add_option("--catalog", o.catalog_path, "Catalog JSON file (default: built-in, or $GBSM_CATALOG)");

        CLI::App *fit = app.add_subcommand("fit", "Fit candidate distributions to a measurement CSV");
        fit->add_option("--input", o.input, "Measurement CSV")->required();
        fit->add_option("--mapping", o.mapping, "Column mapping JSON for foreign CSV layouts");
        fit->add_option("--out", o.out, "Report file (default: stdout)");
        fit->add_option("--format", o.format, "csv or json")->capture_default_str();
        fit->add_option("--plots", o.plots, "Directory for plot-ready CSV files");
        fit->add_option("--families", o.families, "Comma-separated power/NoP candidate families");
        fit->add_flag("--allow-unknown", o.allow_unknown, "Accept locations missing from the catalog");
        fit->add_option("--threads", o.threads, "Worker threads (0: all cores)");

        auto add_synthesis = [&](CLI::App *c)
        {
            c->add_option("--location", o.location, "Catalog location")->required();
            c->add_option("--scenario", o.scenario, "LOS or NLOS")->required();
            c->add_option("--seed", o.seed, "Random seed")->capture_default_str();
            c->add_option("--nop", o.nop, "Fixed number of paths (default: catalog mean)");
            c->add_option("--angle-spread", o.angle_spread, "Log-normal angular spread shape,loc,scale in degrees");
            c->add_flag("--no-los-pin", o.no_los_pin, "Do not pin the first LOS path at zero excess gain");
        };

        CLI::App *gen = app.add_subcommand("generate", "Draw one channel realization");
        add_synthesis(gen);
        gen->add_option("--distance", o.distance, "Link distance in meters")->required();
        gen->add_option("--ntx", o.ntx, "Transmit array elements")->capture_default_str();
        gen->add_option("--nrx", o.nrx, "Receive array elements")->capture_default_str();
        gen->add_option("--nfreq", o.nfreq, "Frequency points")->capture_default_str();
        gen->add_option("--bandwidth", o.bandwidth, "Bandwidth in Hz (default: campaign band)");
        gen->add_option("--spacing", o.spacing, "Element spacing in wavelengths")->capture_default_str();
        gen->add_option("--fspl", o.fspl, "per-frequency or center")->capture_default_str();
        gen->add_option("--out", o.prefix, "Output file prefix")->capture_default_str();
        gen->add_flag("--channel-json", o.channel_json, "Also write the channel tensor as JSON");

        CLI::App *med = app.add_subcommand("med", "Monte Carlo maximum excess delay");
        add_synthesis(med);
        med->add_option("--draws", o.draws, "Realizations per link")->capture_default_str();
        med->add_option("--distances", o.distances, "Comma-separated link distances in meters");
        med->add_option("--threshold", o.threshold, "Noise threshold in dBm (default: floor + margin)");
        med->add_flag("--no-rx-gain", o.no_rx_gain, "Leave the receive antenna gain out of the power budget");
        med->add_option("--dynamic-range", o.dynamic_range, "Keep only paths within this many dB of the strongest");
        med->add_option("--threads", o.threads, "Worker threads (0: all cores)");
        med->add_option("--input", o.input, "Measurement CSV supplying link distances and path counts");
        med->add_option("--out", o.out, "JSON summary file");

        CLI::App *cat = app.add_subcommand("catalog", "Inspect the catalog: list | show <location> <scenario> | dump");
        cat->add_option("action", o.catalog_args, "Action and arguments");

        if (args.empty())
        {
            err << app.help();
            return 1;
        }
        try
        {
            std::vector<std::string> reversed(args.rbegin(), args.rend());
            app.parse(reversed);
        }
        catch (const CLI::ParseError &e)
        {
            const int code = app.exit(e, out, err);
            return code == 0 ? 0 : 1;
        }

        try
        {
            std::unique_ptr<Catalog> holder;
            const Catalog &catalog = select_catalog(o, holder);
            if (fit->parsed())
                return run_fit(o, catalog, out, err);
            if (gen->parsed())
                return run_generate(o, catalog, out, err);
            if (med->parsed())
                return run_med(o, catalog, out, err);
            return run_catalog(o, catalog, out);
        }
        catch (const UsageError &e)
        {
            err << "error: " << e.what() << "\n";
            return 1;
        }
        catch (const ParameterError &e)
        {
            err << "error: " << e.what() << "\n";
            return 1;
        }
        catch (const LookupError &e)
        {
            err << "error: " << e.what() << "\n";
            return 1;
        }
        catch (const std::exception &e)
        {
            err << "error: " << e.what() << "\n";
            return 2;
        }
    }
}
