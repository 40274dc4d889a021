// Copyright 2026 The qcorr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qcorr/cli.h"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qcorr/analytic.h"
#include "qcorr/config.h"
#include "qcorr/csv.h"
#include "qcorr/empirical.h"
#include "qcorr/error.h"
#include "qcorr/parallel.h"
#include "qcorr/record_io.h"
#include "qcorr/replica.h"
#include "qcorr/trajectory.h"

namespace qcorr {

namespace {

constexpr uint64_t kBatchSize = 512;

// Nonzero exit when a `compare` finds points outside the threshold.
constexpr int kExitMismatch = 1;
constexpr int kExitError = 2;

struct Options {
    std::string config;
    std::string spec;
    std::string records;
    std::string out;
    std::string summary_out;
    std::string analytic_csv;
    std::string empirical_csv;
    std::optional<uint64_t> seed;
    std::optional<uint64_t> n_traj;
    std::optional<double> dt;
    std::vector<double> phi;
    bool mc = false;
    size_t workers = 0;
    uint64_t bin = 1;
    double gamma = 1.0 / 1.3;
    double threshold = 4.0;
};

// Writes to the named file, or to `fallback` when the name is empty.
class Sink {
   public:
    Sink(const std::string &path, std::ostream &fallback) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
            if (!*file_) {
                throw IoError("cannot open " + path + " for writing");
            }
        }
        stream_ = file_ ? file_.get() : &fallback;
    }
    std::ostream &stream() {
        return *stream_;
    }
    void finish() {
        stream_->flush();
        if (!*stream_) {
            throw IoError("write failed");
        }
    }

   private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream *stream_;
};

RunConfig load_run_config(const Options &o) {
    RunConfig cfg = parse_config(o.config);
    if (o.seed) {
        cfg.seed = *o.seed;
    }
    if (o.n_traj) {
        cfg.n_traj = *o.n_traj;
    }
    if (o.dt) {
        cfg.dt = *o.dt;
    }
    return cfg;
}

int cmd_simulate(const Options &o, std::ostream &err) {
    RunConfig cfg = load_run_config(o);
    SimConfig sim = cfg.sim_config();
    for (const auto &w : sim.validate()) {
        err << "warning: " << w << "\n";
    }
    std::string path = !o.out.empty() ? o.out : cfg.records_path.value_or("");
    if (path.empty()) {
        throw ArgumentError("simulate needs --out or outputs.records in the config");
    }
    RecordHeader header;
    header.dt = sim.dt;
    header.n_samples = sim.n_samples();
    header.channels = sim.channels;
    header.n_traj = sim.n_traj;
    header.master_seed = sim.master_seed;
    RecordWriter writer(path, header);
    uint64_t projections = 0;
    for (uint64_t first = 0; first < sim.n_traj; first += kBatchSize) {
        uint64_t count = std::min(kBatchSize, sim.n_traj - first);
        auto batch = map_trajectories(sim, first, count, o.workers, [](const SignalRecord &r) { return r; });
        for (const auto &r : batch) {
            writer.append(r);
            projections += r.projections;
        }
    }
    writer.close();
    double steps = static_cast<double>(sim.n_traj) * static_cast<double>(sim.n_samples());
    err << "wrote " << sim.n_traj << " trajectories x " << sim.channels.size() << " channels x " << sim.n_samples()
        << " samples to " << path << "; norm projections on " << projections << " steps ("
        << std::fixed << std::setprecision(2)
        << (steps > 0 ? 100.0 * static_cast<double>(projections) / steps : 0.0) << std::defaultfloat << "%)\n";
    return 0;
}

int cmd_analytic(const Options &o, std::ostream &out) {
    RunConfig cfg = load_run_config(o);
    CorrelatorFile file = parse_correlator_file(o.spec);
    MeasuredQubit qubit = cfg.qubit();
    BlochVector r_in = file.r_in.value_or(cfg.r_init);
    Sink sink(o.out, out);
    CsvWriter csv(sink.stream(), {"name", "n_events", "chain", "brute_force", "factorized"});
    for (const auto &c : file.correlators) {
        if (!c.windowed()) {
            CorrelatorSpec spec{c.events, r_in, file.t_in};
            csv.cell(c.name).cell(static_cast<uint64_t>(c.events.size()));
            csv.cell(chain_correlator(qubit, spec));
            if (c.events.size() <= kMaxBruteForceEvents) {
                csv.cell(brute_force_correlator(qubit, spec));
            } else {
                csv.blank();
            }
            if (qubit.factorizable()) {
                csv.cell(factorized_correlator(qubit, spec));
            } else {
                csv.blank();
            }
            csv.end_row();
            continue;
        }
        // Windowed: expectation of the estimator over a record that starts in r_in at t = 0.
        SimConfig sim = cfg.sim_config();
        CorrelatorPlan plan =
            plan_correlator(sim.dt, sim.n_samples(), qubit.channels.size(), c.gaps, *file.window, file.bin);
        csv.cell(c.name).cell(static_cast<uint64_t>(c.gaps.size()));
        csv.cell(expected_estimate(qubit, r_in, plan));
        bool coincident = false;
        for (size_t a = 1; a < plan.offsets.size(); a++) {
            coincident |= plan.offsets[a] == plan.offsets[a - 1];
        }
        auto placements = [&](auto &&eval) {
            return average_over_placements(plan, [&](std::span<const CorrelatorEvent> events, bool) {
                return eval(CorrelatorSpec{{events.begin(), events.end()}, r_in, 0.0});
            });
        };
        if (!coincident && c.gaps.size() <= kMaxBruteForceEvents) {
            csv.cell(placements([&](const CorrelatorSpec &s) { return brute_force_correlator(qubit, s); }));
        } else {
            csv.blank();
        }
        if (!coincident && qubit.factorizable()) {
            csv.cell(placements([&](const CorrelatorSpec &s) { return factorized_correlator(qubit, s); }));
        } else {
            csv.blank();
        }
        csv.end_row();
    }
    sink.finish();
    return 0;
}

std::string join_gaps(const std::vector<double> &gaps) {
    std::string s;
    for (size_t k = 0; k < gaps.size(); k++) {
        s += (k ? ";" : "") + format_double(gaps[k]);
    }
    return s;
}

int cmd_estimate(const Options &o, std::ostream &out, std::ostream &err) {
    CorrelatorFile file = parse_correlator_file(o.spec);
    RecordReader reader(o.records);
    const RecordHeader &h = reader.header();
    std::vector<CorrelatorPlan> plans;
    std::vector<const NamedCorrelator *> named;
    for (const auto &c : file.correlators) {
        if (!c.windowed()) {
            err << "note: skipping '" << c.name << "' (absolute-time events cannot be estimated)\n";
            continue;
        }
        plans.push_back(plan_correlator(h.dt, h.n_samples, h.channels.size(), c.gaps, *file.window, file.bin));
        named.push_back(&c);
    }
    if (plans.empty()) {
        throw ArgumentError("spec has no windowed correlators to estimate");
    }
    EnsembleSamples samples = make_samples(h.n_traj, plans);
    std::vector<SignalRecord> batch;
    while (reader.next_index() < h.n_traj) {
        uint64_t first = reader.next_index();
        batch.clear();
        SignalRecord rec;
        while (batch.size() < kBatchSize && reader.read_next(rec)) {
            batch.push_back(rec);
        }
        parallel_for(batch.size(), o.workers, [&](size_t i) {
            double *row = samples.values.data() + (first + i) * plans.size();
            sample_row(batch[i], plans, std::span(row, plans.size()));
        });
    }

    Sink sink(o.out, out);
    CsvWriter csv(
        sink.stream(),
        {"name", "n_events", "value", "std_error", "n_traj", "n_window_samples", "t_a_us", "bin_us", "gaps_us"});
    for (size_t p = 0; p < plans.size(); p++) {
        CorrelatorEstimate e = samples.estimate(p);
        csv.cell(named[p]->name).cell(static_cast<uint64_t>(plans[p].channels.size()));
        csv.cell(e.value).cell(e.std_error).cell(e.n_traj).cell(e.n_window_samples);
        csv.cell(plans[p].snapped_t_a()).cell(plans[p].bin_width()).cell(join_gaps(plans[p].snapped_gaps()));
        csv.end_row();
    }
    sink.finish();
    return 0;
}

int cmd_compare(const Options &o, std::ostream &out, std::ostream &err) {
    CsvTable analytic = parse_csv(read_text_file(o.analytic_csv), o.analytic_csv);
    CsvTable empirical = parse_csv(read_text_file(o.empirical_csv), o.empirical_csv);
    size_t a_name = analytic.column("name");
    size_t a_value = analytic.column("chain");
    std::map<std::string, double> reference;
    for (const auto &row : analytic.rows) {
        reference[row[a_name]] = parse_double_cell(row[a_value], "chain");
    }
    size_t e_name = empirical.column("name");
    size_t e_value = empirical.column("value");
    size_t e_se = empirical.column("std_error");

    Sink sink(o.out, out);
    CsvWriter csv(sink.stream(), {"name", "analytic", "value", "std_error", "z"});
    double worst = 0.0;
    size_t matched = 0;
    for (const auto &row : empirical.rows) {
        auto it = reference.find(row[e_name]);
        if (it == reference.end()) {
            err << "note: '" << row[e_name] << "' has no analytic counterpart\n";
            continue;
        }
        double value = parse_double_cell(row[e_value], "value");
        double se = parse_double_cell(row[e_se], "std_error");
        double z = std::abs(value - it->second) / se;
        if (std::isnan(z)) {
            z = INFINITY;
        }
        worst = std::max(worst, z);
        matched++;
        csv.cell(row[e_name]).cell(it->second).cell(value).cell(se).cell(z);
        csv.end_row();
    }
    sink.finish();
    if (matched == 0) {
        throw ArgumentError("no correlator names in common between the two tables");
    }
    err << "compared " << matched << " correlators; max |delta|/se = " << format_double(worst) << " (threshold "
        << format_double(o.threshold) << ")\n";
    return worst <= o.threshold ? 0 : kExitMismatch;
}

std::vector<ReplicaConfig> replica_configs(const Options &o, double t_a, double length) {
    std::vector<double> phis = o.phi;
    if (phis.empty()) {
        for (int n = 0; n <= 10; n++) {
            phis.push_back(replica_angle(n));
        }
    }
    std::vector<ReplicaConfig> out;
    for (double phi : phis) {
        ReplicaConfig c;
        c.phi = phi;
        c.gamma = o.gamma;
        c.window = {t_a, length};
        c.n_traj = o.n_traj.value_or(200000);
        c.dt = o.dt.value_or(0.01);
        c.seed = o.seed.value_or(1);
        c.bin = o.bin;
        c.workers = o.workers;
        c.validate();
        out.push_back(c);
    }
    return out;
}

int cmd_fig1(const Options &o, std::ostream &out) {
    Sink sink(o.out, out);
    CsvWriter csv(sink.stream(), {"phi", "dt21_us", "dt32_us", "analytic", "expected", "mc_value", "mc_se"});
    for (const auto &cfg : replica_configs(o, 1.0, 0.2)) {
        ScanResult scan = run_three_time_scan(cfg, default_three_time_grid(), o.mc);
        for (const auto &r : scan.rows) {
            csv.cell(r.phi).cell(r.dt21).cell(r.dt32).cell(r.analytic).cell(r.expected).cell(r.mc_value).cell(r.mc_se);
            csv.end_row();
        }
    }
    sink.finish();
    return 0;
}

int cmd_fig2(const Options &o, std::ostream &out) {
    std::vector<FourTimeSummary> summaries;
    {
        Sink sink(o.out, out);
        CsvWriter csv(
            sink.stream(), {"phi", "dt21_us", "dt32_us", "dt43_us", "analytic", "expected", "mc_value", "mc_se"});
        for (const auto &cfg : replica_configs(o, 1.0, 0.5)) {
            ScanResult scan = run_four_time_scan(cfg, default_four_time_grid(), o.mc);
            for (const auto &r : scan.rows) {
                csv.cell(r.phi).cell(r.dt21).cell(r.dt32).cell(r.dt43).cell(r.analytic).cell(r.expected);
                csv.cell(r.mc_value).cell(r.mc_se);
                csv.end_row();
            }
            summaries.push_back(summarize_four_time_scan(cfg, scan));
        }
        sink.finish();
    }

    std::string summary_path = o.summary_out;
    if (summary_path.empty() && !o.out.empty()) {
        summary_path = o.out;
        if (summary_path.size() > 4 && summary_path.ends_with(".csv")) {
            summary_path.resize(summary_path.size() - 4);
        }
        summary_path += "_summary.csv";
    }
    if (summary_path.empty()) {
        out << "\n";
    }
    Sink sink(summary_path, out);
    CsvWriter csv(
        sink.stream(),
        {"phi", "n_points", "analytic", "mc_mean", "mc_spread", "mc_se", "slope_per_us", "slope_se"});
    for (const auto &s : summaries) {
        csv.cell(s.phi).cell(static_cast<uint64_t>(s.n_points)).cell(s.analytic).cell(s.mc_mean);
        csv.cell(s.mc_spread).cell(s.mc_se).cell(s.slope).cell(s.slope_se);
        csv.end_row();
    }
    sink.finish();
    return 0;
}

}  // namespace

int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
    CLI::App app{"Multi-time correlators of continuously measured qubit observables", "qcorr"};
    app.require_subcommand(1);
    Options o;

    auto add_workers = [&](CLI::App *sub) {
        sub->add_option("--workers", o.workers, "Worker threads (0 = all cores)");
    };
    auto add_mc = [&](CLI::App *sub) {
        sub->add_option("--seed", o.seed, "Master seed");
        sub->add_option("--n-traj", o.n_traj, "Number of trajectories");
        sub->add_option("--dt", o.dt, "Integration step (us)");
    };

    auto *simulate = app.add_subcommand("simulate", "Simulate an ensemble and write a record file");
    simulate->add_option("--config", o.config, "Run configuration (JSON)")->required();
    simulate->add_option("--out", o.out, "Record file to write");
    add_mc(simulate);
    add_workers(simulate);

    auto *analytic = app.add_subcommand("analytic", "Exact correlators for a spec file");
    analytic->add_option("--config", o.config, "Run configuration (JSON)")->required();
    analytic->add_option("--spec", o.spec, "Correlator spec (JSON)")->required();
    analytic->add_option("--out", o.out, "CSV output (default stdout)");
    analytic->add_option("--dt", o.dt, "Sample spacing for windowed correlators (us)");

    auto *estimate = app.add_subcommand("estimate", "Estimate correlators from a record file");
    estimate->add_option("--records", o.records, "Record file")->required();
    estimate->add_option("--spec", o.spec, "Correlator spec (JSON)")->required();
    estimate->add_option("--out", o.out, "CSV output (default stdout)");
    add_workers(estimate);

    auto *compare = app.add_subcommand("compare", "Join analytic and empirical tables by name");
    compare->add_option("--analytic", o.analytic_csv, "CSV from `analytic`")->required();
    compare->add_option("--empirical", o.empirical_csv, "CSV from `estimate`")->required();
    compare->add_option("--threshold", o.threshold, "Maximum allowed |delta|/se")->capture_default_str();
    compare->add_option("--out", o.out, "CSV output (default stdout)");

    CLI::App *figs[2];
    figs[0] = app.add_subcommand("replica-fig1", "Three-time correlator scans of the two-detector experiment");
    figs[1] = app.add_subcommand("replica-fig2", "Four-time correlator scans of the two-detector experiment");
    for (auto *sub : figs) {
        sub->add_option("--phi", o.phi, "Angle(s) between the measurement axes (rad); default n pi / 10, n = 0..10");
        sub->add_flag("--mc,!--no-mc", o.mc, "Add Monte Carlo columns");
        sub->add_option("--bin", o.bin, "Samples per estimator bin")->capture_default_str();
        sub->add_option("--gamma", o.gamma, "Dephasing rate per channel (1/us)")->capture_default_str();
        sub->add_option("--out", o.out, "CSV output (default stdout)");
        add_mc(sub);
        add_workers(sub);
    }
    figs[1]->add_option("--summary-out", o.summary_out, "Per-phi summary CSV (default <out>_summary.csv)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError &e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitError;
    }

    try {
        if (simulate->parsed()) {
            return cmd_simulate(o, err);
        }
        if (analytic->parsed()) {
            return cmd_analytic(o, out);
        }
        if (estimate->parsed()) {
            return cmd_estimate(o, out, err);
        }
        if (compare->parsed()) {
            return cmd_compare(o, out, err);
        }
        if (figs[0]->parsed()) {
            return cmd_fig1(o, out);
        }
        if (figs[1]->parsed()) {
            return cmd_fig2(o, out);
        }
    } catch (const std::exception &e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
    err << app.help();
    return kExitError;
}

}  // namespace qcorr
