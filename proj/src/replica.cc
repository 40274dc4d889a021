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

#include "qcorr/replica.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "qcorr/analytic.h"
#include "qcorr/error.h"

namespace qcorr {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double snap_to(double t, double width) {
    return std::round(t / width) * width;
}

std::vector<double> linear_grid(double first, double step, size_t count) {
    std::vector<double> out;
    for (size_t k = 0; k < count; k++) {
        out.push_back(first + step * static_cast<double>(k));
    }
    return out;
}

// Plans are laid out against an unbounded record first; the needed span is
// read back from them.
constexpr uint64_t kUnboundedSamples = uint64_t{1} << 40;

struct PlannedScan {
    std::vector<ScanRow> rows;
    std::vector<CorrelatorPlan> plans;
};

double required_span(const std::vector<CorrelatorPlan> &plans) {
    uint64_t last = 0;
    for (const auto &p : plans) {
        last = std::max(last, p.window_start + p.window_count + p.offsets.back());
    }
    return static_cast<double>(last + 2) * plans.front().bin_width();
}

void attach_expected(const ReplicaConfig &config, const MeasuredQubit &qubit, ScanResult &out) {
    for (size_t i = 0; i < out.rows.size(); i++) {
        out.rows[i].expected = expected_estimate(qubit, config.r_init(), out.plans[i]);
    }
}

void attach_monte_carlo(const ReplicaConfig &config, ScanResult &out) {
    SimConfig sim = replica_sim_config(config, required_span(out.plans));
    out.samples = sample_simulation(sim, out.plans, config.workers);
    for (size_t i = 0; i < out.rows.size(); i++) {
        CorrelatorEstimate e = out.samples.estimate(i);
        out.rows[i].mc_value = e.value;
        out.rows[i].mc_se = e.std_error;
    }
}

}  // namespace

void ReplicaConfig::validate() const {
    if (!(phi >= -1e-12 && phi <= std::numbers::pi + 1e-12)) {
        throw ValidationError("phi must lie in [0, pi]");
    }
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        throw ValidationError("gamma must be positive");
    }
    if (!(eta > 0.0 && eta <= 1.0)) {
        throw ValidationError("eta must lie in (0, 1]");
    }
    if (!(window.length > 0.0) || !(window.t_a >= 0.0)) {
        throw ValidationError("window needs t_a >= 0 and a positive length");
    }
    if (n_traj < 1 || !(dt > 0.0) || bin < 1) {
        throw ValidationError("replica Monte Carlo needs n_traj >= 1, dt > 0 and bin >= 1");
    }
}

BlochVector ReplicaConfig::r_init() const {
    return {std::sin(phi / 2.0), 0.0, std::cos(phi / 2.0)};
}

double replica_angle(int n) {
    return n * std::numbers::pi / 10.0;
}

MeasuredQubit replica_model(const ReplicaConfig &config) {
    config.validate();
    MeasuredQubit q;
    q.channels.push_back(channel_with_rate({0, 0, 1}, config.gamma, config.eta));
    q.channels.push_back(channel_with_rate({std::sin(config.phi), 0, std::cos(config.phi)}, config.gamma, config.eta));
    q.model = build_ensemble_generator(Vec3::Zero(), 0.0, Mat3::Zero(), Vec3::Zero(), q.channels);
    return q;
}

SimConfig replica_sim_config(const ReplicaConfig &config, double t_total) {
    MeasuredQubit q = replica_model(config);
    SimConfig sim;
    sim.model = q.model;
    sim.channels = q.channels;
    sim.r_init = config.r_init();
    sim.t_total = t_total;
    sim.dt = config.dt;
    sim.n_traj = config.n_traj;
    sim.master_seed = config.seed;
    return sim;
}

double window_mean_signal(const ReplicaConfig &config, const CorrelatorPlan &plan, size_t factor) {
    MeasuredQubit q = replica_model(config);
    long double sum = 0.0L;
    for (uint64_t j = plan.window_start; j < plan.window_start + plan.window_count; j++) {
        for (uint64_t a = 0; a < plan.bin; a++) {
            double t = static_cast<double>((j + plan.offsets[factor]) * plan.bin + a) * plan.dt;
            sum += mean_signal(q, config.r_init(), 0.0, plan.channels[factor], t);
        }
    }
    return static_cast<double>(sum / static_cast<long double>(plan.window_count * plan.bin));
}

ThreeTimeGrid default_three_time_grid() {
    ThreeTimeGrid g;
    g.dt21 = linear_grid(0.1, 0.1, 30);
    g.dt32_fixed = 0.2;
    g.dt32 = linear_grid(0.1, 0.1, 30);
    g.dt21_fixed = 0.5;
    return g;
}

FourTimeGrid default_four_time_grid() {
    FourTimeGrid g;
    g.dt32 = linear_grid(0.1, 0.1, 30);
    return g;
}

ScanResult run_three_time_scan(const ReplicaConfig &config, const ThreeTimeGrid &grid, bool monte_carlo) {
    MeasuredQubit q = replica_model(config);
    double width = config.dt * static_cast<double>(config.bin);
    ScanResult out;
    auto add_point = [&](double dt21, double dt32) {
        dt21 = snap_to(dt21, width);
        dt32 = snap_to(dt32, width);
        GapEvent gaps[] = {{kReplicaPhi, 0.0}, {kReplicaZ, dt21}, {kReplicaPhi, dt21 + dt32}};
        CorrelatorPlan plan = plan_correlator(config.dt, kUnboundedSamples, 2, gaps, config.window, config.bin);
        ScanRow row;
        row.phi = config.phi;
        row.dt21 = dt21;
        row.dt32 = dt32;
        row.dt43 = kNaN;
        row.analytic = two_time_correlator(q, kReplicaZ, 0.0, kReplicaPhi, dt32) * window_mean_signal(config, plan);
        row.mc_value = row.mc_se = kNaN;
        out.rows.push_back(row);
        out.plans.push_back(plan);
    };
    for (double d : grid.dt21) {
        add_point(d, grid.dt32_fixed);
    }
    for (double d : grid.dt32) {
        add_point(grid.dt21_fixed, d);
    }
    attach_expected(config, q, out);
    if (monte_carlo && !out.rows.empty()) {
        attach_monte_carlo(config, out);
    }
    return out;
}

ScanResult run_four_time_scan(const ReplicaConfig &config, const FourTimeGrid &grid, bool monte_carlo) {
    MeasuredQubit q = replica_model(config);
    double width = config.dt * static_cast<double>(config.bin);
    double dt21 = snap_to(grid.dt21 < 0 ? 0.15 / config.gamma : grid.dt21, width);
    double dt43 = snap_to(grid.dt43 < 0 ? 0.15 / config.gamma : grid.dt43, width);
    double k21 = two_time_correlator(q, kReplicaZ, 0.0, kReplicaPhi, dt21);
    double k43 = two_time_correlator(q, kReplicaZ, 0.0, kReplicaPhi, dt43);
    ScanResult out;
    for (double d : grid.dt32) {
        double dt32 = snap_to(d, width);
        GapEvent gaps[] = {
            {kReplicaZ, 0.0},
            {kReplicaPhi, dt21},
            {kReplicaZ, dt21 + dt32},
            {kReplicaPhi, dt21 + dt32 + dt43},
        };
        ScanRow row;
        row.phi = config.phi;
        row.dt21 = dt21;
        row.dt32 = dt32;
        row.dt43 = dt43;
        row.analytic = k21 * k43;
        row.mc_value = row.mc_se = kNaN;
        out.rows.push_back(row);
        out.plans.push_back(plan_correlator(config.dt, kUnboundedSamples, 2, gaps, config.window, config.bin));
    }
    attach_expected(config, q, out);
    if (monte_carlo && !out.rows.empty()) {
        attach_monte_carlo(config, out);
    }
    return out;
}

CorrelatorEstimate scan_slope(const ScanResult &scan, const std::vector<size_t> &rows, const std::vector<double> &x) {
    if (rows.size() != x.size() || rows.size() < 2) {
        throw ArgumentError("slope needs at least two points with matching abscissae");
    }
    if (scan.samples.n_traj == 0) {
        throw ArgumentError("slope needs a Monte Carlo scan");
    }
    double mean_x = 0.0;
    for (double v : x) {
        mean_x += v;
    }
    mean_x /= static_cast<double>(x.size());
    double sxx = 0.0;
    for (double v : x) {
        sxx += (v - mean_x) * (v - mean_x);
    }
    std::vector<double> weights(scan.samples.n_plans, 0.0);
    for (size_t i = 0; i < rows.size(); i++) {
        weights[rows[i]] += (x[i] - mean_x) / sxx;
    }
    return scan.samples.combination(weights);
}

FourTimeSummary summarize_four_time_scan(const ReplicaConfig &config, const ScanResult &scan) {
    FourTimeSummary s;
    s.phi = config.phi;
    double lo = 0.5 / config.gamma - 1e-9;
    double hi = 2.3 / config.gamma + 1e-9;
    std::vector<size_t> selected;
    std::vector<double> x;
    for (size_t i = 0; i < scan.rows.size(); i++) {
        if (scan.rows[i].dt32 >= lo && scan.rows[i].dt32 <= hi) {
            selected.push_back(i);
            x.push_back(scan.rows[i].dt32);
        }
    }
    s.n_points = selected.size();
    if (selected.empty()) {
        throw ArgumentError("no scan points inside [0.5/gamma, 2.3/gamma]");
    }
    s.analytic = scan.rows[selected.front()].analytic;
    if (scan.samples.n_traj == 0) {
        s.mc_mean = s.mc_spread = s.mc_se = s.slope = s.slope_se = kNaN;
        return s;
    }
    std::vector<double> weights(scan.samples.n_plans, 0.0);
    for (size_t i : selected) {
        weights[i] = 1.0 / static_cast<double>(selected.size());
    }
    CorrelatorEstimate avg = scan.samples.combination(weights);
    s.mc_mean = avg.value;
    s.mc_se = avg.std_error;
    double ss = 0.0;
    for (size_t i : selected) {
        ss += (scan.rows[i].mc_value - s.mc_mean) * (scan.rows[i].mc_value - s.mc_mean);
    }
    s.mc_spread = selected.size() > 1 ? std::sqrt(ss / static_cast<double>(selected.size() - 1)) : 0.0;
    if (selected.size() >= 2) {
        CorrelatorEstimate slope = scan_slope(scan, selected, x);
        s.slope = slope.value;
        s.slope_se = slope.std_error;
    } else {
        s.slope = s.slope_se = kNaN;
    }
    return s;
}

}  // namespace qcorr
