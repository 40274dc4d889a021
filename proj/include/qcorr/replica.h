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

#ifndef QCORR_REPLICA_H
#define QCORR_REPLICA_H

#include <cstdint>
#include <vector>

#include "qcorr/bloch.h"
#include "qcorr/empirical.h"
#include "qcorr/trajectory.h"

namespace qcorr {

/// Two detectors measuring sigma_z and sigma_phi = sigma_z cos(phi) + sigma_x sin(phi)
/// of an otherwise non-evolving qubit, each dephasing at rate gamma.
struct ReplicaConfig {
    double phi = 0.0;
    double gamma = 1.0 / 1.3;
    double eta = 1.0;
    Window window{1.0, 0.2};
    uint64_t n_traj = 200000;
    double dt = 0.01;
    uint64_t seed = 1;
    /// Samples per coarse bin used by the Monte Carlo estimator.
    uint64_t bin = 1;
    size_t workers = 0;

    void validate() const;
    /// {sin(phi/2), 0, cos(phi/2)}
    BlochVector r_init() const;
};

inline constexpr size_t kReplicaZ = 0;
inline constexpr size_t kReplicaPhi = 1;

/// phi = n pi / 10.
double replica_angle(int n);

/// Channels [z, phi] with tau = 1 / (2 eta gamma); Lambda is the sum of their dephasing generators.
MeasuredQubit replica_model(const ReplicaConfig &config);

SimConfig replica_sim_config(const ReplicaConfig &config, double t_total);

/// Window average of <I_channel(t_1 + gap)> over the fine sample times of the window.
double window_mean_signal(const ReplicaConfig &config, const CorrelatorPlan &plan, size_t factor = 0);

struct ThreeTimeGrid {
    std::vector<double> dt21;
    double dt32_fixed = 0.2;
    std::vector<double> dt32;
    double dt21_fixed = 0.5;
};

struct FourTimeGrid {
    /// Defaults to 0.15 / gamma when negative.
    double dt21 = -1.0;
    double dt43 = -1.0;
    std::vector<double> dt32;
};

ThreeTimeGrid default_three_time_grid();
FourTimeGrid default_four_time_grid();

/// One scan point. `expected` is the collapse-recipe expectation of the Monte
/// Carlo estimator (equal to `analytic` up to binning and window
/// discretization). Monte Carlo fields are NaN when not run.
struct ScanRow {
    double phi = 0.0;
    double dt21 = 0.0;
    double dt32 = 0.0;
    double dt43 = 0.0;
    double analytic = 0.0;
    double expected = 0.0;
    double mc_value = 0.0;
    double mc_se = 0.0;
};

struct ScanResult {
    std::vector<ScanRow> rows;
    std::vector<CorrelatorPlan> plans;
    /// Per-trajectory window averages, one column per row (empty without Monte Carlo).
    EnsembleSamples samples;
};

/// K_{phi z phi}(dt21, dt32) with analytic value K_{z phi}(dt32) * <I_phi>_window.
/// Rows: the dt21 sweep at dt32_fixed, then the dt32 sweep at dt21_fixed.
ScanResult run_three_time_scan(const ReplicaConfig &config, const ThreeTimeGrid &grid, bool monte_carlo);

/// K_{z phi z phi}(dt21, dt32, dt43) with analytic value K_{z phi}(dt21) K_{z phi}(dt43).
ScanResult run_four_time_scan(const ReplicaConfig &config, const FourTimeGrid &grid, bool monte_carlo);

/// Per-phi average of a four-time scan over dt32 in [0.5/gamma, 2.3/gamma].
struct FourTimeSummary {
    double phi = 0.0;
    size_t n_points = 0;
    double analytic = 0.0;
    double mc_mean = 0.0;
    /// Standard deviation of the scan values across the averaged points.
    double mc_spread = 0.0;
    /// Standard error of mc_mean, from the per-trajectory average.
    double mc_se = 0.0;
    double slope = 0.0;
    double slope_se = 0.0;
};

FourTimeSummary summarize_four_time_scan(const ReplicaConfig &config, const ScanResult &scan);

/// Least-squares slope of Monte Carlo values over the selected rows, with its
/// standard error from the per-trajectory spread. x is the abscissa per row.
CorrelatorEstimate scan_slope(const ScanResult &scan, const std::vector<size_t> &rows, const std::vector<double> &x);

}  // namespace qcorr

#endif
