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

#ifndef QCORR_EMPIRICAL_H
#define QCORR_EMPIRICAL_H

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "qcorr/analytic.h"
#include "qcorr/bloch.h"
#include "qcorr/trajectory.h"

namespace qcorr {

/// Averaging range [t_a, t_a + length) for the earliest time t_1, in us.
struct Window {
    double t_a = 0.0;
    double length = 0.0;
};

/// One factor I_channel(t_1 + gap) of an empirical correlator.
struct GapEvent {
    size_t channel = 0;
    double gap = 0.0;
};

/// A correlator request snapped to the (optionally coarse-grained) sample grid.
///
/// With bin = b, records are first averaged over consecutive groups of b
/// samples; all offsets and the window are then counted in coarse bins of
/// width b * dt. Times snap to the nearest bin.
struct CorrelatorPlan {
    double dt = 0.0;
    uint64_t bin = 1;
    std::vector<size_t> channels;
    /// Offset of each factor from t_1, in bins. Non-decreasing, first is 0.
    std::vector<uint64_t> offsets;
    uint64_t window_start = 0;
    uint64_t window_count = 0;

    double bin_width() const {
        return dt * static_cast<double>(bin);
    }
    double snapped_t_a() const {
        return static_cast<double>(window_start) * bin_width();
    }
    std::vector<double> snapped_gaps() const;
    /// Identifies the request; estimates with different keys cannot be merged.
    std::string key() const;
};

/// Validates and snaps a request against records of n_samples samples at spacing dt.
CorrelatorPlan plan_correlator(
    double dt, uint64_t n_samples, size_t n_channels, std::span<const GapEvent> gaps, const Window &window,
    uint64_t bin = 1);

/// Sample mean over trajectories with a standard error from the across-trajectory spread.
struct CorrelatorEstimate {
    double value = 0.0;
    double std_error = 0.0;
    uint64_t n_traj = 0;
    uint64_t n_window_samples = 0;
    std::string key;
    /// Running moments, kept for merging.
    long double mean = 0.0L;
    long double m2 = 0.0L;
};

/// Estimate from one value per trajectory (trajectory order), reduced by a
/// fixed tree so the result does not depend on how values were produced.
CorrelatorEstimate estimate_from_values(std::span<const double> per_trajectory, uint64_t n_window_samples, std::string key);

/// Pooled mean and variance of estimates over disjoint trajectory subsets.
CorrelatorEstimate merge_estimates(std::span<const CorrelatorEstimate> parts);

/// Records averaged over groups of `bin` samples, channel-major (n_channels x n_samples / bin).
std::vector<double> coarse_grain(const SignalRecord &record, uint64_t bin);

/// Window average over t_1 of the product of the plan's factors, for one trajectory.
/// `binned` must come from coarse_grain(record, plan.bin).
double window_product_average(std::span<const double> binned, uint64_t n_bins, const CorrelatorPlan &plan);

/// Window averages of several plans for every trajectory: values[traj * n_plans + plan].
struct EnsembleSamples {
    uint64_t n_traj = 0;
    size_t n_plans = 0;
    std::vector<double> values;
    std::vector<uint64_t> window_counts;
    std::vector<std::string> keys;

    CorrelatorEstimate estimate(size_t plan) const;
    /// Estimate of sum_p weights[p] * K_p, with the standard error of the combination.
    CorrelatorEstimate combination(std::span<const double> weights) const;
};

/// Zero-filled samples for n_traj trajectories of the given plans.
EnsembleSamples make_samples(uint64_t n_traj, std::span<const CorrelatorPlan> plans);

/// Window averages of every plan for one record (row.size() == plans.size()).
void sample_row(const SignalRecord &record, std::span<const CorrelatorPlan> plans, std::span<double> row);

/// All plans must share one bin value.
EnsembleSamples sample_records(const RecordSet &records, std::span<const CorrelatorPlan> plans, size_t workers = 0);

/// Simulates trajectories on the fly and keeps only the window averages.
EnsembleSamples sample_simulation(
    const SimConfig &config, std::span<const CorrelatorPlan> plans, size_t workers = 0,
    const ProgressCallback &progress = {});

CorrelatorEstimate estimate_correlator(
    const RecordSet &records, std::span<const GapEvent> gaps, const Window &window, uint64_t bin = 1,
    size_t workers = 0);

CorrelatorEstimate estimate_mean_signal(
    const RecordSet &records, size_t channel, const Window &window, uint64_t bin = 1, size_t workers = 0);

/// Collapse-recipe expectation of the plan's estimator for a qubit prepared in
/// r_init at t = 0: every coarse bin is expanded into its fine samples and the
/// correlator is averaged over all placements, with delta(0) -> 1/dt for
/// same-channel factors landing on the same sample. Throws ArgumentError if
/// two factors on different channels can share a sample, since the Euler
/// record then measures a state correlation the recipe does not describe.
double expected_estimate(const MeasuredQubit &qubit, const BlochVector &r_init, const CorrelatorPlan &plan);

/// Average of fn over every fine-sample placement of the plan's factors, for
/// every window bin. fn receives the events sorted by time and whether any two
/// share a sample.
double average_over_placements(
    const CorrelatorPlan &plan,
    const std::function<double(std::span<const CorrelatorEvent> events, bool coincident)> &fn);

}  // namespace qcorr

#endif
