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

#ifndef QCORR_TRAJECTORY_H
#define QCORR_TRAJECTORY_H

#include <atomic>
#include <cstdint>
#include <functional>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "qcorr/bloch.h"
#include "qcorr/parallel.h"

namespace qcorr {

/// Parameters of a Monte Carlo run. Times in microseconds; records start at t = 0.
struct SimConfig {
    /// Full ensemble generator, measurement dephasing included.
    EnsembleModel model;
    std::vector<MeasurementChannel> channels;
    BlochVector r_init = BlochVector::Zero();
    double t_total = 1.0;
    double dt = 0.01;
    uint64_t n_traj = 1;
    uint64_t master_seed = 0;
    /// Keep r(t_k) for k = 0..n_samples in each record.
    bool record_state = false;
    /// Scales both backaction and detector noise; 1 is physical, 0 gives noiseless records.
    double noise_amplitude = 1.0;

    /// Throws ValidationError on invalid settings; returns non-fatal warnings.
    std::vector<std::string> validate() const;
    uint64_t n_samples() const;
};

/// Ratio dt / min(tau) above which a warning is issued, and above which the run is refused.
inline constexpr double kDtWarnRatio = 0.01;
inline constexpr double kDtMaxRatio = 0.05;

/// Output of one trajectory. Sample k of each channel is the bin average of I_l over [k dt, (k+1) dt).
struct SignalRecord {
    double dt = 0.0;
    uint64_t n_samples = 0;
    std::vector<MeasurementChannel> channels;
    uint64_t trajectory = 0;
    uint64_t master_seed = 0;
    /// Channel-major: samples[l * n_samples + k].
    std::vector<double> samples;
    /// r(t_k) for k = 0..n_samples when requested, else empty.
    std::vector<Vec3> states;
    /// Steps whose Euler update left the Bloch ball and were rescaled.
    uint64_t projections = 0;

    std::span<const double> channel(size_t l) const {
        return {samples.data() + l * n_samples, static_cast<size_t>(n_samples)};
    }
    std::span<double> channel(size_t l) {
        return {samples.data() + l * n_samples, static_cast<size_t>(n_samples)};
    }
};

/// A collection of records sharing dt, n_samples, channels and seed; ordered by trajectory index.
struct RecordSet {
    double dt = 0.0;
    uint64_t n_samples = 0;
    std::vector<MeasurementChannel> channels;
    uint64_t master_seed = 0;
    std::vector<SignalRecord> records;

    /// Throws FormatError if the records disagree with the set's metadata.
    void validate() const;
    uint64_t total_projections() const;
};

/// Compares the persisted data only; state traces and projection counts are run metadata.
bool operator==(const SignalRecord &a, const SignalRecord &b);
bool operator==(const RecordSet &a, const RecordSet &b);

struct StepResult {
    BlochVector r;
    bool projected = false;
};

/// One explicit Euler-Maruyama step of the Ito quantum Bayesian equation.
///
/// With dW_l = sqrt(dt) xi_l:
///   r' = r + Lambda (r - r_st) dt
///          + sum_l [(n_l - (n_l.r) r) + K_l (n_l x r)] dW_l / sqrt(tau_l)
///   I_l = n_l.r + sqrt(tau_l) dW_l / dt
/// If |r'| > 1 it is rescaled onto the sphere. `outputs` receives I_l.
StepResult ito_step(
    const BlochVector &r,
    const ModelSegment &segment,
    std::span<const MeasurementChannel> channels,
    double dt,
    std::span<const double> noise_draws,
    std::span<double> outputs,
    uint64_t step_index = 0,
    double noise_amplitude = 1.0);

/// Integrates one trajectory; deterministic in (master_seed, trajectory).
SignalRecord simulate_trajectory(const SimConfig &config, uint64_t trajectory);

namespace detail {
/// simulate_trajectory without re-validating the config.
SignalRecord integrate_trajectory(const SimConfig &config, uint64_t trajectory);
}  // namespace detail

using ProgressCallback = std::function<void(uint64_t done, uint64_t total)>;

/// Simulates trajectories [0, n_traj). Identical output for any worker count.
RecordSet simulate_ensemble(const SimConfig &config, size_t workers = 0, const ProgressCallback &progress = {});

/// Simulates trajectories [first, first + count) and maps each record through
/// fn without retaining it. Results are ordered by trajectory index.
template <typename Fn>
auto map_trajectories(
    const SimConfig &config,
    uint64_t first,
    uint64_t count,
    size_t workers,
    Fn &&fn,
    const ProgressCallback &progress = {}) {
    using Result = decltype(fn(std::declval<const SignalRecord &>()));
    config.validate();
    std::vector<Result> out(count);
    std::atomic<uint64_t> done{0};
    std::mutex progress_mutex;
    parallel_for(count, workers, [&](size_t i) {
        SignalRecord rec = detail::integrate_trajectory(config, first + i);
        out[i] = fn(rec);
        uint64_t d = ++done;
        if (progress) {
            std::lock_guard<std::mutex> lock(progress_mutex);
            progress(d, count);
        }
    });
    return out;
}

}  // namespace qcorr

#endif
