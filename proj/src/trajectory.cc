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

#include "qcorr/trajectory.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qcorr/error.h"
#include "qcorr/noise.h"

namespace qcorr {

std::vector<std::string> SimConfig::validate() const {
    std::vector<std::string> warnings;
    for (const auto &c : channels) {
        c.validate();
    }
    validate_bloch_vector(r_init, "r_init");
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw ValidationError("dt must be positive and finite");
    }
    if (!(t_total > 0.0) || !std::isfinite(t_total)) {
        throw ValidationError("t_total must be positive and finite");
    }
    if (n_traj < 1) {
        throw ValidationError("n_traj must be at least 1");
    }
    if (channels.size() > std::numeric_limits<uint32_t>::max()) {
        throw ValidationError("too many channels");
    }
    if (model.start_time() > 0.0) {
        throw ValidationError("ensemble model must be defined from t = 0");
    }
    if (!(noise_amplitude >= 0.0)) {
        throw ValidationError("noise_amplitude must be non-negative");
    }
    if (!channels.empty()) {
        double min_tau = std::min_element(channels.begin(), channels.end(), [](const auto &a, const auto &b) {
                             return a.tau < b.tau;
                         })->tau;
        double ratio = dt / min_tau;
        if (ratio > kDtMaxRatio) {
            throw ValidationError(
                "dt = " + std::to_string(dt) + " us violates the stability rule dt <= 0.05 * min(tau) = " +
                std::to_string(kDtMaxRatio * min_tau) + " us");
        }
        if (ratio > kDtWarnRatio) {
            warnings.push_back(
                "dt / min(tau) = " + std::to_string(ratio) + " exceeds 0.01; expect O(dt) bias in correlators");
        }
    }
    return warnings;
}

uint64_t SimConfig::n_samples() const {
    // Tolerate round-off such as 3.0 / 0.01 = 299.99999999999994.
    return static_cast<uint64_t>(std::floor(t_total / dt * (1.0 + 1e-12)));
}

void RecordSet::validate() const {
    for (size_t i = 0; i < records.size(); i++) {
        const auto &r = records[i];
        if (r.dt != dt || r.n_samples != n_samples) {
            throw FormatError("record " + std::to_string(i) + " has mismatched dt or n_samples");
        }
        if (r.channels != channels) {
            throw FormatError("record " + std::to_string(i) + " has mismatched channel metadata");
        }
        if (r.samples.size() != channels.size() * n_samples) {
            throw FormatError("record " + std::to_string(i) + " has the wrong number of samples");
        }
    }
}

uint64_t RecordSet::total_projections() const {
    uint64_t total = 0;
    for (const auto &r : records) {
        total += r.projections;
    }
    return total;
}

bool operator==(const SignalRecord &a, const SignalRecord &b) {
    return a.dt == b.dt && a.n_samples == b.n_samples && a.channels == b.channels && a.trajectory == b.trajectory &&
           a.master_seed == b.master_seed && a.samples == b.samples;
}

bool operator==(const RecordSet &a, const RecordSet &b) {
    return a.dt == b.dt && a.n_samples == b.n_samples && a.channels == b.channels && a.master_seed == b.master_seed &&
           a.records == b.records;
}

StepResult ito_step(
    const BlochVector &r,
    const ModelSegment &segment,
    std::span<const MeasurementChannel> channels,
    double dt,
    std::span<const double> noise_draws,
    std::span<double> outputs,
    uint64_t step_index,
    double noise_amplitude) {
    if (noise_draws.size() != channels.size() || outputs.size() != channels.size()) {
        throw ArgumentError("ito_step needs one noise draw and one output slot per channel");
    }
    double sqrt_dt = std::sqrt(dt);
    Vec3 next = r + segment.lambda * (r - segment.r_st) * dt;
    for (size_t l = 0; l < channels.size(); l++) {
        const auto &c = channels[l];
        double dw = noise_amplitude * sqrt_dt * noise_draws[l];
        double proj = c.axis.dot(r);
        double inv_sqrt_tau = 1.0 / std::sqrt(c.tau);
        Vec3 kick = c.axis - proj * r;
        if (c.phase_k != 0.0) {
            kick += c.phase_k * c.axis.cross(r);
        }
        next += kick * (dw * inv_sqrt_tau);
        outputs[l] = proj + std::sqrt(c.tau) * dw / dt;
    }
    if (!next.allFinite()) {
        throw IntegrationDiverged("integration diverged at step " + std::to_string(step_index), step_index);
    }
    StepResult out{next, false};
    double norm = next.norm();
    if (norm > 1.0) {
        out.r /= norm;
        out.projected = true;
    }
    return out;
}

namespace detail {

SignalRecord integrate_trajectory(const SimConfig &config, uint64_t trajectory) {
    SignalRecord rec;
    rec.dt = config.dt;
    rec.n_samples = config.n_samples();
    rec.channels = config.channels;
    rec.trajectory = trajectory;
    rec.master_seed = config.master_seed;
    size_t n_ch = config.channels.size();
    rec.samples.assign(n_ch * rec.n_samples, 0.0);
    if (config.record_state) {
        rec.states.reserve(rec.n_samples + 1);
    }

    std::vector<NoiseStream> streams;
    streams.reserve(n_ch);
    for (size_t l = 0; l < n_ch; l++) {
        streams.emplace_back(config.master_seed, trajectory, static_cast<uint32_t>(l));
    }
    std::vector<double> draws(n_ch);
    std::vector<double> outputs(n_ch);

    auto segs = config.model.segments();
    size_t seg = config.model.segment_index(0.0);
    BlochVector r = config.r_init;
    for (uint64_t k = 0; k < rec.n_samples; k++) {
        double t = static_cast<double>(k) * config.dt;
        while (seg + 1 < segs.size() && segs[seg + 1].t_start <= t) {
            seg++;
        }
        if (config.record_state) {
            rec.states.push_back(r);
        }
        for (size_t l = 0; l < n_ch; l++) {
            draws[l] = streams[l].next();
        }
        StepResult step = ito_step(r, segs[seg], config.channels, config.dt, draws, outputs, k, config.noise_amplitude);
        r = step.r;
        rec.projections += step.projected;
        for (size_t l = 0; l < n_ch; l++) {
            rec.samples[l * rec.n_samples + k] = outputs[l];
        }
    }
    if (config.record_state) {
        rec.states.push_back(r);
    }
    return rec;
}

}  // namespace detail

SignalRecord simulate_trajectory(const SimConfig &config, uint64_t trajectory) {
    config.validate();
    return detail::integrate_trajectory(config, trajectory);
}

RecordSet simulate_ensemble(const SimConfig &config, size_t workers, const ProgressCallback &progress) {
    RecordSet set;
    set.dt = config.dt;
    set.n_samples = config.n_samples();
    set.channels = config.channels;
    set.master_seed = config.master_seed;
    set.records = map_trajectories(
        config, 0, config.n_traj, workers, [](const SignalRecord &r) { return r; }, progress);
    return set;
}

}  // namespace qcorr
