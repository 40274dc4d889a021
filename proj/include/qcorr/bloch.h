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

#ifndef QCORR_BLOCH_H
#define QCORR_BLOCH_H

#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace qcorr {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Qubit state r = (x, y, z), rho = (1 + r.sigma) / 2. |r| <= 1.
using BlochVector = Vec3;

inline constexpr double kNormTolerance = 1e-9;
inline constexpr double kUnitalTolerance = 1e-10;

/// Throws ValidationError if |r| exceeds 1 beyond kNormTolerance or r is non-finite.
void validate_bloch_vector(const BlochVector &r, std::string_view what);

/// One linear detector continuously monitoring sigma_n = n.sigma.
///
/// All times are in microseconds. `tau` is the time needed for the
/// informational signal-to-noise ratio to reach one, `eta` the quantum
/// efficiency, and `phase_k` the relative strength of phase backaction.
struct MeasurementChannel {
    Vec3 axis{0, 0, 1};
    double tau = 1.0;
    double eta = 1.0;
    double phase_k = 0.0;

    /// Measurement-induced ensemble dephasing rate (1 + K^2) / (2 eta tau), in 1/us.
    double gamma() const;
    void validate() const;

    bool operator==(const MeasurementChannel &) const = default;
};

/// A channel whose ensemble dephasing rate is exactly `gamma`: tau = (1 + K^2) / (2 eta gamma).
MeasurementChannel channel_with_rate(const Vec3 &axis, double gamma, double eta = 1.0, double phase_k = 0.0);

/// Cross-product matrix: cross_matrix(a) * v == a.cross(v).
Mat3 cross_matrix(const Vec3 &a);

/// Generator of dr/dt = Lambda (r - r_st), constant on [t_start, next t_start).
struct ModelSegment {
    double t_start = 0.0;
    Mat3 lambda = Mat3::Zero();
    Vec3 r_st = Vec3::Zero();
};

/// Piecewise-constant linear Markovian evolution of the ensemble-averaged state.
///
/// The last segment extends to +infinity. The model is defined for t >= the
/// first segment's start time.
class EnsembleModel {
   public:
    EnsembleModel();
    explicit EnsembleModel(std::vector<ModelSegment> segments);
    static EnsembleModel constant(const Mat3 &lambda, const Vec3 &r_st = Vec3::Zero(), double t_start = 0.0);

    std::span<const ModelSegment> segments() const {
        return segments_;
    }
    double start_time() const {
        return segments_.front().t_start;
    }
    bool unital() const {
        return unital_;
    }
    bool time_independent() const {
        return segments_.size() == 1;
    }
    /// Index of the segment that governs the evolution just after time t.
    size_t segment_index(double t) const;
    const ModelSegment &segment_at(double t) const {
        return segments_[segment_index(t)];
    }

   private:
    std::vector<ModelSegment> segments_;
    bool unital_;
};

/// Affine solution map r(t1) = P r(t0) + q.
struct AffinePropagator {
    Mat3 p = Mat3::Identity();
    Vec3 q = Vec3::Zero();

    Vec3 apply(const Vec3 &r) const {
        return p * r + q;
    }
    /// Composition: later.after(earlier) maps r(t0) -> r(t2).
    AffinePropagator after(const AffinePropagator &earlier) const {
        return {p * earlier.p, p * earlier.q + q};
    }
    static AffinePropagator identity() {
        return {};
    }
};

/// Sum over channels of -Gamma_l (I - n_l n_l^T).
Mat3 measurement_dephasing_generator(std::span<const MeasurementChannel> channels);

/// Single-segment model: Lambda = Omega [axis]_x + env_lambda + measurement dephasing.
EnsembleModel build_ensemble_generator(
    const Vec3 &rabi_axis,
    double rabi_freq,
    const Mat3 &env_lambda,
    const Vec3 &env_rst,
    std::span<const MeasurementChannel> channels);

/// Exact propagator of one constant segment over duration dt (augmented 4x4 exponential).
AffinePropagator segment_propagator(const ModelSegment &segment, double dt);

/// Time-ordered propagator from t0 to t1 >= t0.
AffinePropagator ordered_propagator(const EnsembleModel &model, double t0, double t1);

/// r_ens(t1 | r0, t0).
BlochVector propagate_ensemble(const EnsembleModel &model, const BlochVector &r0, double t0, double t1);

/// Model together with the detectors it was built for.
struct MeasuredQubit {
    EnsembleModel model;
    std::vector<MeasurementChannel> channels;

    /// True if the model is unital and no channel has phase backaction.
    bool factorizable() const;
};

}  // namespace qcorr

#endif
