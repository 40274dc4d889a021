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

#include "qcorr/bloch.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "qcorr/error.h"
#include "qcorr/expm.h"

namespace qcorr {

namespace {

std::string format_vec(const Vec3 &v) {
    std::ostringstream out;
    out << "(" << v.x() << ", " << v.y() << ", " << v.z() << ")";
    return out.str();
}

}  // namespace

void validate_bloch_vector(const BlochVector &r, std::string_view what) {
    if (!r.allFinite()) {
        throw ValidationError(std::string(what) + " is not finite");
    }
    if (r.norm() > 1.0 + kNormTolerance) {
        throw ValidationError(std::string(what) + " " + format_vec(r) + " lies outside the Bloch ball");
    }
}

double MeasurementChannel::gamma() const {
    return (1.0 + phase_k * phase_k) / (2.0 * eta * tau);
}

void MeasurementChannel::validate() const {
    if (!axis.allFinite() || std::abs(axis.norm() - 1.0) > kNormTolerance) {
        throw ValidationError("channel axis " + format_vec(axis) + " is not a unit vector");
    }
    if (!(tau > 0.0) || !std::isfinite(tau)) {
        throw ValidationError("channel tau must be positive and finite, got " + std::to_string(tau));
    }
    if (!(eta > 0.0 && eta <= 1.0)) {
        throw ValidationError("channel eta must lie in (0, 1], got " + std::to_string(eta));
    }
    if (!std::isfinite(phase_k)) {
        throw ValidationError("channel phase_k must be finite");
    }
    double g = gamma();
    if (!std::isfinite(g) || !(g > 0.0)) {
        throw ValidationError("channel dephasing rate is not finite and positive");
    }
}

MeasurementChannel channel_with_rate(const Vec3 &axis, double gamma, double eta, double phase_k) {
    if (!(gamma > 0.0)) {
        throw ValidationError("dephasing rate must be positive");
    }
    MeasurementChannel c;
    c.axis = axis;
    c.eta = eta;
    c.phase_k = phase_k;
    c.tau = (1.0 + phase_k * phase_k) / (2.0 * eta * gamma);
    c.validate();
    return c;
}

Mat3 cross_matrix(const Vec3 &a) {
    Mat3 m;
    m << 0, -a.z(), a.y(),  //
        a.z(), 0, -a.x(),   //
        -a.y(), a.x(), 0;
    return m;
}

EnsembleModel::EnsembleModel() : EnsembleModel({ModelSegment{}}) {
}

EnsembleModel::EnsembleModel(std::vector<ModelSegment> segments) : segments_(std::move(segments)) {
    if (segments_.empty()) {
        throw ValidationError("ensemble model needs at least one segment");
    }
    unital_ = true;
    for (size_t k = 0; k < segments_.size(); k++) {
        const auto &s = segments_[k];
        if (!std::isfinite(s.t_start) || !s.lambda.allFinite() || !s.r_st.allFinite()) {
            throw ValidationError("ensemble model segment " + std::to_string(k) + " is not finite");
        }
        if (k > 0 && !(s.t_start > segments_[k - 1].t_start)) {
            throw ValidationError("ensemble model segment start times must be strictly increasing");
        }
        validate_bloch_vector(s.r_st, "segment r_st");
        if (s.r_st.norm() > kUnitalTolerance) {
            unital_ = false;
        }
    }
}

EnsembleModel EnsembleModel::constant(const Mat3 &lambda, const Vec3 &r_st, double t_start) {
    return EnsembleModel({ModelSegment{t_start, lambda, r_st}});
}

size_t EnsembleModel::segment_index(double t) const {
    // Last segment whose start is <= t.
    auto it = std::upper_bound(segments_.begin(), segments_.end(), t, [](double v, const ModelSegment &s) {
        return v < s.t_start;
    });
    if (it == segments_.begin()) {
        throw ArgumentError("time " + std::to_string(t) + " precedes the model start");
    }
    return static_cast<size_t>(it - segments_.begin()) - 1;
}

Mat3 measurement_dephasing_generator(std::span<const MeasurementChannel> channels) {
    Mat3 total = Mat3::Zero();
    for (const auto &c : channels) {
        c.validate();
        total -= c.gamma() * (Mat3::Identity() - c.axis * c.axis.transpose());
    }
    return total;
}

EnsembleModel build_ensemble_generator(
    const Vec3 &rabi_axis,
    double rabi_freq,
    const Mat3 &env_lambda,
    const Vec3 &env_rst,
    std::span<const MeasurementChannel> channels) {
    if (!std::isfinite(rabi_freq)) {
        throw ValidationError("rabi frequency must be finite");
    }
    Mat3 lambda = env_lambda + measurement_dephasing_generator(channels);
    if (rabi_freq != 0.0) {
        if (std::abs(rabi_axis.norm() - 1.0) > kNormTolerance) {
            throw ValidationError("rabi axis " + format_vec(rabi_axis) + " is not a unit vector");
        }
        lambda += rabi_freq * cross_matrix(rabi_axis);
    }
    return EnsembleModel::constant(lambda, env_rst);
}

AffinePropagator segment_propagator(const ModelSegment &segment, double dt) {
    if (dt == 0.0) {
        return AffinePropagator::identity();
    }
    // d/dt [r; 1] = [[L, -L r_st], [0, 0]] [r; 1]
    Eigen::Matrix4d aug = Eigen::Matrix4d::Zero();
    aug.topLeftCorner<3, 3>() = segment.lambda * dt;
    aug.topRightCorner<3, 1>() = -(segment.lambda * segment.r_st) * dt;
    Eigen::Matrix4d e = expm<4>(aug);
    AffinePropagator out;
    out.p = e.topLeftCorner<3, 3>();
    out.q = e.topRightCorner<3, 1>();
    return out;
}

AffinePropagator ordered_propagator(const EnsembleModel &model, double t0, double t1) {
    if (!(t1 >= t0)) {
        throw ArgumentError(
            "ordered_propagator requires t0 <= t1, got t0=" + std::to_string(t0) + " t1=" + std::to_string(t1));
    }
    auto segs = model.segments();
    size_t k = model.segment_index(t0);
    AffinePropagator total;
    double t = t0;
    while (t < t1) {
        double seg_end = k + 1 < segs.size() ? std::min(segs[k + 1].t_start, t1) : t1;
        total = segment_propagator(segs[k], seg_end - t).after(total);
        t = seg_end;
        k++;
    }
    return total;
}

BlochVector propagate_ensemble(const EnsembleModel &model, const BlochVector &r0, double t0, double t1) {
    validate_bloch_vector(r0, "initial state");
    return ordered_propagator(model, t0, t1).apply(r0);
}

bool MeasuredQubit::factorizable() const {
    if (!model.unital()) {
        return false;
    }
    return std::all_of(channels.begin(), channels.end(), [](const MeasurementChannel &c) {
        return c.phase_k == 0.0;
    });
}

}  // namespace qcorr
