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

#ifndef QCORR_TESTS_TEST_MODELS_H
#define QCORR_TESTS_TEST_MODELS_H

#include <algorithm>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <unistd.h>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qcorr/analytic.h"
#include "qcorr/bloch.h"

namespace qcorr_test {

using namespace qcorr;

inline Vec3 random_unit(std::mt19937_64 &rng) {
    std::normal_distribution<double> g;
    Vec3 v;
    do {
        v = {g(rng), g(rng), g(rng)};
    } while (v.norm() < 1e-6);
    return v.normalized();
}

inline Vec3 random_in_ball(std::mt19937_64 &rng, double radius = 1.0) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return random_unit(rng) * (radius * std::cbrt(u(rng)));
}

struct ModelOptions {
    bool unital = true;
    bool phase_backaction = false;
    size_t max_channels = 3;
};

/// A random qubit with Rabi drive, measurement dephasing and a random extra decay.
inline MeasuredQubit random_qubit(std::mt19937_64 &rng, const ModelOptions &o) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<size_t> nch(1, o.max_channels);
    MeasuredQubit q;
    size_t n = nch(rng);
    for (size_t l = 0; l < n; l++) {
        double gamma = 0.1 + 1.9 * u(rng);
        double eta = 0.3 + 0.7 * u(rng);
        double k = o.phase_backaction ? 2.0 * u(rng) - 1.0 : 0.0;
        q.channels.push_back(channel_with_rate(random_unit(rng), gamma, eta, k));
    }
    Mat3 a = Mat3::NullaryExpr([&](Eigen::Index, Eigen::Index) { return u(rng) - 0.5; });
    Mat3 env = -0.3 * a * a.transpose();
    Vec3 r_st = o.unital ? Vec3::Zero() : random_in_ball(rng, 0.9);
    if (!o.unital && r_st.norm() < 0.05) {
        r_st = 0.5 * random_unit(rng);
    }
    q.model = build_ensemble_generator(random_unit(rng), 4.0 * u(rng), env, r_st, q.channels);
    return q;
}

/// Strictly increasing times in [lo, hi] with spacing at least min_gap.
inline std::vector<double> random_times(std::mt19937_64 &rng, size_t n, double lo, double hi, double min_gap = 1e-3) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> t;
    while (t.size() < n) {
        t.clear();
        for (size_t k = 0; k < n; k++) {
            t.push_back(u(rng));
        }
        std::sort(t.begin(), t.end());
        for (size_t k = 1; k < n; k++) {
            if (t[k] - t[k - 1] < min_gap) {
                t.clear();
                break;
            }
        }
    }
    return t;
}

inline CorrelatorSpec random_spec(std::mt19937_64 &rng, const MeasuredQubit &q, size_t n, double lo, double hi) {
    std::uniform_int_distribution<size_t> ch(0, q.channels.size() - 1);
    CorrelatorSpec spec;
    std::vector<double> t = random_times(rng, n, lo, hi);
    for (double v : t) {
        spec.events.push_back({ch(rng), v});
    }
    spec.r_in = random_in_ball(rng);
    spec.t_in = std::uniform_real_distribution<double>(lo, t.front())(rng);
    return spec;
}

// Density-matrix oracle: an independent route through Lindblad dynamics and
// projective collapses, with no Bloch-vector algebra.
using Mat2c = Eigen::Matrix2cd;

struct LindbladQubit {
    Vec3 rabi_axis{0, 0, 1};
    double rabi_freq = 0.0;
    std::vector<MeasurementChannel> channels;
    double gamma_down = 0.0;
    double gamma_up = 0.0;
};

inline Mat2c pauli(const Vec3 &n) {
    using C = std::complex<double>;
    Mat2c s;
    s << C(n.z(), 0), C(n.x(), -n.y()), C(n.x(), n.y()), C(-n.z(), 0);
    return s;
}

inline Mat2c dissipator(const Mat2c &l, const Mat2c &rho) {
    Mat2c ld = l.adjoint();
    return l * rho * ld - 0.5 * (ld * l * rho + rho * ld * l);
}

inline Mat2c lindblad_rhs(const LindbladQubit &q, const Mat2c &rho) {
    using C = std::complex<double>;
    Mat2c h = 0.5 * q.rabi_freq * pauli(q.rabi_axis);
    Mat2c out = C(0, -1) * (h * rho - rho * h);
    for (const auto &c : q.channels) {
        out += dissipator(std::sqrt(c.gamma() / 2.0) * pauli(c.axis), rho);
    }
    Mat2c lower;
    lower << 0, 0, 1, 0;
    out += dissipator(std::sqrt(q.gamma_down) * lower, rho);
    out += dissipator(std::sqrt(q.gamma_up) * lower.adjoint(), rho);
    return out;
}

inline Mat2c lindblad_evolve(const LindbladQubit &q, Mat2c rho, double duration, double max_step = 1e-3) {
    if (duration <= 0) {
        return rho;
    }
    int steps = std::max(1, static_cast<int>(std::ceil(duration / max_step)));
    double h = duration / steps;
    for (int s = 0; s < steps; s++) {
        Mat2c k1 = lindblad_rhs(q, rho);
        Mat2c k2 = lindblad_rhs(q, rho + 0.5 * h * k1);
        Mat2c k3 = lindblad_rhs(q, rho + 0.5 * h * k2);
        Mat2c k4 = lindblad_rhs(q, rho + h * k3);
        rho += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return rho;
}

inline Mat2c density(const Vec3 &r) {
    return 0.5 * (Mat2c::Identity() + pauli(r));
}

inline Vec3 bloch_of(const Mat2c &rho) {
    return {2 * rho(1, 0).real(), 2 * rho(1, 0).imag(), (rho(0, 0) - rho(1, 1)).real()};
}

/// Sum over outcome strings of (product of outcomes) * (joint probability).
inline double lindblad_collapse_correlator(
    const LindbladQubit &q, const std::vector<CorrelatorEvent> &events, const Vec3 &r_in, double t_in) {
    struct Rec {
        const LindbladQubit &q;
        const std::vector<CorrelatorEvent> &events;
        double go(size_t k, const Mat2c &rho, double t) const {
            if (k == events.size()) {
                return rho.trace().real();
            }
            Mat2c evolved = lindblad_evolve(q, rho, events[k].time - t);
            Mat2c s = pauli(q.channels[events[k].channel].axis);
            Mat2c plus = 0.5 * (Mat2c::Identity() + s);
            Mat2c minus = 0.5 * (Mat2c::Identity() - s);
            return go(k + 1, plus * evolved * plus, events[k].time) -
                   go(k + 1, minus * evolved * minus, events[k].time);
        }
    };
    return Rec{q, events}.go(0, density(r_in), t_in);
}

/// The Bloch-vector model of a Lindblad qubit, with r_st chosen as its true fixed point.
inline MeasuredQubit bloch_model_of(const LindbladQubit &l) {
    MeasuredQubit q;
    q.channels = l.channels;
    double g = l.gamma_down + l.gamma_up;
    Mat3 env = Mat3::Zero();
    env.diagonal() << -g / 2, -g / 2, -g;
    MeasuredQubit probe;
    probe.model = build_ensemble_generator(l.rabi_axis, l.rabi_freq, env, Vec3::Zero(), l.channels);
    const Mat3 &lam = probe.model.segments()[0].lambda;
    Vec3 c(0, 0, l.gamma_up - l.gamma_down);
    Vec3 r_st = g > 0 ? Vec3(-lam.fullPivLu().solve(c)) : Vec3::Zero();
    q.model = build_ensemble_generator(l.rabi_axis, l.rabi_freq, env, r_st, l.channels);
    return q;
}

inline std::filesystem::path scratch_dir(const std::string &name) {
    auto dir = std::filesystem::temp_directory_path() / ("qcorr_test_" + name + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace qcorr_test

#endif
