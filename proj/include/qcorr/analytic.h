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

#ifndef QCORR_ANALYTIC_H
#define QCORR_ANALYTIC_H

#include <cstddef>
#include <span>
#include <vector>

#include "qcorr/bloch.h"

namespace qcorr {

/// Signal of channel `channel` sampled at `time` (us).
struct CorrelatorEvent {
    size_t channel = 0;
    double time = 0.0;

    bool operator==(const CorrelatorEvent &) const = default;
};

/// <I_{l_N}(t_N) ... I_{l_1}(t_1)> for a qubit prepared in r_in at t_in.
struct CorrelatorSpec {
    std::vector<CorrelatorEvent> events;
    BlochVector r_in = BlochVector::Zero();
    double t_in = 0.0;

    /// Requires N >= 1, valid channels, and t_in <= t_1 < t_2 < ... < t_N.
    void validate(size_t n_channels) const;
};

/// n_l . r_ens(t | r_in, t_in).
double mean_signal(const MeasuredQubit &qubit, const BlochVector &r_in, double t_in, size_t channel, double t);

/// n_{l_k} . [P(t_i -> t_k) n_{l_i}] for a unital model, t_i <= t_k.
///
/// Throws PreconditionError for non-unital models; use chain_correlator with
/// N = 2 there.
double two_time_correlator(const MeasuredQubit &qubit, size_t channel_i, double t_i, size_t channel_k, double t_k);

inline constexpr size_t kMaxBruteForceEvents = 16;

/// Collapse recipe evaluated as an explicit sum over all 2^N projective outcomes.
double brute_force_correlator(const MeasuredQubit &qubit, const CorrelatorSpec &spec);

/// Collapse recipe evaluated in O(N).
///
/// Let G_k(s) be the outcome-weighted product I_k ... I_N given the state s
/// just before the k-th projection. G_k is affine, G_k(s) = a_k . s + b_k, and
/// summing I_k = +-1 against the propagated collapsed state gives
///   b_k = a_{k+1} . (P_k n_k),   a_k = (a_{k+1} . q_k + b_{k+1}) n_k
/// with (P_k, q_k) the propagator t_k -> t_{k+1} and G_{N+1} = 1.
double chain_correlator(const MeasuredQubit &qubit, const CorrelatorSpec &spec);

/// Product of two-time correlators (even N), times <I_{l_1}(t_1)> for odd N.
///
/// Throws FactorizationInapplicable unless the model is unital and every
/// channel has phase_k == 0.
double factorized_correlator(const MeasuredQubit &qubit, const CorrelatorSpec &spec);

/// Coinciding-time spec: times are non-decreasing, and events sharing a time
/// on the same channel form a singular pair.
struct SingularSpec {
    std::vector<CorrelatorEvent> events;
    BlochVector r_in = BlochVector::Zero();
    double t_in = 0.0;
};

/// Indices (into SingularSpec::events) of a same-channel, same-time pair.
struct CoincidentPair {
    size_t first = 0;
    size_t second = 0;

    bool operator==(const CoincidentPair &) const = default;
};

/// Validates the spec and lists its singular pairs. Three or more events on
/// one channel at one time raise ValidationError.
std::vector<CoincidentPair> find_coincident_pairs(const SingularSpec &spec, size_t n_channels);

/// weight * delta(0)^delta_order * K(reduced). The reduced event list may
/// still contain equal times on different channels; it is evaluated with
/// smooth_correlator.
struct SingularTerm {
    double weight = 1.0;
    int delta_order = 0;
    std::vector<CorrelatorEvent> reduced;
};

/// One term per non-empty subset of coincident pairs, weight = product of tau_l over the subset.
std::vector<SingularTerm> singular_corrections(const MeasuredQubit &qubit, const SingularSpec &spec);

/// Collapse-recipe value for non-decreasing times: the continuous limit as
/// coinciding times are approached in the listed order. Empty events give 1.
double smooth_correlator(
    const MeasuredQubit &qubit, std::span<const CorrelatorEvent> events, const BlochVector &r_in, double t_in);

/// Smooth part plus singular terms with delta(0) replaced by 1 / dt.
double discretized_correlator(const MeasuredQubit &qubit, const SingularSpec &spec, double dt);

namespace detail {

/// Backward affine recursion shared by the chain and smooth evaluators.
/// prop(t0, t1) must return the AffinePropagator from t0 to t1.
template <typename PropFn>
double chain_value(
    std::span<const CorrelatorEvent> events,
    std::span<const MeasurementChannel> channels,
    const BlochVector &r_in,
    double t_in,
    PropFn &&prop) {
    if (events.empty()) {
        return 1.0;
    }
    Vec3 a = Vec3::Zero();
    double b = 1.0;
    for (size_t k = events.size(); k-- > 0;) {
        const Vec3 &n = channels[events[k].channel].axis;
        double alpha = 0.0;
        double beta = b;
        if (k + 1 < events.size()) {
            AffinePropagator step = prop(events[k].time, events[k + 1].time);
            alpha = a.dot(step.p * n);
            beta = a.dot(step.q) + b;
        }
        a = beta * n;
        b = alpha;
    }
    return a.dot(prop(t_in, events.front().time).apply(r_in)) + b;
}

/// The factorization formula without checking that it applies.
double factorization_formula(const MeasuredQubit &qubit, const CorrelatorSpec &spec);

}  // namespace detail

}  // namespace qcorr

#endif
