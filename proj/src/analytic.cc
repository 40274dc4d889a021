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

#include "qcorr/analytic.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "qcorr/error.h"

namespace qcorr {

namespace {

void validate_channel(size_t channel, size_t n_channels) {
    if (channel >= n_channels) {
        throw ValidationError(
            "channel index " + std::to_string(channel) + " out of range (have " + std::to_string(n_channels) + ")");
    }
}

auto propagator_of(const EnsembleModel &model) {
    return [&model](double t0, double t1) {
        return ordered_propagator(model, t0, t1);
    };
}

}  // namespace

void CorrelatorSpec::validate(size_t n_channels) const {
    if (events.empty()) {
        throw ValidationError("correlator spec needs at least one event");
    }
    validate_bloch_vector(r_in, "r_in");
    if (!(t_in <= events.front().time)) {
        throw ValidationError("correlator spec requires t_in <= t_1");
    }
    for (size_t k = 0; k < events.size(); k++) {
        validate_channel(events[k].channel, n_channels);
        if (k > 0 && !(events[k].time > events[k - 1].time)) {
            throw ValidationError(
                "correlator event times must be strictly increasing (event " + std::to_string(k) +
                "); coinciding times go through SingularSpec");
        }
    }
}

double mean_signal(const MeasuredQubit &qubit, const BlochVector &r_in, double t_in, size_t channel, double t) {
    validate_channel(channel, qubit.channels.size());
    if (t < t_in) {
        throw ArgumentError("mean_signal requires t >= t_in");
    }
    return qubit.channels[channel].axis.dot(propagate_ensemble(qubit.model, r_in, t_in, t));
}

double two_time_correlator(const MeasuredQubit &qubit, size_t channel_i, double t_i, size_t channel_k, double t_k) {
    if (!qubit.model.unital()) {
        throw PreconditionError("two_time_correlator needs a unital model; use chain_correlator with N = 2");
    }
    validate_channel(channel_i, qubit.channels.size());
    validate_channel(channel_k, qubit.channels.size());
    if (t_k < t_i) {
        throw ArgumentError("two_time_correlator requires t_i <= t_k");
    }
    AffinePropagator prop = ordered_propagator(qubit.model, t_i, t_k);
    return qubit.channels[channel_k].axis.dot(prop.p * qubit.channels[channel_i].axis);
}

double brute_force_correlator(const MeasuredQubit &qubit, const CorrelatorSpec &spec) {
    spec.validate(qubit.channels.size());
    size_t n = spec.events.size();
    if (n > kMaxBruteForceEvents) {
        throw SizeError(
            "brute_force_correlator supports at most " + std::to_string(kMaxBruteForceEvents) + " events, got " +
            std::to_string(n));
    }
    std::vector<Vec3> axis(n);
    for (size_t k = 0; k < n; k++) {
        axis[k] = qubit.channels[spec.events[k].channel].axis;
    }
    Vec3 r_first = propagate_ensemble(qubit.model, spec.r_in, spec.t_in, spec.events[0].time);
    std::vector<AffinePropagator> gaps(n);
    for (size_t k = 1; k < n; k++) {
        gaps[k] = ordered_propagator(qubit.model, spec.events[k - 1].time, spec.events[k].time);
    }

    double total = 0.0;
    for (uint64_t mask = 0; mask < (uint64_t{1} << n); mask++) {
        auto outcome = [&](size_t k) {
            return (mask >> k) & 1 ? -1.0 : 1.0;
        };
        double weight = (1.0 + outcome(0) * axis[0].dot(r_first)) / 2.0;
        double product = outcome(0);
        for (size_t k = 1; k < n; k++) {
            Vec3 collapsed = outcome(k - 1) * axis[k - 1];
            Vec3 r_k = gaps[k].apply(collapsed);
            weight *= (1.0 + outcome(k) * axis[k].dot(r_k)) / 2.0;
            product *= outcome(k);
        }
        total += weight * product;
    }
    return total;
}

double chain_correlator(const MeasuredQubit &qubit, const CorrelatorSpec &spec) {
    spec.validate(qubit.channels.size());
    return detail::chain_value(spec.events, qubit.channels, spec.r_in, spec.t_in, propagator_of(qubit.model));
}

double smooth_correlator(
    const MeasuredQubit &qubit, std::span<const CorrelatorEvent> events, const BlochVector &r_in, double t_in) {
    validate_bloch_vector(r_in, "r_in");
    for (size_t k = 0; k < events.size(); k++) {
        validate_channel(events[k].channel, qubit.channels.size());
        double prev = k == 0 ? t_in : events[k - 1].time;
        if (events[k].time < prev) {
            throw ValidationError("smooth_correlator needs non-decreasing times starting at or after t_in");
        }
    }
    return detail::chain_value(events, qubit.channels, r_in, t_in, propagator_of(qubit.model));
}

namespace detail {

double factorization_formula(const MeasuredQubit &qubit, const CorrelatorSpec &spec) {
    spec.validate(qubit.channels.size());
    const auto &ev = spec.events;
    auto pair = [&](size_t i, size_t k) {
        AffinePropagator prop = ordered_propagator(qubit.model, ev[i].time, ev[k].time);
        return qubit.channels[ev[k].channel].axis.dot(prop.p * qubit.channels[ev[i].channel].axis);
    };
    double value = 1.0;
    size_t start = 0;
    if (ev.size() % 2 == 1) {
        value = mean_signal(qubit, spec.r_in, spec.t_in, ev[0].channel, ev[0].time);
        start = 1;
    }
    for (size_t i = start; i + 1 < ev.size(); i += 2) {
        value *= pair(i, i + 1);
    }
    return value;
}

}  // namespace detail

double factorized_correlator(const MeasuredQubit &qubit, const CorrelatorSpec &spec) {
    if (!qubit.model.unital()) {
        throw FactorizationInapplicable("factorization needs a unital model (r_st = 0); use chain_correlator");
    }
    for (const auto &c : qubit.channels) {
        if (c.phase_k != 0.0) {
            throw FactorizationInapplicable("factorization needs phase_k = 0 on every channel; use chain_correlator");
        }
    }
    return detail::factorization_formula(qubit, spec);
}

std::vector<CoincidentPair> find_coincident_pairs(const SingularSpec &spec, size_t n_channels) {
    if (spec.events.empty()) {
        throw ValidationError("singular spec needs at least one event");
    }
    validate_bloch_vector(spec.r_in, "r_in");
    if (!(spec.t_in <= spec.events.front().time)) {
        throw ValidationError("singular spec requires t_in <= t_1");
    }
    std::vector<CoincidentPair> pairs;
    size_t k = 0;
    while (k < spec.events.size()) {
        size_t end = k;
        while (end < spec.events.size() && spec.events[end].time == spec.events[k].time) {
            validate_channel(spec.events[end].channel, n_channels);
            end++;
        }
        if (end < spec.events.size() && spec.events[end].time < spec.events[k].time) {
            throw ValidationError("singular spec times must be non-decreasing");
        }
        std::map<size_t, std::vector<size_t>> by_channel;
        for (size_t j = k; j < end; j++) {
            by_channel[spec.events[j].channel].push_back(j);
        }
        for (const auto &[channel, idx] : by_channel) {
            if (idx.size() >= 3) {
                throw ValidationError(
                    "three or more coinciding events on channel " + std::to_string(channel) +
                    " at t = " + std::to_string(spec.events[k].time) +
                    "; their singular contribution vanishes for Gaussian noise and is not modelled");
            }
            if (idx.size() == 2) {
                pairs.push_back({idx[0], idx[1]});
            }
        }
        k = end;
    }
    return pairs;
}

std::vector<SingularTerm> singular_corrections(const MeasuredQubit &qubit, const SingularSpec &spec) {
    auto pairs = find_coincident_pairs(spec, qubit.channels.size());
    if (pairs.size() > 20) {
        throw SizeError("too many coincident pairs");
    }
    std::vector<SingularTerm> terms;
    for (uint64_t subset = 1; subset < (uint64_t{1} << pairs.size()); subset++) {
        SingularTerm term;
        std::vector<bool> removed(spec.events.size(), false);
        for (size_t p = 0; p < pairs.size(); p++) {
            if ((subset >> p) & 1) {
                term.weight *= qubit.channels[spec.events[pairs[p].first].channel].tau;
                term.delta_order++;
                removed[pairs[p].first] = true;
                removed[pairs[p].second] = true;
            }
        }
        for (size_t j = 0; j < spec.events.size(); j++) {
            if (!removed[j]) {
                term.reduced.push_back(spec.events[j]);
            }
        }
        terms.push_back(std::move(term));
    }
    return terms;
}

double discretized_correlator(const MeasuredQubit &qubit, const SingularSpec &spec, double dt) {
    if (!(dt > 0.0)) {
        throw ArgumentError("dt must be positive");
    }
    double total = smooth_correlator(qubit, spec.events, spec.r_in, spec.t_in);
    for (const auto &term : singular_corrections(qubit, spec)) {
        double delta = std::pow(dt, -term.delta_order);
        total += term.weight * delta * smooth_correlator(qubit, term.reduced, spec.r_in, spec.t_in);
    }
    return total;
}

}  // namespace qcorr
