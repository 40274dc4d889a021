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

#include "qcorr/empirical.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <utility>

#include "qcorr/analytic.h"
#include "qcorr/error.h"
#include "qcorr/parallel.h"

namespace qcorr {

namespace {

constexpr size_t kReductionBlock = 4096;

struct Moments {
    uint64_t n = 0;
    long double mean = 0.0L;
    long double m2 = 0.0L;

    void add(long double x) {
        n++;
        long double delta = x - mean;
        mean += delta / static_cast<long double>(n);
        m2 += delta * (x - mean);
    }
};

// Symmetric in (a, b), so merging is exactly commutative.
Moments combine(const Moments &a, const Moments &b) {
    if (a.n == 0) {
        return b;
    }
    if (b.n == 0) {
        return a;
    }
    Moments out;
    out.n = a.n + b.n;
    long double na = static_cast<long double>(a.n);
    long double nb = static_cast<long double>(b.n);
    long double n = static_cast<long double>(out.n);
    long double delta = b.mean - a.mean;
    out.mean = (na * a.mean + nb * b.mean) / n;
    out.m2 = a.m2 + b.m2 + delta * delta * na * nb / n;
    return out;
}

CorrelatorEstimate finish(const Moments &m, uint64_t n_window_samples, std::string key) {
    CorrelatorEstimate e;
    e.n_traj = m.n;
    e.n_window_samples = n_window_samples;
    e.key = std::move(key);
    e.mean = m.mean;
    e.m2 = m.m2;
    e.value = static_cast<double>(m.mean);
    if (m.n >= 2) {
        long double n = static_cast<long double>(m.n);
        e.std_error = static_cast<double>(std::sqrt(m.m2 / (n - 1.0L) / n));
    } else {
        e.std_error = std::numeric_limits<double>::infinity();
    }
    return e;
}

uint64_t snap(double t, double width, const char *what) {
    if (!(t >= 0.0) || !std::isfinite(t)) {
        throw ArgumentError(std::string(what) + " must be finite and non-negative");
    }
    return static_cast<uint64_t>(std::llround(t / width));
}

}  // namespace

std::vector<double> CorrelatorPlan::snapped_gaps() const {
    std::vector<double> out;
    out.reserve(offsets.size());
    for (auto o : offsets) {
        out.push_back(static_cast<double>(o) * bin_width());
    }
    return out;
}

std::string CorrelatorPlan::key() const {
    std::ostringstream out;
    out.precision(17);
    for (size_t k = 0; k < channels.size(); k++) {
        out << (k ? "," : "") << channels[k] << "@" << offsets[k];
    }
    out << "|w" << window_start << "+" << window_count << "|b" << bin << "|dt" << dt;
    return out.str();
}

CorrelatorPlan plan_correlator(
    double dt, uint64_t n_samples, size_t n_channels, std::span<const GapEvent> gaps, const Window &window,
    uint64_t bin) {
    if (!(dt > 0.0)) {
        throw ArgumentError("record dt must be positive");
    }
    if (bin < 1) {
        throw ArgumentError("bin must be at least 1");
    }
    if (gaps.empty()) {
        throw ArgumentError("correlator needs at least one factor");
    }
    if (!(window.length > 0.0)) {
        throw ArgumentError("window length must be positive");
    }
    CorrelatorPlan plan;
    plan.dt = dt;
    plan.bin = bin;
    double width = plan.bin_width();
    for (size_t k = 0; k < gaps.size(); k++) {
        if (gaps[k].channel >= n_channels) {
            throw ArgumentError("channel index " + std::to_string(gaps[k].channel) + " out of range");
        }
        if (k == 0 && gaps[k].gap != 0.0) {
            throw ArgumentError("the first factor must have gap 0");
        }
        if (k > 0 && gaps[k].gap < gaps[k - 1].gap) {
            throw ArgumentError("gaps must be non-decreasing");
        }
        plan.channels.push_back(gaps[k].channel);
        plan.offsets.push_back(snap(gaps[k].gap, width, "gap"));
    }
    for (size_t k = 2; k < plan.offsets.size(); k++) {
        for (size_t a = 0; a + 2 <= k; a++) {
            for (size_t b = a + 1; b < k; b++) {
                if (plan.offsets[a] == plan.offsets[k] && plan.offsets[b] == plan.offsets[k] &&
                    plan.channels[a] == plan.channels[k] && plan.channels[b] == plan.channels[k]) {
                    throw ValidationError(
                        "three or more coinciding factors on channel " + std::to_string(plan.channels[k]) +
                        "; their singular contribution vanishes for Gaussian noise and is not modelled");
                }
            }
        }
    }
    plan.window_start = snap(window.t_a, width, "window start");
    plan.window_count = std::max<uint64_t>(1, snap(window.length, width, "window length"));
    uint64_t n_bins = n_samples / bin;
    uint64_t last = plan.window_start + plan.window_count - 1 + plan.offsets.back();
    if (last >= n_bins) {
        throw ArgumentError(
            "window plus largest gap reaches t = " + std::to_string(static_cast<double>(last + 1) * width) +
            " us, beyond the record span of " + std::to_string(static_cast<double>(n_bins) * width) + " us");
    }
    return plan;
}

CorrelatorEstimate estimate_from_values(std::span<const double> values, uint64_t n_window_samples, std::string key) {
    Moments total;
    for (size_t start = 0; start < values.size(); start += kReductionBlock) {
        Moments block;
        size_t end = std::min(values.size(), start + kReductionBlock);
        for (size_t i = start; i < end; i++) {
            block.add(values[i]);
        }
        total = combine(total, block);
    }
    return finish(total, n_window_samples, std::move(key));
}

CorrelatorEstimate merge_estimates(std::span<const CorrelatorEstimate> parts) {
    if (parts.empty()) {
        throw ArgumentError("merge_estimates needs at least one part");
    }
    Moments total;
    for (const auto &p : parts) {
        if (p.key != parts.front().key || p.n_window_samples != parts.front().n_window_samples) {
            throw ArgumentError("cannot merge estimates of different correlators");
        }
        total = combine(total, Moments{p.n_traj, p.mean, p.m2});
    }
    return finish(total, parts.front().n_window_samples, parts.front().key);
}

std::vector<double> coarse_grain(const SignalRecord &record, uint64_t bin) {
    if (bin <= 1) {
        return record.samples;
    }
    uint64_t n_bins = record.n_samples / bin;
    std::vector<double> out(record.channels.size() * n_bins);
    for (size_t l = 0; l < record.channels.size(); l++) {
        auto src = record.channel(l);
        for (uint64_t j = 0; j < n_bins; j++) {
            long double sum = 0.0L;
            for (uint64_t a = 0; a < bin; a++) {
                sum += src[j * bin + a];
            }
            out[l * n_bins + j] = static_cast<double>(sum / static_cast<long double>(bin));
        }
    }
    return out;
}

double window_product_average(std::span<const double> binned, uint64_t n_bins, const CorrelatorPlan &plan) {
    long double sum = 0.0L;
    for (uint64_t j = plan.window_start; j < plan.window_start + plan.window_count; j++) {
        long double product = 1.0L;
        for (size_t k = 0; k < plan.channels.size(); k++) {
            product *= binned[plan.channels[k] * n_bins + j + plan.offsets[k]];
        }
        sum += product;
    }
    return static_cast<double>(sum / static_cast<long double>(plan.window_count));
}

CorrelatorEstimate EnsembleSamples::estimate(size_t plan) const {
    std::vector<double> column(n_traj);
    for (uint64_t i = 0; i < n_traj; i++) {
        column[i] = values[i * n_plans + plan];
    }
    return estimate_from_values(column, window_counts[plan], keys[plan]);
}

CorrelatorEstimate EnsembleSamples::combination(std::span<const double> weights) const {
    if (weights.size() != n_plans) {
        throw ArgumentError("need one weight per plan");
    }
    std::vector<double> column(n_traj);
    for (uint64_t i = 0; i < n_traj; i++) {
        long double s = 0.0L;
        for (size_t p = 0; p < n_plans; p++) {
            s += static_cast<long double>(weights[p]) * values[i * n_plans + p];
        }
        column[i] = static_cast<double>(s);
    }
    return estimate_from_values(column, 0, "combination");
}

namespace {

uint64_t common_bin(std::span<const CorrelatorPlan> plans) {
    if (plans.empty()) {
        throw ArgumentError("no correlator plans given");
    }
    for (const auto &p : plans) {
        if (p.bin != plans.front().bin) {
            throw ArgumentError("all plans in one pass must share the bin size");
        }
    }
    return plans.front().bin;
}

}  // namespace

EnsembleSamples make_samples(uint64_t n_traj, std::span<const CorrelatorPlan> plans) {
    EnsembleSamples s;
    s.n_traj = n_traj;
    s.n_plans = plans.size();
    s.values.resize(n_traj * plans.size());
    for (const auto &p : plans) {
        s.window_counts.push_back(p.window_count);
        s.keys.push_back(p.key());
    }
    return s;
}

void sample_row(const SignalRecord &record, std::span<const CorrelatorPlan> plans, std::span<double> row) {
    uint64_t bin = common_bin(plans);
    if (row.size() != plans.size()) {
        throw ArgumentError("sample_row needs one output slot per plan");
    }
    std::vector<double> binned = coarse_grain(record, bin);
    uint64_t n_bins = record.n_samples / bin;
    for (size_t p = 0; p < plans.size(); p++) {
        if (plans[p].dt != record.dt) {
            throw FormatError("record dt does not match the correlator plan");
        }
        if (plans[p].window_start + plans[p].window_count + plans[p].offsets.back() > n_bins) {
            throw ArgumentError("correlator window extends beyond the record");
        }
        row[p] = window_product_average(binned, n_bins, plans[p]);
    }
}

EnsembleSamples sample_records(const RecordSet &records, std::span<const CorrelatorPlan> plans, size_t workers) {
    records.validate();
    common_bin(plans);
    for (const auto &p : plans) {
        if (p.dt != records.dt) {
            throw FormatError("record dt does not match the correlator plan");
        }
    }
    EnsembleSamples s = make_samples(records.records.size(), plans);
    parallel_for(records.records.size(), workers, [&](size_t i) {
        sample_row(records.records[i], plans, std::span(s.values.data() + i * plans.size(), plans.size()));
    });
    return s;
}

EnsembleSamples sample_simulation(
    const SimConfig &config, std::span<const CorrelatorPlan> plans, size_t workers, const ProgressCallback &progress) {
    common_bin(plans);
    for (const auto &p : plans) {
        if (p.dt != config.dt) {
            throw ArgumentError("simulation dt does not match the correlator plan");
        }
    }
    EnsembleSamples s = make_samples(config.n_traj, plans);
    config.validate();
    std::atomic<uint64_t> done{0};
    std::mutex progress_mutex;
    parallel_for(config.n_traj, workers, [&](size_t i) {
        SignalRecord rec = detail::integrate_trajectory(config, i);
        sample_row(rec, plans, std::span(s.values.data() + i * plans.size(), plans.size()));
        uint64_t d = ++done;
        if (progress) {
            std::lock_guard<std::mutex> lock(progress_mutex);
            progress(d, config.n_traj);
        }
    });
    return s;
}

CorrelatorEstimate estimate_correlator(
    const RecordSet &records, std::span<const GapEvent> gaps, const Window &window, uint64_t bin, size_t workers) {
    CorrelatorPlan plan = plan_correlator(records.dt, records.n_samples, records.channels.size(), gaps, window, bin);
    return sample_records(records, std::span(&plan, 1), workers).estimate(0);
}

CorrelatorEstimate estimate_mean_signal(
    const RecordSet &records, size_t channel, const Window &window, uint64_t bin, size_t workers) {
    GapEvent g{channel, 0.0};
    return estimate_correlator(records, std::span(&g, 1), window, bin, workers);
}

double average_over_placements(
    const CorrelatorPlan &plan,
    const std::function<double(std::span<const CorrelatorEvent> events, bool coincident)> &fn) {
    size_t n = plan.channels.size();
    double combos = std::pow(static_cast<double>(plan.bin), static_cast<double>(n));
    if (combos > 1e7) {
        throw SizeError("too many sub-sample placements to enumerate");
    }
    std::vector<uint64_t> sub(n, 0);
    std::vector<std::pair<uint64_t, size_t>> placed(n);
    std::vector<CorrelatorEvent> events(n);
    long double total = 0.0L;
    for (uint64_t j = plan.window_start; j < plan.window_start + plan.window_count; j++) {
        std::fill(sub.begin(), sub.end(), 0);
        while (true) {
            for (size_t k = 0; k < n; k++) {
                placed[k] = {(j + plan.offsets[k]) * plan.bin + sub[k], k};
            }
            std::sort(placed.begin(), placed.end());
            bool coincident = false;
            for (size_t k = 0; k < n; k++) {
                events[k] = {plan.channels[placed[k].second], static_cast<double>(placed[k].first) * plan.dt};
                coincident |= k > 0 && placed[k].first == placed[k - 1].first;
            }
            total += fn(events, coincident);

            size_t k = 0;
            while (k < n && ++sub[k] == plan.bin) {
                sub[k] = 0;
                k++;
            }
            if (k == n) {
                break;
            }
        }
    }
    return static_cast<double>(total / (static_cast<long double>(plan.window_count) * combos));
}

double expected_estimate(const MeasuredQubit &qubit, const BlochVector &r_init, const CorrelatorPlan &plan) {
    validate_bloch_vector(r_init, "r_init");
    size_t n = plan.channels.size();
    for (size_t a = 0; a < n; a++) {
        for (size_t b = a + 1; b < n; b++) {
            if (plan.channels[a] != plan.channels[b] && plan.offsets[a] == plan.offsets[b]) {
                throw ArgumentError(
                    "factors on different channels share a bin; the collapse recipe does not describe that estimator");
            }
        }
    }

    std::map<std::pair<int64_t, int64_t>, AffinePropagator> cache;
    auto index_of = [&](double t) {
        return std::llround(t / plan.dt);
    };
    auto prop = [&](double t0, double t1) -> const AffinePropagator & {
        auto key = std::pair{index_of(t0), index_of(t1)};
        if (qubit.model.time_independent()) {
            key = {0, key.second - key.first};
        }
        auto it = cache.find(key);
        if (it == cache.end()) {
            it = cache.emplace(key, ordered_propagator(qubit.model, t0, t1)).first;
        }
        return it->second;
    };

    return average_over_placements(plan, [&](std::span<const CorrelatorEvent> events, bool coincident) {
        double value = detail::chain_value(events, qubit.channels, r_init, 0.0, prop);
        if (coincident) {
            SingularSpec spec{{events.begin(), events.end()}, r_init, 0.0};
            for (const auto &term : singular_corrections(qubit, spec)) {
                value += term.weight * std::pow(plan.dt, -term.delta_order) *
                         detail::chain_value(term.reduced, qubit.channels, r_init, 0.0, prop);
            }
        }
        return value;
    });
}

}  // namespace qcorr
