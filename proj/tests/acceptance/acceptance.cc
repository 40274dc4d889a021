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

// Acceptance gate: prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qcorr/analytic.h"
#include "qcorr/bloch.h"
#include "qcorr/empirical.h"
#include "qcorr/error.h"
#include "qcorr/replica.h"
#include "qcorr/trajectory.h"
#include "../test_models.h"

using namespace qcorr;
using namespace qcorr_test;

namespace {

struct Outcome {
    bool pass = false;
    std::string summary;
    std::vector<std::string> details;
};

std::string fmt(const char *f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome oracle_equivalence() {
    std::mt19937_64 rng(20240601);
    std::uniform_int_distribution<size_t> nd(2, 8);
    auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (int trial = 0; trial < 200; trial++) {
        MeasuredQubit q = random_qubit(rng, {.unital = trial % 2 == 0, .phase_backaction = trial % 4 == 1});
        CorrelatorSpec spec = random_spec(rng, q, nd(rng), 0.0, 5.0);
        worst = std::max(worst, std::abs(chain_correlator(q, spec) - brute_force_correlator(q, spec)));
    }
    double elapsed = seconds_since(t0);
    return {worst <= 1e-10 && elapsed < 60.0,
            fmt("200 models, max |chain - brute_force| = %.2e (tol 1e-10), %.2f s (limit 60 s)", worst, elapsed)};
}

Outcome factorization() {
    std::mt19937_64 rng(771);
    std::uniform_int_distribution<size_t> nd(2, 8);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    double worst = 0.0;
    double worst_shift = 0.0;
    for (int trial = 0; trial < 100; trial++) {
        MeasuredQubit q = random_qubit(rng, {.unital = true});
        CorrelatorSpec spec = random_spec(rng, q, nd(rng), 0.0, 5.0);
        double chain = chain_correlator(q, spec);
        worst = std::max(worst, std::abs(chain - factorized_correlator(q, spec)));
        // Gaps between factor groups: after the lone mean (odd N) and between pairs.
        size_t n = spec.events.size();
        for (size_t k = (n % 2 == 1) ? 1 : 2; k < n; k += 2) {
            CorrelatorSpec moved = spec;
            double lo = spec.events[k - 1].time - spec.events[k].time + 1e-3;
            double shift = std::max(lo, u(rng));
            for (size_t j = k; j < n; j++) {
                moved.events[j].time += shift;
            }
            worst_shift = std::max(worst_shift, std::abs(chain_correlator(q, moved) - chain));
        }
    }
    MeasuredQubit witness;
    witness.channels = {MeasurementChannel{{0, 0, 1}, 1.0, 1.0, 0.0}};
    witness.model = EnsembleModel::constant(-1.0 * Mat3::Identity(), {0, 0, 0.5});
    CorrelatorSpec w{{{0, 0.5}, {0, 1.0}, {0, 1.8}, {0, 2.2}}, Vec3::Zero(), 0.0};
    double breakage = std::abs(chain_correlator(witness, w) - detail::factorization_formula(witness, w));
    bool refused = false;
    try {
        factorized_correlator(witness, w);
    } catch (const FactorizationInapplicable &) {
        refused = true;
    }
    return {worst <= 1e-10 && worst_shift <= 1e-10 && breakage > 1e-3 && refused,
            fmt("100 unital models, max |chain - factorized| = %.2e, max gap-shift change = %.2e (tol 1e-10); "
                "non-unital witness deviates by %.3e (> 1e-3)%s",
                worst, worst_shift, breakage, refused ? "" : ", but factorization was not refused")};
}

Outcome replica_constant() {
    Outcome out{true, ""};
    double lo = 1e9, hi = -1e9;
    for (int n = 0; n <= 10; n++) {
        if (n == 5) {
            continue;
        }
        ReplicaConfig c;
        c.phi = replica_angle(n);
        MeasuredQubit q = replica_model(c);
        double k = two_time_correlator(q, kReplicaZ, 0.0, kReplicaPhi, 0.15 / c.gamma);
        double ratio = k * k / std::pow(std::cos(c.phi), 2);
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
        out.pass &= ratio >= 0.98 && ratio <= 1.005;
        out.details.push_back(fmt("n = %2d  K^2 / cos^2(phi) = %.5f", n, ratio));
    }
    out.summary = fmt("K_zphi(0.15/Gamma)^2 / cos^2(phi) in [%.5f, %.5f] (required within [0.98, 1.005])", lo, hi);
    return out;
}

Outcome monte_carlo_two_time() {
    ReplicaConfig c;
    c.phi = replica_angle(3);
    c.n_traj = 50000;
    c.window = {1.0, 0.5};
    MeasuredQubit q = replica_model(c);
    auto t0 = std::chrono::steady_clock::now();
    std::vector<double> grid;
    for (int k = 1; k <= 10; k++) {
        grid.push_back(0.1 * k);
    }
    auto plans_for = [&](uint64_t bin) {
        std::vector<CorrelatorPlan> plans;
        for (double d : grid) {
            GapEvent gaps[] = {{kReplicaZ, 0.0}, {kReplicaPhi, d}};
            plans.push_back(plan_correlator(c.dt, 1000, 2, gaps, c.window, bin));
        }
        return plans;
    };
    SimConfig sim = replica_sim_config(c, 2.6);
    const uint64_t bin = 10;
    std::vector<CorrelatorPlan> plans = plans_for(bin);
    EnsembleSamples s = sample_simulation(sim, plans);
    std::vector<CorrelatorPlan> raw_plans = plans_for(1);
    EnsembleSamples raw = sample_simulation(sim, raw_plans);

    Outcome out;
    int within = 0;
    double max_se = 0.0, max_raw_se = 0.0;
    for (size_t i = 0; i < grid.size(); i++) {
        CorrelatorEstimate e = s.estimate(i);
        CorrelatorEstimate r = raw.estimate(i);
        double k = two_time_correlator(q, kReplicaZ, 0.0, kReplicaPhi, grid[i]);
        double z = std::abs(e.value - k) / e.std_error;
        within += z <= 4.0;
        max_se = std::max(max_se, e.std_error);
        max_raw_se = std::max(max_raw_se, r.std_error);
        out.details.push_back(fmt(
            "dt = %.1f  K = %+.4f  estimate = %+.4f +- %.4f (z = %.2f)   per-sample estimator: %+.4f +- %.4f", grid[i],
            k, e.value, e.std_error, z, r.value, r.std_error));
    }
    double elapsed = seconds_since(t0);
    out.pass = within >= 10 * 0.95 && max_se <= 0.02;
    out.summary = fmt(
        "phi = 3pi/10, 5e4 trajectories, 0.1 us bins: %d/10 points within 4 se (need >= 95%%), max se = %.4f "
        "(need <= 0.02); unbinned max se = %.4f; %.1f s",
        within, max_se, max_raw_se, elapsed);
    return out;
}

Outcome three_time_flatness() {
    Outcome out{true, ""};
    int total_points = 0, within = 0;
    std::string slopes;
    for (int n : {1, 3, 7}) {
        ReplicaConfig c;
        c.phi = replica_angle(n);
        c.bin = 10;
        ScanResult s = run_three_time_scan(c, default_three_time_grid(), true);
        std::vector<size_t> rows;
        std::vector<double> x;
        for (size_t i = 0; i < 30; i++) {
            rows.push_back(i);
            x.push_back(s.rows[i].dt21);
        }
        CorrelatorEstimate slope = scan_slope(s, rows, x);
        bool flat = std::abs(slope.value) <= 3.0 * slope.std_error;
        out.pass &= flat;
        int ok = 0;
        for (size_t i = 30; i < 60; i++) {
            const ScanRow &r = s.rows[i];
            ok += std::abs(r.mc_value - r.analytic) <= 4.0 * r.mc_se;
        }
        total_points += 30;
        within += ok;
        out.pass &= ok == 30;
        out.details.push_back(fmt(
            "phi = %dpi/10  slope vs dt21 = %+.4f +- %.4f /us (%s)  dt32 scan: %d/30 within 4 se", n, slope.value,
            slope.std_error, flat ? "flat" : "trend", ok));
        slopes += fmt("%s%+.3f+-%.3f", slopes.empty() ? "" : ", ", slope.value, slope.std_error);
    }
    out.summary = fmt(
        "2e5 trajectories per phi, slopes vs dt21 [%s] within 3 sigma of 0; dt32 scan %d/%d points within 4 se",
        slopes.c_str(), within, total_points);
    return out;
}

Outcome four_time_flatness() {
    Outcome out{true, ""};
    int flat = 0, matched = 0;
    for (int n = 0; n <= 10; n++) {
        ReplicaConfig c;
        c.phi = replica_angle(n);
        c.bin = 10;
        c.window = {1.0, 0.5};
        ScanResult s = run_four_time_scan(c, default_four_time_grid(), true);
        FourTimeSummary sum = summarize_four_time_scan(c, s);
        bool no_trend = std::abs(sum.slope) <= 3.0 * sum.slope_se;
        bool match = std::abs(sum.mc_mean - sum.analytic) <= 4.0 * sum.mc_se;
        flat += no_trend;
        matched += match;
        out.pass &= no_trend && match;
        out.details.push_back(fmt(
            "phi = %2dpi/10  K^2 = %.4f  average = %.4f +- %.4f  slope = %+.4f +- %.4f /us  %s %s", n, sum.analytic,
            sum.mc_mean, sum.mc_se, sum.slope, sum.slope_se, no_trend ? "flat" : "TREND",
            match ? "match" : "MISMATCH"));
    }
    out.summary = fmt(
        "2e5 trajectories, 11 angles: %d/11 without trend at 3 sigma, %d/11 averages within 4 se of K^2", flat,
        matched);
    return out;
}

double mean_purity_defect(double dt, uint64_t n_traj, double *projected_fraction) {
    SimConfig c;
    c.channels = {MeasurementChannel{{0, 0, 1}, 1.0, 1.0, 0.0}};
    c.model = build_ensemble_generator({0, 0, 1}, 0.0, Mat3::Zero(), Vec3::Zero(), c.channels);
    c.r_init = {1, 0, 0};
    c.t_total = 2.0;
    c.dt = dt;
    c.n_traj = n_traj;
    c.master_seed = 3;
    c.record_state = true;
    struct Stat {
        double defect = 0.0;
        uint64_t projections = 0;
    };
    auto stats = map_trajectories(c, 0, n_traj, 0, [](const SignalRecord &r) {
        Stat s;
        for (const auto &v : r.states) {
            s.defect = std::max(s.defect, std::abs(v.norm() - 1.0));
        }
        s.projections = r.projections;
        return s;
    });
    double sum = 0;
    uint64_t proj = 0;
    for (const auto &s : stats) {
        sum += s.defect;
        proj += s.projections;
    }
    *projected_fraction = static_cast<double>(proj) / static_cast<double>(n_traj * c.n_samples());
    return sum / static_cast<double>(n_traj);
}

Outcome purity_and_ensemble() {
    Outcome out;
    double f1, f2;
    double d1 = mean_purity_defect(0.01, 400, &f1);
    double d2 = mean_purity_defect(0.005, 400, &f2);
    double ratio = d1 / d2;
    bool purity_ok = ratio >= 1.5 && ratio <= 3.0;
    out.details.push_back(fmt(
        "purity: mean max|norm - 1| = %.4e at dt = 0.01, %.4e at dt = 0.005, ratio %.3f (required [1.5, 3])", d1,
        d2, ratio));
    out.details.push_back(
        fmt("purity: projected steps %.2f%% at dt = 0.01, %.2f%% at dt = 0.005", 100 * f1, 100 * f2));

    SimConfig c;
    c.channels = {MeasurementChannel{{0, 0, 1}, 1.0, 0.5, 0.3}, MeasurementChannel{{0.6, 0.8, 0}, 2.0, 0.6, 0.0}};
    Mat3 env = Vec3(-0.1, -0.1, -0.2).asDiagonal();
    c.model = build_ensemble_generator({1, 0, 0}, 1.5, env, {0, 0, 0.3}, c.channels);
    c.r_init = {0.3, 0, 0.4};
    c.t_total = 2.0;
    c.dt = 0.002;
    c.n_traj = 20000;
    c.master_seed = 21;
    c.record_state = true;
    const uint64_t stride = 50;
    auto sampled = map_trajectories(c, 0, c.n_traj, 0, [&](const SignalRecord &r) {
        std::vector<Vec3> pts;
        for (uint64_t k = 0; k < r.states.size(); k += stride) {
            pts.push_back(r.states[k]);
        }
        return std::pair{pts, r.projections};
    });
    size_t n_pts = sampled.front().first.size();
    double worst_z = 0.0;
    uint64_t projections = 0;
    for (const auto &s : sampled) {
        projections += s.second;
    }
    for (size_t p = 0; p < n_pts; p++) {
        Vec3 mean = Vec3::Zero(), sq = Vec3::Zero();
        for (const auto &s : sampled) {
            mean += s.first[p];
            sq += s.first[p].cwiseProduct(s.first[p]);
        }
        double n = static_cast<double>(sampled.size());
        mean /= n;
        Vec3 se = ((sq / n - mean.cwiseProduct(mean)) / (n - 1)).cwiseSqrt();
        Vec3 exact = propagate_ensemble(c.model, c.r_init, 0.0, static_cast<double>(p * stride) * c.dt);
        for (int a = 0; a < 3; a++) {
            if (se[a] > 0) {
                worst_z = std::max(worst_z, std::abs(mean[a] - exact[a]) / se[a]);
            } else if (mean[a] != exact[a]) {
                worst_z = std::max(worst_z, std::abs(mean[a] - exact[a]) < 1e-12 ? 0.0 : INFINITY);
            }
        }
    }
    bool ensemble_ok = worst_z <= 4.0;
    out.details.push_back(fmt(
        "ensemble: 2e4 trajectories, %zu times x 3 components, max |mean - exact| / se = %.2f (need <= 4), %llu "
        "projected steps",
        n_pts, worst_z, static_cast<unsigned long long>(projections)));
    out.pass = purity_ok && ensemble_ok;
    out.summary = fmt(
        "purity defect ratio under dt halving = %.3f (need [1.5, 3]) %s; ensemble mean max z = %.2f (need <= 4) %s",
        ratio, purity_ok ? "ok" : "FAILED", worst_z, ensemble_ok ? "ok" : "FAILED");
    return out;
}

Outcome singular_term() {
    Outcome out{true, ""};
    std::string parts;
    for (double tau : {0.5, 1.0}) {
        SimConfig c;
        c.channels = {MeasurementChannel{{0, 0, 1}, tau, 1.0, 0.0}};
        c.model = build_ensemble_generator({0, 0, 1}, 0.0, Mat3::Zero(), Vec3::Zero(), c.channels);
        c.r_init = {1, 0, 0};
        c.t_total = 1.6;
        c.dt = 0.01;
        c.n_traj = 2000;
        c.master_seed = 8;
        GapEvent gaps[] = {{0, 0.0}, {0, 0.0}};
        CorrelatorPlan plan = plan_correlator(c.dt, c.n_samples(), 1, gaps, {0.5, 1.0});
        CorrelatorEstimate e = sample_simulation(c, std::span(&plan, 1)).estimate(0);
        double target = tau / c.dt;
        double rel = std::abs(e.value / target - 1.0);
        out.pass &= rel <= 0.05;
        out.details.push_back(fmt(
            "tau/dt = %.0f: <I(t) I(t)> = %.3f +- %.3f, relative deviation from tau/dt %.2f%%", target, e.value,
            e.std_error, 100 * rel));
        parts += fmt("%s%.0f: %.2f%%", parts.empty() ? "" : ", ", target, 100 * rel);
    }
    std::string message;
    bool rejected_analytic = false;
    try {
        MeasuredQubit q;
        q.channels = {MeasurementChannel{}};
        q.model = build_ensemble_generator({0, 0, 1}, 0.0, Mat3::Zero(), Vec3::Zero(), q.channels);
        singular_corrections(q, SingularSpec{{{0, 1.0}, {0, 1.0}, {0, 1.0}}, Vec3::Zero(), 0.0});
    } catch (const ValidationError &e) {
        message = e.what();
        rejected_analytic = message.find("three or more coinciding") != std::string::npos;
    }
    bool rejected_windowed = false;
    try {
        GapEvent triple[] = {{0, 0.0}, {0, 0.0}, {0, 0.0}};
        plan_correlator(0.01, 1000, 1, triple, {1.0, 0.5});
    } catch (const ValidationError &e) {
        rejected_windowed = std::string(e.what()).find("three or more coinciding") != std::string::npos;
    }
    out.details.push_back("three coinciding events: \"" + message + "\"");
    out.pass &= rejected_analytic && rejected_windowed;
    out.summary = fmt(
        "equal-time product vs tau/dt [%s] (need <= 5%%); three-coinciding specs rejected: analytic %s, windowed %s",
        parts.c_str(), rejected_analytic ? "yes" : "NO", rejected_windowed ? "yes" : "NO");
    return out;
}

std::string slurp(const std::filesystem::path &p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

Outcome determinism() {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / ("qcorr_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ofstream(dir / "run.json") << R"({
  "channels": [
    {"axis": [0, 0, 1], "tau_us": 0.65},
    {"axis": [0.8090169943749474, 0, 0.5877852522924731], "tau_us": 0.65, "phase_k": 0.2}
  ],
  "hamiltonian": {"rabi_axis": [0, 1, 0], "rabi_freq_rad_per_us": 0.7},
  "sim": {"dt_us": 0.005, "t_total_us": 2.5, "n_traj": 300, "seed": 12345,
          "r_init": [0.45399049973954675, 0, 0.8910065241883679]}
})";
    std::ofstream(dir / "spec.json") << R"({
  "window": {"t_a_us": 1.0, "T_us": 0.5},
  "bin": 4,
  "correlators": [
    {"name": "mean", "gaps": [{"channel": 1, "gap_us": 0.0}]},
    {"name": "pair", "gaps": [{"channel": 0, "gap_us": 0.0}, {"channel": 1, "gap_us": 0.2}]},
    {"name": "quad", "gaps": [{"channel": 0, "gap_us": 0.0}, {"channel": 1, "gap_us": 0.2},
                              {"channel": 0, "gap_us": 0.5}, {"channel": 1, "gap_us": 0.7}]}
  ]
})";
    std::string cli = QCORR_CLI_PATH;
    bool ran = true;
    auto pipeline = [&](const std::string &tag, int sim_workers, int est_workers) {
        std::string records = (dir / (tag + ".qcr")).string();
        std::string csv = (dir / (tag + ".csv")).string();
        std::string cmd = "\"" + cli + "\" simulate --config \"" + (dir / "run.json").string() + "\" --out \"" +
                          records + "\" --workers " + std::to_string(sim_workers) + " 2>/dev/null && \"" + cli +
                          "\" estimate --records \"" + records + "\" --spec \"" + (dir / "spec.json").string() +
                          "\" --out \"" + csv + "\" --workers " + std::to_string(est_workers);
        ran &= std::system(cmd.c_str()) == 0;
        return std::pair{slurp(records), slurp(csv)};
    };
    auto a = pipeline("a", 1, 1);
    auto b = pipeline("b", 8, 8);
    auto c = pipeline("c", 1, 8);
    auto d = pipeline("d", 8, 1);
    bool records_same = !a.first.empty() && a.first == b.first && a.first == c.first && a.first == d.first;
    bool csv_same = !a.second.empty() && a.second == b.second && a.second == c.second && a.second == d.second;
    Outcome out;
    out.pass = ran && records_same && csv_same;
    out.summary = fmt(
        "simulate -> estimate via the CLI, 4 runs mixing 1 and 8 workers: records %s (%zu bytes), estimates %s",
        records_same ? "byte-identical" : "DIFFER", a.first.size(), csv_same ? "byte-identical" : "DIFFER");
    if (!ran) {
        out.summary += "; a CLI invocation failed";
    }
    fs::remove_all(dir);
    return out;
}

}  // namespace

int main() {
    struct Criterion {
        const char *name;
        std::function<Outcome()> run;
    };
    std::vector<Criterion> criteria = {
        {"oracle equivalence", oracle_equivalence},
        {"factorization", factorization},
        {"replica constant", replica_constant},
        {"Monte Carlo two-time correlator", monte_carlo_two_time},
        {"three-time flatness", three_time_flatness},
        {"four-time flatness", four_time_flatness},
        {"purity and ensemble mean", purity_and_ensemble},
        {"singular term", singular_term},
        {"determinism", determinism},
    };
    int failures = 0;
    for (size_t i = 0; i < criteria.size(); i++) {
        Outcome o;
        auto t0 = std::chrono::steady_clock::now();
        try {
            o = criteria[i].run();
        } catch (const std::exception &e) {
            o.pass = false;
            o.summary = std::string("threw: ") + e.what();
        }
        failures += !o.pass;
        std::cout << "criterion " << (i + 1) << " (" << criteria[i].name << "): " << (o.pass ? "PASS" : "FAIL")
                  << "  " << o.summary << fmt("  [%.1f s]", seconds_since(t0)) << "\n";
        for (const auto &d : o.details) {
            std::cout << "    " << d << "\n";
        }
        std::cout.flush();
    }
    std::cout << (failures == 0 ? "all acceptance criteria passed" : fmt("%d acceptance criteria failed", failures))
              << "\n";
    return failures == 0 ? 0 : 1;
}
