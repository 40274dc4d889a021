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

#ifndef QCORR_CONFIG_H
#define QCORR_CONFIG_H

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qcorr/analytic.h"
#include "qcorr/bloch.h"
#include "qcorr/empirical.h"
#include "qcorr/error.h"
#include "qcorr/trajectory.h"

namespace qcorr {

/// Config or spec file rejected; `field` is the JSON path of the offending value.
struct ConfigError : ValidationError {
    ConfigError(const std::string &source, const std::string &field, const std::string &msg)
        : ValidationError(source + ": " + (field.empty() ? "" : field + ": ") + msg), field(field) {
    }
    std::string field;
};

/// Validated contents of a run configuration file (JSON).
///
///   {
///     "channels": [{"axis": [0, 0, 1], "tau_us": 0.65, "eta": 1.0, "phase_k": 0.0}],
///     "hamiltonian": {"rabi_axis": [0, 1, 0], "rabi_freq_rad_per_us": 0.0},
///     "environment": {"lambda": [[0, 0, 0], [0, 0, 0], [0, 0, 0]], "r_st": [0, 0, 0]},
///     "sim": {"dt_us": 0.01, "t_total_us": 1.0, "n_traj": 1, "seed": 0, "r_init": [0, 0, 1]},
///     "outputs": {"records": "run.qcr", "csv": "run.csv"}
///   }
///
/// Only "channels" is required; unknown keys are rejected.
struct RunConfig {
    std::vector<MeasurementChannel> channels;
    Vec3 rabi_axis{0, 0, 1};
    double rabi_freq = 0.0;
    Mat3 env_lambda = Mat3::Zero();
    Vec3 env_rst = Vec3::Zero();
    double dt = 0.01;
    double t_total = 1.0;
    uint64_t n_traj = 1;
    uint64_t seed = 0;
    BlochVector r_init = BlochVector::Zero();
    std::optional<std::string> records_path;
    std::optional<std::string> csv_path;

    MeasuredQubit qubit() const;
    SimConfig sim_config() const;
};

RunConfig parse_config(const std::string &path);
RunConfig parse_config_text(std::string_view text, const std::string &source = "<config>");

/// A named correlator: absolute events (analytic only) or gaps from t_1 (analytic and empirical).
struct NamedCorrelator {
    std::string name;
    std::vector<CorrelatorEvent> events;
    std::vector<GapEvent> gaps;

    bool windowed() const {
        return !gaps.empty();
    }
};

/// Correlator spec file (JSON):
///
///   {
///     "r_in": [0, 0, 1], "t_in_us": 0.0,
///     "window": {"t_a_us": 1.0, "T_us": 0.5}, "bin": 1,
///     "correlators": [
///       {"name": "K4", "events": [{"channel": 0, "time_us": 1.0}, ...]},
///       {"name": "Kzphi", "gaps": [{"channel": 0, "gap_us": 0.0}, {"channel": 1, "gap_us": 0.3}]}
///     ]
///   }
///
/// Windowed correlators need "window"; r_in defaults to the config's r_init
/// and t_in to 0.
struct CorrelatorFile {
    std::optional<BlochVector> r_in;
    double t_in = 0.0;
    std::optional<Window> window;
    uint64_t bin = 1;
    std::vector<NamedCorrelator> correlators;
};

CorrelatorFile parse_correlator_file(const std::string &path);
CorrelatorFile parse_correlator_text(std::string_view text, const std::string &source = "<spec>");

/// Whole file into a string; IoError if it cannot be read.
std::string read_text_file(const std::string &path);

}  // namespace qcorr

#endif
