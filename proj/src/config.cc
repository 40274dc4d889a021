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

#include "qcorr/config.h"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace qcorr {

namespace {

using nlohmann::json;

// Typed access to a JSON object that remembers where it is, for diagnostics.
class Node {
   public:
    Node(const json &value, std::string path, const std::string &source)
        : value_(value), path_(std::move(path)), source_(source) {
    }

    [[noreturn]] void fail(const std::string &msg) const {
        throw ConfigError(source_, path_, msg);
    }

    void require_object(std::initializer_list<const char *> allowed) const {
        if (!value_.is_object()) {
            fail("expected an object");
        }
        std::set<std::string> keys(allowed.begin(), allowed.end());
        for (auto it = value_.begin(); it != value_.end(); ++it) {
            if (!keys.count(it.key())) {
                throw ConfigError(source_, child_path(it.key()), "unknown key");
            }
        }
    }

    bool has(const char *key) const {
        return value_.contains(key);
    }
    Node operator[](const char *key) const {
        if (!value_.contains(key)) {
            throw ConfigError(source_, child_path(key), "missing required key");
        }
        return Node(value_.at(key), child_path(key), source_);
    }
    Node at(size_t i) const {
        return Node(value_.at(i), path_ + "[" + std::to_string(i) + "]", source_);
    }
    size_t array_size() const {
        if (!value_.is_array()) {
            fail("expected an array");
        }
        return value_.size();
    }

    double number() const {
        if (!value_.is_number()) {
            fail("expected a number");
        }
        return value_.get<double>();
    }
    uint64_t unsigned_integer() const {
        if (!value_.is_number_unsigned()) {
            if (value_.is_number_integer() && value_.get<int64_t>() >= 0) {
                return static_cast<uint64_t>(value_.get<int64_t>());
            }
            fail("expected a non-negative integer");
        }
        return value_.get<uint64_t>();
    }
    std::string string() const {
        if (!value_.is_string()) {
            fail("expected a string");
        }
        return value_.get<std::string>();
    }
    Vec3 vec3() const {
        if (array_size() != 3) {
            fail("expected an array of 3 numbers");
        }
        return {at(0).number(), at(1).number(), at(2).number()};
    }
    Mat3 mat3() const {
        if (array_size() != 3) {
            fail("expected a 3x3 array");
        }
        Mat3 m;
        for (size_t i = 0; i < 3; i++) {
            m.row(i) = at(i).vec3().transpose();
        }
        return m;
    }

    const std::string &path() const {
        return path_;
    }

   private:
    std::string child_path(const std::string &key) const {
        return path_.empty() ? key : path_ + "." + key;
    }

    const json &value_;
    std::string path_;
    const std::string &source_;
};

json parse_json(std::string_view text, const std::string &source) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error &e) {
        throw ConfigError(source, "", e.what());
    }
}

// Re-raise validation errors from domain constructors under the field that caused them.
template <typename Fn>
auto at_field(const Node &node, Fn &&fn) {
    try {
        return fn();
    } catch (const ConfigError &) {
        throw;
    } catch (const ValidationError &e) {
        node.fail(e.what());
    }
}

MeasurementChannel parse_channel(const Node &n) {
    n.require_object({"axis", "tau_us", "eta", "phase_k"});
    MeasurementChannel c;
    c.axis = n["axis"].vec3();
    c.tau = n["tau_us"].number();
    if (n.has("eta")) {
        c.eta = n["eta"].number();
    }
    if (n.has("phase_k")) {
        c.phase_k = n["phase_k"].number();
    }
    if (std::abs(c.axis.norm() - 1.0) > kNormTolerance) {
        n["axis"].fail("axis must be a unit vector");
    }
    if (!(c.tau > 0.0)) {
        n["tau_us"].fail("tau_us must be positive");
    }
    if (!(c.eta > 0.0 && c.eta <= 1.0)) {
        n["eta"].fail("eta must lie in (0, 1]");
    }
    at_field(n, [&] {
        c.validate();
        return 0;
    });
    return c;
}

}  // namespace

std::string read_text_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) {
        throw IoError("cannot read " + path);
    }
    return buf.str();
}

MeasuredQubit RunConfig::qubit() const {
    return {build_ensemble_generator(rabi_axis, rabi_freq, env_lambda, env_rst, channels), channels};
}

SimConfig RunConfig::sim_config() const {
    SimConfig sim;
    sim.model = qubit().model;
    sim.channels = channels;
    sim.r_init = r_init;
    sim.t_total = t_total;
    sim.dt = dt;
    sim.n_traj = n_traj;
    sim.master_seed = seed;
    return sim;
}

RunConfig parse_config_text(std::string_view text, const std::string &source) {
    json doc = parse_json(text, source);
    Node root(doc, "", source);
    root.require_object({"channels", "hamiltonian", "environment", "sim", "outputs"});
    RunConfig cfg;

    Node channels = root["channels"];
    size_t n_channels = channels.array_size();
    if (n_channels == 0) {
        channels.fail("at least one channel is required");
    }
    for (size_t i = 0; i < n_channels; i++) {
        cfg.channels.push_back(parse_channel(channels.at(i)));
    }

    if (root.has("hamiltonian")) {
        Node h = root["hamiltonian"];
        h.require_object({"rabi_axis", "rabi_freq_rad_per_us"});
        if (h.has("rabi_axis")) {
            cfg.rabi_axis = h["rabi_axis"].vec3();
        }
        if (h.has("rabi_freq_rad_per_us")) {
            cfg.rabi_freq = h["rabi_freq_rad_per_us"].number();
        }
        if (cfg.rabi_freq != 0.0 && std::abs(cfg.rabi_axis.norm() - 1.0) > kNormTolerance) {
            h["rabi_axis"].fail("rabi_axis must be a unit vector");
        }
    }
    if (root.has("environment")) {
        Node e = root["environment"];
        e.require_object({"lambda", "r_st"});
        if (e.has("lambda")) {
            cfg.env_lambda = e["lambda"].mat3();
        }
        if (e.has("r_st")) {
            cfg.env_rst = e["r_st"].vec3();
            at_field(e["r_st"], [&] {
                validate_bloch_vector(cfg.env_rst, "r_st");
                return 0;
            });
        }
    }
    if (root.has("sim")) {
        Node s = root["sim"];
        s.require_object({"dt_us", "t_total_us", "n_traj", "seed", "r_init"});
        if (s.has("dt_us")) {
            cfg.dt = s["dt_us"].number();
        }
        if (s.has("t_total_us")) {
            cfg.t_total = s["t_total_us"].number();
        }
        if (s.has("n_traj")) {
            cfg.n_traj = s["n_traj"].unsigned_integer();
        }
        if (s.has("seed")) {
            cfg.seed = s["seed"].unsigned_integer();
        }
        if (s.has("r_init")) {
            cfg.r_init = s["r_init"].vec3();
        }
    }
    if (root.has("outputs")) {
        Node o = root["outputs"];
        o.require_object({"records", "csv"});
        if (o.has("records")) {
            cfg.records_path = o["records"].string();
        }
        if (o.has("csv")) {
            cfg.csv_path = o["csv"].string();
        }
    }

    try {
        cfg.sim_config().validate();
    } catch (const ValidationError &e) {
        std::string what = e.what();
        std::string field = "sim";
        if (what.find("stability rule") != std::string::npos) {
            field = "sim.dt_us";
        } else if (what.find("r_init") != std::string::npos) {
            field = "sim.r_init";
        } else if (what.find("t_total") != std::string::npos) {
            field = "sim.t_total_us";
        } else if (what.find("n_traj") != std::string::npos) {
            field = "sim.n_traj";
        } else if (what.find("dt") != std::string::npos) {
            field = "sim.dt_us";
        }
        throw ConfigError(source, field, what);
    }
    return cfg;
}

RunConfig parse_config(const std::string &path) {
    return parse_config_text(read_text_file(path), path);
}

CorrelatorFile parse_correlator_text(std::string_view text, const std::string &source) {
    json doc = parse_json(text, source);
    Node root(doc, "", source);
    root.require_object({"r_in", "t_in_us", "window", "bin", "correlators"});
    CorrelatorFile file;
    if (root.has("r_in")) {
        file.r_in = root["r_in"].vec3();
        at_field(root["r_in"], [&] {
            validate_bloch_vector(*file.r_in, "r_in");
            return 0;
        });
    }
    if (root.has("t_in_us")) {
        file.t_in = root["t_in_us"].number();
    }
    if (root.has("window")) {
        Node w = root["window"];
        w.require_object({"t_a_us", "T_us"});
        Window win{w["t_a_us"].number(), w["T_us"].number()};
        if (!(win.t_a >= 0.0)) {
            w["t_a_us"].fail("t_a_us must be non-negative");
        }
        if (!(win.length > 0.0)) {
            w["T_us"].fail("T_us must be positive");
        }
        file.window = win;
    }
    if (root.has("bin")) {
        file.bin = root["bin"].unsigned_integer();
        if (file.bin < 1) {
            root["bin"].fail("bin must be at least 1");
        }
    }
    Node list = root["correlators"];
    std::set<std::string> names;
    for (size_t i = 0; i < list.array_size(); i++) {
        Node c = list.at(i);
        c.require_object({"name", "events", "gaps"});
        NamedCorrelator nc;
        nc.name = c["name"].string();
        if (nc.name.empty() || nc.name.find_first_of(",\"\n\r") != std::string::npos) {
            c["name"].fail("name must be non-empty and free of commas, quotes and newlines");
        }
        if (!names.insert(nc.name).second) {
            c["name"].fail("duplicate correlator name");
        }
        if (c.has("events") == c.has("gaps")) {
            c.fail("exactly one of \"events\" or \"gaps\" is required");
        }
        if (c.has("events")) {
            Node ev = c["events"];
            for (size_t k = 0; k < ev.array_size(); k++) {
                Node e = ev.at(k);
                e.require_object({"channel", "time_us"});
                nc.events.push_back({static_cast<size_t>(e["channel"].unsigned_integer()), e["time_us"].number()});
            }
            if (nc.events.empty()) {
                ev.fail("at least one event is required");
            }
        } else {
            Node gp = c["gaps"];
            for (size_t k = 0; k < gp.array_size(); k++) {
                Node g = gp.at(k);
                g.require_object({"channel", "gap_us"});
                nc.gaps.push_back({static_cast<size_t>(g["channel"].unsigned_integer()), g["gap_us"].number()});
            }
            if (nc.gaps.empty()) {
                gp.fail("at least one gap is required");
            }
            if (!file.window) {
                c.fail("windowed correlators need a top-level \"window\"");
            }
        }
        file.correlators.push_back(std::move(nc));
    }
    return file;
}

CorrelatorFile parse_correlator_file(const std::string &path) {
    return parse_correlator_text(read_text_file(path), path);
}

}  // namespace qcorr
