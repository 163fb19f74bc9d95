// Copyright 2026 The Cheshire Authors
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

#include "config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <set>
#include <sstream>

#include "cheshire/errors.hpp"

namespace cheshire::cli {

using nlohmann::json;

namespace {

std::string join(const std::string &path, const std::string &key) {
    return path.empty() ? key : path + "." + key;
}

std::string join(const std::string &path, std::size_t index) {
    return path + "." + std::to_string(index);
}

void require_object(const json &j, const std::string &path) {
    if (!j.is_object()) {
        throw ConfigError(path, "expected an object");
    }
}

void reject_unknown(const json &j, const std::string &path, std::initializer_list<const char *> allowed) {
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto &item : j.items()) {
        if (!keys.count(item.key())) {
            throw ConfigError(join(path, item.key()), "unknown field");
        }
    }
}

double parse_real(const json &j, const std::string &path) {
    if (!j.is_number()) {
        throw ConfigError(path, "expected a number");
    }
    const double v = j.get<double>();
    if (!std::isfinite(v)) {
        throw ConfigError(path, "must be finite");
    }
    return v;
}

double parse_positive(const json &j, const std::string &path) {
    const double v = parse_real(j, path);
    if (!(v > 0.0)) {
        throw ConfigError(path, "must be positive");
    }
    return v;
}

double parse_nonnegative(const json &j, const std::string &path) {
    const double v = parse_real(j, path);
    if (v < 0.0) {
        throw ConfigError(path, "must be non-negative");
    }
    return v;
}

std::uint64_t parse_count(const json &j, const std::string &path) {
    if (j.is_number_unsigned()) {
        return j.get<std::uint64_t>();
    }
    if (j.is_number_integer() && j.get<std::int64_t>() >= 0) {
        return static_cast<std::uint64_t>(j.get<std::int64_t>());
    }
    throw ConfigError(path, "expected a non-negative integer");
}

Complex parse_complex(const json &j, const std::string &path) {
    if (j.is_number()) {
        return {parse_real(j, path), 0.0};
    }
    if (!j.is_array() || j.size() != 2) {
        throw ConfigError(path, "expected a complex number [re, im]");
    }
    return {parse_real(j[0], join(path, 0)), parse_real(j[1], join(path, 1))};
}

Vec4 parse_vec4(const json &j, const std::string &path) {
    if (!j.is_array() || j.size() != 4) {
        throw ConfigError(path, "expected 4 complex amplitudes");
    }
    Vec4 v;
    for (std::size_t k = 0; k < 4; ++k) {
        v[k] = parse_complex(j[k], join(path, k));
    }
    return v;
}

template <int N>
Eigen::Matrix<Complex, N, N> parse_matrix(const json &j, const std::string &path) {
    if (!j.is_array() || j.size() != static_cast<std::size_t>(N)) {
        throw ConfigError(path, "expected a " + std::to_string(N) + "x" + std::to_string(N) + " matrix (list of rows)");
    }
    Eigen::Matrix<Complex, N, N> m;
    for (std::size_t r = 0; r < static_cast<std::size_t>(N); ++r) {
        const std::string row_path = join(path, r);
        if (!j[r].is_array() || j[r].size() != static_cast<std::size_t>(N)) {
            throw ConfigError(row_path, "expected a row of " + std::to_string(N) + " complex entries");
        }
        for (std::size_t c = 0; c < static_cast<std::size_t>(N); ++c) {
            m(r, c) = parse_complex(j[r][c], join(row_path, c));
        }
    }
    return m;
}

json matrix_to_json(const Mat4 &m) {
    json rows = json::array();
    for (int r = 0; r < 4; ++r) {
        json row = json::array();
        for (int c = 0; c < 4; ++c) {
            row.push_back(complex_to_json(m(r, c)));
        }
        rows.push_back(row);
    }
    return rows;
}

struct StateSection {
    SystemOperator op;
    std::optional<PureState> pure;
};

StateSection parse_state_section(const json &j, const std::string &path, bool is_preparation, const BlochAxis &axis) {
    require_object(j, path);
    const char *matrix_key = is_preparation ? "density" : "povm";
    reject_unknown(j, path, {"amplitudes", matrix_key, "splitter", "basis"});

    int given = 0;
    for (const char *key : {"amplitudes", matrix_key, "splitter"}) {
        given += j.contains(key) ? 1 : 0;
    }
    if (given != 1) {
        throw ConfigError(path, std::string("give exactly one of amplitudes, ") + matrix_key + ", splitter");
    }

    bool axis_basis = true;
    if (j.contains("basis")) {
        const json &b = j["basis"];
        if (!b.is_string() || (b != "axis" && b != "lab")) {
            throw ConfigError(join(path, "basis"), "expected \"axis\" or \"lab\"");
        }
        axis_basis = b == "axis";
        if (j.contains("splitter")) {
            throw ConfigError(join(path, "basis"), "not used with a splitter, which always acts on H in the lab basis");
        }
    }

    StateSection out;
    try {
        if (j.contains("amplitudes")) {
            const std::string p = join(path, "amplitudes");
            const Vec4 v = parse_vec4(j["amplitudes"], p);
            try {
                out.pure = axis_basis ? PureState::from_axis_amplitudes(v, axis) : PureState::from_amplitudes(v);
            } catch (const InvalidInput &e) {
                throw ConfigError(p, e.what());
            }
            out.op = SystemOperator::projector(*out.pure);
        } else if (j.contains(matrix_key)) {
            const std::string p = join(path, matrix_key);
            const Mat4 m = parse_matrix<4>(j[matrix_key], p);
            out.op = axis_basis ? to_storage_basis(m, axis) : SystemOperator(m);
            const OperatorDiagnostics d =
                validate(out.op, is_preparation ? OperatorRole::Density : OperatorRole::Povm);
            if (!d.ok) {
                std::string msg;
                for (const auto &f : d.failures) {
                    msg += (msg.empty() ? "" : "; ") + f;
                }
                throw ConfigError(p, msg);
            }
        } else {
            const std::string p = join(path, "splitter");
            const json &s = j["splitter"];
            require_object(s, p);
            reject_unknown(s, p, {"r", "t", "v_left", "v_right"});
            if (!s.contains("r") || !s.contains("t")) {
                throw ConfigError(p, "needs r and t");
            }
            const Complex r = parse_complex(s["r"], join(p, "r"));
            const Complex t = parse_complex(s["t"], join(p, "t"));
            const Mat2 vl = s.contains("v_left") ? parse_matrix<2>(s["v_left"], join(p, "v_left")) : Mat2::Identity();
            const Mat2 vr = s.contains("v_right") ? parse_matrix<2>(s["v_right"], join(p, "v_right")) : Mat2::Identity();
            try {
                out.pure = is_preparation ? make_preparation(r, t, vl, vr) : make_postselection(r, t, vl, vr);
            } catch (const InvalidInput &e) {
                throw ConfigError(p, e.what());
            }
            out.op = SystemOperator::projector(*out.pure);
        }
    } catch (const ConfigError &) {
        throw;
    } catch (const InvalidInput &e) {
        throw ConfigError(path, e.what());
    }
    return out;
}

GaussianMeter parse_meter(const json &j, const std::string &path) {
    require_object(j, path);
    reject_unknown(j, path, {"epsilon", "epsilon_tilde"});
    if (!j.contains("epsilon")) {
        throw ConfigError(join(path, "epsilon"), "required");
    }
    const double eps = parse_positive(j["epsilon"], join(path, "epsilon"));
    const double eps_tilde = j.contains("epsilon_tilde") ? parse_positive(j["epsilon_tilde"], join(path, "epsilon_tilde")) : eps;
    try {
        return GaussianMeter(eps, eps_tilde);
    } catch (const InvalidInput &e) {
        throw ConfigError(path, e.what());
    }
}

std::array<double, 2> parse_range(const json &j, const std::string &path) {
    if (!j.is_array() || j.size() != 2) {
        throw ConfigError(path, "expected [min, max]");
    }
    const double lo = parse_real(j[0], join(path, 0));
    const double hi = parse_real(j[1], join(path, 1));
    if (!(lo < hi)) {
        throw ConfigError(path, "min must be below max");
    }
    return {lo, hi};
}

}  // namespace

json complex_to_json(Complex z) {
    return json::array({z.real(), z.imag()});
}

Experiment ExperimentConfig::experiment() const {
    return Experiment(preparation, postselection, axis, meter_x, meter_y);
}

ExperimentConfig parse_config(const json &doc) {
    require_object(doc, "");
    reject_unknown(doc, "", {"preparation", "postselection", "axis", "meters", "sampler", "outputs", "coupling", "sweep"});
    ExperimentConfig cfg;

    if (doc.contains("axis")) {
        const json &a = doc["axis"];
        require_object(a, "axis");
        reject_unknown(a, "axis", {"theta", "phi"});
        cfg.theta = a.contains("theta") ? parse_real(a["theta"], "axis.theta") : 0.0;
        cfg.phi_angle = a.contains("phi") ? parse_real(a["phi"], "axis.phi") : 0.0;
        cfg.axis = BlochAxis::from_angles(cfg.theta, cfg.phi_angle);
    }

    for (const char *key : {"preparation", "postselection", "meters"}) {
        if (!doc.contains(key)) {
            throw ConfigError(key, "required section missing");
        }
    }
    StateSection prep = parse_state_section(doc["preparation"], "preparation", true, cfg.axis);
    StateSection post = parse_state_section(doc["postselection"], "postselection", false, cfg.axis);
    cfg.preparation = prep.op;
    cfg.psi = prep.pure;
    cfg.postselection = post.op;
    cfg.phi = post.pure;

    const json &meters = doc["meters"];
    require_object(meters, "meters");
    reject_unknown(meters, "meters", {"x", "y"});
    for (const char *key : {"x", "y"}) {
        if (!meters.contains(key)) {
            throw ConfigError(join("meters", key), "required");
        }
    }
    cfg.meter_x = parse_meter(meters["x"], "meters.x");
    cfg.meter_y = parse_meter(meters["y"], "meters.y");

    if (doc.contains("sampler")) {
        const json &s = doc["sampler"];
        require_object(s, "sampler");
        reject_unknown(s, "sampler", {"n_trials", "seed", "noise", "threads"});
        if (s.contains("n_trials")) {
            cfg.sampler.n_trials = parse_count(s["n_trials"], "sampler.n_trials");
            if (cfg.sampler.n_trials == 0) {
                throw ConfigError("sampler.n_trials", "must be at least 1");
            }
        }
        if (s.contains("seed")) {
            cfg.sampler.seed = parse_count(s["seed"], "sampler.seed");
        }
        if (s.contains("threads")) {
            cfg.sampler.threads = static_cast<unsigned>(parse_count(s["threads"], "sampler.threads"));
        }
        if (s.contains("noise") && !s["noise"].is_null()) {
            const json &n = s["noise"];
            require_object(n, "sampler.noise");
            reject_unknown(n, "sampler.noise", {"nu_x", "nu_y"});
            NoiseLevels levels;
            levels.nu_x = n.contains("nu_x") ? parse_nonnegative(n["nu_x"], "sampler.noise.nu_x") : 0.0;
            levels.nu_y = n.contains("nu_y") ? parse_nonnegative(n["nu_y"], "sampler.noise.nu_y") : 0.0;
            cfg.sampler.noise = levels;
        }
    }

    if (doc.contains("outputs")) {
        const json &o = doc["outputs"];
        require_object(o, "outputs");
        reject_unknown(o, "outputs", {"trials", "report", "density_grid", "oracle"});
        for (const char *key : {"trials", "report"}) {
            if (o.contains(key) && (!o[key].is_string() || o[key].get<std::string>().empty())) {
                throw ConfigError(join("outputs", key), "expected a file name");
            }
        }
        if (o.contains("trials")) {
            cfg.outputs.trials = o["trials"].get<std::string>();
        }
        if (o.contains("report")) {
            cfg.outputs.report = o["report"].get<std::string>();
        }
        if (o.contains("density_grid") && !o["density_grid"].is_null()) {
            const json &g = o["density_grid"];
            require_object(g, "outputs.density_grid");
            reject_unknown(g, "outputs.density_grid", {"points", "x_range", "y_range"});
            DensityGridOutput grid;
            if (g.contains("points")) {
                const auto n = parse_count(g["points"], "outputs.density_grid.points");
                if (n < 2 || n > 4096) {
                    throw ConfigError("outputs.density_grid.points", "must lie in [2, 4096]");
                }
                grid.points = static_cast<int>(n);
            }
            if (g.contains("x_range")) {
                grid.x_range = parse_range(g["x_range"], "outputs.density_grid.x_range");
            }
            if (g.contains("y_range")) {
                grid.y_range = parse_range(g["y_range"], "outputs.density_grid.y_range");
            }
            cfg.outputs.density_grid = grid;
        }
        if (o.contains("oracle")) {
            const json &g = o["oracle"];
            require_object(g, "outputs.oracle");
            reject_unknown(g, "outputs.oracle", {"spacing", "tolerance"});
            if (g.contains("spacing")) {
                cfg.outputs.oracle_spacing = parse_positive(g["spacing"], "outputs.oracle.spacing");
                const double per_unit = 1.0 / cfg.outputs.oracle_spacing;
                if (std::abs(per_unit - std::round(per_unit)) > 1e-9 * per_unit) {
                    throw ConfigError("outputs.oracle.spacing", "must divide 1");
                }
            }
            if (g.contains("tolerance")) {
                cfg.outputs.oracle_tolerance = parse_positive(g["tolerance"], "outputs.oracle.tolerance");
            }
        }
    }

    if (doc.contains("coupling")) {
        const json &c = doc["coupling"];
        require_object(c, "coupling");
        reject_unknown(c, "coupling", {"a", "b"});
        if (c.contains("a")) {
            cfg.coupling_a = parse_positive(c["a"], "coupling.a");
        }
        if (c.contains("b")) {
            cfg.coupling_b = parse_positive(c["b"], "coupling.b");
        }
    }
    return cfg;
}

json read_json_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("", "cannot open config file " + path);
    }
    try {
        return json::parse(in, nullptr, true, true);
    } catch (const json::parse_error &e) {
        throw ConfigError("", std::string("malformed JSON in ") + path + ": " + e.what());
    }
}

ExperimentConfig load_config(const std::string &path) {
    return parse_config(read_json_file(path));
}

json config_echo(const ExperimentConfig &cfg) {
    json out;
    out["preparation"] = {{"basis", "lab"}, {"density", matrix_to_json(cfg.preparation.matrix())}};
    out["postselection"] = {{"basis", "lab"}, {"povm", matrix_to_json(cfg.postselection.matrix())}};
    out["axis"] = {{"theta", cfg.theta}, {"phi", cfg.phi_angle}};
    out["meters"] = {
        {"x", {{"epsilon", cfg.meter_x.epsilon()}, {"epsilon_tilde", cfg.meter_x.epsilon_tilde()}}},
        {"y", {{"epsilon", cfg.meter_y.epsilon()}, {"epsilon_tilde", cfg.meter_y.epsilon_tilde()}}}};
    json sampler = {{"n_trials", cfg.sampler.n_trials}, {"seed", cfg.sampler.seed}};
    if (cfg.sampler.threads != 0) {
        sampler["threads"] = cfg.sampler.threads;
    }
    if (cfg.sampler.noise) {
        sampler["noise"] = {{"nu_x", cfg.sampler.noise->nu_x}, {"nu_y", cfg.sampler.noise->nu_y}};
    }
    out["sampler"] = sampler;
    json outputs = {{"trials", cfg.outputs.trials},
                    {"report", cfg.outputs.report},
                    {"oracle", {{"spacing", cfg.outputs.oracle_spacing}, {"tolerance", cfg.outputs.oracle_tolerance}}}};
    if (cfg.outputs.density_grid) {
        json g = {{"points", cfg.outputs.density_grid->points}};
        if (cfg.outputs.density_grid->x_range) {
            g["x_range"] = *cfg.outputs.density_grid->x_range;
        }
        if (cfg.outputs.density_grid->y_range) {
            g["y_range"] = *cfg.outputs.density_grid->y_range;
        }
        outputs["density_grid"] = g;
    }
    out["outputs"] = outputs;
    out["coupling"] = {{"a", cfg.coupling_a}, {"b", cfg.coupling_b}};
    return out;
}

void set_path(json &doc, const std::string &path, const json &value) {
    if (path.empty()) {
        throw ConfigError(path, "empty parameter path");
    }
    json *node = &doc;
    std::string walked;
    std::stringstream ss(path);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) {
        if (part.empty()) {
            throw ConfigError(path, "malformed parameter path");
        }
        parts.push_back(part);
    }
    for (std::size_t k = 0; k < parts.size(); ++k) {
        const std::string &key = parts[k];
        walked = walked.empty() ? key : walked + "." + key;
        json *next = nullptr;
        if (node->is_array()) {
            std::size_t index = 0;
            try {
                std::size_t used = 0;
                index = std::stoul(key, &used);
                if (used != key.size()) {
                    throw std::invalid_argument(key);
                }
            } catch (const std::exception &) {
                throw ConfigError(walked, "expected an array index");
            }
            if (index >= node->size()) {
                throw ConfigError(walked, "array index out of range");
            }
            next = &(*node)[index];
        } else if (node->is_object() || node->is_null()) {
            next = &(*node)[key];
        } else {
            throw ConfigError(walked, "cannot descend into a scalar");
        }
        node = next;
    }
    *node = value;
}

}  // namespace cheshire::cli
