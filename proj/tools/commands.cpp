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

#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "cheshire/errors.hpp"
#include "cheshire/indicator.hpp"
#include "cheshire/weak_values.hpp"

namespace cheshire::cli {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

json finite_or_null(double v) {
    return std::isfinite(v) ? json(v) : json(nullptr);
}

json weak_values_json(const WeakValueSet &wv) {
    return {{"left", complex_to_json(wv.left)},
            {"right", complex_to_json(wv.right)},
            {"sigma", complex_to_json(wv.sigma)},
            {"sigma_left", complex_to_json(wv.sigma_left)},
            {"sigma_right", complex_to_json(wv.sigma_right)},
            {"left_right", complex_to_json(wv.left_right)},
            {"left_left", wv.left_left},
            {"right_right", wv.right_right},
            {"sigma_sigma", wv.sigma_sigma}};
}

json limit_json(const LimitMoments &m) {
    return {{"mean_x", m.mean_x}, {"mean_y", m.mean_y}, {"cross_xy", m.cross_xy}, {"norm", m.norm}};
}

json regime_json(const GaussianMeter &m) {
    const Regime r = classify_regime(m);
    return {{"label", std::string(to_string(r.label))}, {"crossover", r.crossover}};
}

bool is_identity(const SystemOperator &e) {
    return (e.matrix() - Mat4::Identity()).cwiseAbs().maxCoeff() <= 1e-12;
}

void write_file(const std::filesystem::path &path, const std::string &content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw std::runtime_error("cannot write " + path.string());
    }
    f << content;
}

std::string format_double(double v) {
    if (std::isnan(v)) {
        return "";
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct CommonOptions {
    std::string config;
    std::string out;
    std::string format = "json";
};

}  // namespace

json analyze_report(const ExperimentConfig &cfg) {
    const Experiment exp = cfg.experiment();
    const MomentReport m = moments(exp);
    const CheshireReport c = cheshire_parameter(exp);

    json report;
    report["p_postselect"] = m.p_postselect;
    report["overlap_trace"] = exp.traces().trace;
    report["norm_N"] = finite_or_null(m.norm_N);
    report["moments"] = {{"mean_x", m.mean_x}, {"mean_y", m.mean_y}, {"cross_xy", m.cross_xy}, {"cross_xy2", m.cross_xy2}};
    report["w_x"] = exp.w_x();
    report["w_y"] = exp.w_y();
    report["regimes"] = {{"x", regime_json(exp.meter_x())}, {"y", regime_json(exp.meter_y())}};

    json limits = json::object();
    bool orthogonal = false;
    try {
        const WeakValueSet wv = exp.weak_values();
        report["weak_values"] = weak_values_json(wv);
        for (LimitRegime r : {LimitRegime::Strong, LimitRegime::StrongCatWeakGrin, LimitRegime::WeakCoherent}) {
            try {
                limits[std::string(to_string(r))] = limit_json(limit_moments(r, wv));
            } catch (const std::domain_error &e) {
                limits[std::string(to_string(r))] = {{"error", e.what()}};
            }
        }
    } catch (const NearOrthogonal &) {
        orthogonal = true;
        report["weak_values"] = nullptr;
    }
    report["orthogonal"] = orthogonal;
    if (orthogonal) {
        const OrthogonalElements el = OrthogonalElements::from(exp.traces());
        report["orthogonal_elements"] = {
            {"left_sq", el.left_sq}, {"sigma_sq", el.sigma_sq}, {"re_left_sigma", el.re_left_sigma}};
        try {
            limits[std::string(to_string(LimitRegime::AlmostOrthogonal))] = limit_json(limit_moments(el, exp.w_x(), exp.w_y()));
        } catch (const DivergentLimit &e) {
            limits[std::string(to_string(LimitRegime::AlmostOrthogonal))] = {{"error", e.what()}, {"scaling", e.scaling()}};
        }
    }
    report["limits"] = limits;

    json cheshire = {{"c_of_Ef", c.c_of_Ef},
                     {"c_from_moments", c.c_from_moments},
                     {"c_total", c.c_total},
                     {"c_max", 0.25 * exp.w_xy()},
                     {"cross_xy", c.cross_xy}};
    if (cfg.sampler.noise) {
        const NoiseDiagnostics d = noise_check(c, cfg.sampler.noise->nu_x, cfg.sampler.noise->nu_y, c.w_x, c.w_y);
        cheshire["noise"] = {{"ok", d.ok},
                             {"margin", d.margin},
                             {"product_ratio", finite_or_null(d.product_ratio)},
                             {"ratio_x", d.ratio_x},
                             {"ratio_y", d.ratio_y}};
    }
    report["cheshire"] = cheshire;

    json notes = json::array();
    if (is_identity(exp.postselection())) {
        notes.push_back(kNoPostselectionNote);
    }
    if (is_path_block_diagonal(exp.preparation())) {
        notes.push_back("preparation has no coherence between the arms: C vanishes");
    }
    report["notes"] = notes;
    report["coupling"] = {{"a", cfg.coupling_a}, {"b", cfg.coupling_b}};
    report["config_echo"] = config_echo(cfg);
    return report;
}

std::vector<std::string> analyze_columns() {
    return {"p_postselect", "norm_N", "mean_x", "mean_y", "cross_xy", "cross_xy2", "c_of_Ef", "c_total", "w_x", "w_y"};
}

std::vector<double> analyze_row(const json &report) {
    auto num = [](const json &j) { return j.is_number() ? j.get<double>() : kNaN; };
    const json &mm = report["moments"];
    const json &c = report["cheshire"];
    return {num(report["p_postselect"]), num(report["norm_N"]), num(mm["mean_x"]), num(mm["mean_y"]),
            num(mm["cross_xy"]),        num(mm["cross_xy2"]),   num(c["c_of_Ef"]),  num(c["c_total"]),
            num(report["w_x"]),         num(report["w_y"])};
}

void write_density_csv(std::ostream &out, const ExperimentConfig &cfg) {
    const Experiment exp = cfg.experiment();
    const DensityGridOutput grid = cfg.outputs.density_grid.value_or(DensityGridOutput{});
    const double sx = 4.0 / exp.meter_x().epsilon();
    const double sy = 4.0 / exp.meter_y().epsilon();
    const auto xr = grid.x_range.value_or(std::array<double, 2>{-sx, 1.0 + sx});
    const auto yr = grid.y_range.value_or(std::array<double, 2>{-1.0 - sy, 1.0 + sy});
    const SignedMixture mix = branch_mixture(exp);
    const double p = mix.total_weight();
    out << "x,y,density\n";
    for (int i = 0; i < grid.points; ++i) {
        const double x = xr[0] + (xr[1] - xr[0]) * i / (grid.points - 1);
        for (int j = 0; j < grid.points; ++j) {
            const double y = yr[0] + (yr[1] - yr[0]) * j / (grid.points - 1);
            out << format_double(x) << ',' << format_double(y) << ',' << format_double(mix.evaluate(x, y) / p) << '\n';
        }
    }
}

SampleResult run_sample(const ExperimentConfig &cfg) {
    const Experiment exp = cfg.experiment();
    SampleResult r;
    r.batch = sample_trials(exp, cfg.sampler);
    r.estimate = estimate_cheshire(r.batch.records);
    const CheshireReport c = cheshire_parameter(exp);

    std::uint64_t successes = 0;
    for (const auto &t : r.batch.records) {
        successes += t.postselected ? 1 : 0;
    }
    const double n = static_cast<double>(r.batch.records.size());
    auto branch = [](const BranchInfo &b) {
        return json{{"probability", b.probability}, {"acceptance", b.acceptance}, {"grid_fallback", b.grid_fallback}};
    };
    json s = {{"n_trials", r.estimate.n},
              {"seed", cfg.sampler.seed},
              {"estimate", r.estimate.estimate},
              {"std_error", finite_or_null(r.estimate.std_error)},
              {"c_total", c.c_total},
              {"success_fraction", successes / n},
              {"p_postselect", c.p_postselect},
              {"success_branch", branch(r.batch.success)},
              {"failure_branch", branch(r.batch.failure)}};
    if (cfg.sampler.noise) {
        const NoiseDiagnostics d = noise_check(c, cfg.sampler.noise->nu_x, cfg.sampler.noise->nu_y, c.w_x, c.w_y);
        s["noise"] = {{"nu_x", cfg.sampler.noise->nu_x},
                      {"nu_y", cfg.sampler.noise->nu_y},
                      {"check", d.ok ? "pass" : "fail"},
                      {"product_ratio", finite_or_null(d.product_ratio)},
                      {"ratio_x", d.ratio_x},
                      {"ratio_y", d.ratio_y}};
    } else {
        s["noise"] = nullptr;
    }
    r.summary = s;
    return r;
}

json OracleCheckResult::to_json() const {
    return {{"pass", pass},
            {"max_residual", max_residual},
            {"tolerance", tolerance},
            {"mass_success", mass_success},
            {"mass_failure", mass_failure},
            {"mass_total", mass_success + mass_failure},
            {"min_value", min_value},
            {"nodes_x", nodes_x},
            {"nodes_y", nodes_y}};
}

OracleCheckResult run_oracle_check(const ExperimentConfig &cfg, const ReferenceFactory &reference, long long max_cells) {
    const Experiment exp = cfg.experiment();
    const double h = cfg.outputs.oracle_spacing;
    auto nodes = [h](const GaussianMeter &m) { return 2 * static_cast<long long>(std::ceil((8.0 / m.epsilon() + 2.0) / h)) + 1; };
    OracleCheckResult r;
    r.nodes_x = nodes(exp.meter_x());
    r.nodes_y = nodes(exp.meter_y());
    if (r.nodes_x * r.nodes_y > max_cells) {
        throw ConfigError("meters", "oracle grid of " + std::to_string(r.nodes_x) + " x " + std::to_string(r.nodes_y) +
                                        " nodes is too large; use larger epsilon or coarser outputs.oracle.spacing");
    }
    const auto gx = oracle::GriddedMeter::gaussian(exp.meter_x(), h);
    const auto gy = oracle::GriddedMeter::gaussian(exp.meter_y(), h);
    const oracle::GriddedJoint gj = oracle::brute_force_joint(exp.preparation(), exp.postselection(), exp.axis(), gx, gy);
    r.max_residual = oracle::max_residual(gj, reference(exp), cfg.sampler.threads);
    r.tolerance = cfg.outputs.oracle_tolerance;
    r.mass_success = gj.mass(oracle::Branch::Success);
    r.mass_failure = gj.mass(oracle::Branch::Failure);
    r.min_value = gj.min_value();
    r.pass = r.max_residual <= r.tolerance;
    return r;
}

std::vector<double> parse_values(const std::string &text) {
    std::vector<double> values;
    auto number = [&text](const std::string &s) {
        try {
            std::size_t used = 0;
            const double v = std::stod(s, &used);
            if (used != s.size() || !std::isfinite(v)) {
                throw std::invalid_argument(s);
            }
            return v;
        } catch (const std::exception &) {
            throw ConfigError("sweep", "cannot parse \"" + s + "\" in \"" + text + "\"");
        }
    };
    if (text.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(text);
        std::string p;
        while (std::getline(ss, p, ':')) {
            parts.push_back(p);
        }
        if (parts.size() != 3) {
            throw ConfigError("sweep", "a range is start:stop:count");
        }
        const double start = number(parts[0]);
        const double stop = number(parts[1]);
        const double count = number(parts[2]);
        if (count < 1 || count != std::floor(count)) {
            throw ConfigError("sweep", "range count must be a positive integer");
        }
        const int n = static_cast<int>(count);
        for (int k = 0; k < n; ++k) {
            values.push_back(n == 1 ? start : start + (stop - start) * k / (n - 1));
        }
        return values;
    }
    std::stringstream ss(text);
    std::string p;
    while (std::getline(ss, p, ',')) {
        values.push_back(number(p));
    }
    if (values.empty()) {
        throw ConfigError("sweep", "no values given");
    }
    return values;
}

SweepPlan sweep_from_config(const json &doc) {
    SweepPlan plan;
    if (!doc.is_object() || !doc.contains("sweep")) {
        return plan;
    }
    const json &s = doc["sweep"];
    if (!s.is_object()) {
        throw ConfigError("sweep", "expected an object");
    }
    for (const auto &item : s.items()) {
        if (item.key() != "params" && item.key() != "values" && item.key() != "range") {
            throw ConfigError("sweep." + item.key(), "unknown field");
        }
    }
    if (s.contains("params")) {
        const json &p = s["params"];
        if (p.is_string()) {
            plan.params.push_back(p.get<std::string>());
        } else if (p.is_array()) {
            for (std::size_t k = 0; k < p.size(); ++k) {
                if (!p[k].is_string()) {
                    throw ConfigError("sweep.params." + std::to_string(k), "expected a dotted path");
                }
                plan.params.push_back(p[k].get<std::string>());
            }
        } else {
            throw ConfigError("sweep.params", "expected a path or a list of paths");
        }
    }
    if (s.contains("values") && s.contains("range")) {
        throw ConfigError("sweep", "give values or range, not both");
    }
    if (s.contains("values")) {
        const json &v = s["values"];
        if (!v.is_array()) {
            throw ConfigError("sweep.values", "expected a list of numbers");
        }
        for (std::size_t k = 0; k < v.size(); ++k) {
            if (!v[k].is_number()) {
                throw ConfigError("sweep.values." + std::to_string(k), "expected a number");
            }
            plan.values.push_back(v[k].get<double>());
        }
    }
    if (s.contains("range")) {
        const json &r = s["range"];
        if (!r.is_object() || !r.contains("start") || !r.contains("stop") || !r.contains("count") ||
            !r["start"].is_number() || !r["stop"].is_number() || !r["count"].is_number_integer()) {
            throw ConfigError("sweep.range", "expected {start, stop, count}");
        }
        plan.values = parse_values(std::to_string(r["start"].get<double>()) + ":" + std::to_string(r["stop"].get<double>()) +
                                   ":" + std::to_string(r["count"].get<long long>()));
    }
    return plan;
}

SweepTable run_sweep(const json &doc, const SweepPlan &plan) {
    if (plan.params.empty()) {
        throw ConfigError("sweep", "no parameter path given");
    }
    if (plan.values.empty()) {
        throw ConfigError("sweep", "no values given");
    }
    SweepTable table;
    table.columns = {"value", "w_x", "w_y", "p_postselect", "norm_N", "mean_x", "mean_y", "cross_xy", "c_of_Ef", "c_total"};
    for (double v : plan.values) {
        json row_doc = doc;
        row_doc.erase("sweep");
        for (const auto &p : plan.params) {
            set_path(row_doc, p, v);
        }
        const ExperimentConfig cfg = parse_config(row_doc);
        std::vector<double> row(table.columns.size(), kNaN);
        row[0] = v;
        row[1] = w_factor(cfg.meter_x);
        row[2] = w_factor(cfg.meter_y);
        try {
            const Experiment exp = cfg.experiment();
            const MomentReport m = moments(exp);
            const CheshireReport c = cheshire_parameter(exp);
            row[3] = m.p_postselect;
            row[4] = m.norm_N;
            row[5] = m.mean_x;
            row[6] = m.mean_y;
            row[7] = m.cross_xy;
            row[8] = c.c_of_Ef;
            row[9] = c.c_total;
            table.status.push_back("ok");
        } catch (const ZeroPostselection &) {
            table.status.push_back("zero_postselection");
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

void write_sweep_csv(std::ostream &out, const SweepTable &table) {
    for (const auto &c : table.columns) {
        out << c << ',';
    }
    out << "status\n";
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        for (double v : table.rows[r]) {
            out << format_double(std::isinf(v) ? kNaN : v) << ',';
        }
        out << table.status[r] << '\n';
    }
}

json sweep_to_json(const SweepTable &table) {
    json rows = json::array();
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        json row = json::object();
        for (std::size_t c = 0; c < table.columns.size(); ++c) {
            row[table.columns[c]] = finite_or_null(table.rows[r][c]);
        }
        row["status"] = table.status[r];
        rows.push_back(row);
    }
    return rows;
}

int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
    CLI::App app{"Post-selected two-meter measurements: analysis, Monte Carlo and brute-force checks", "cheshire"};
    app.require_subcommand(1);

    CommonOptions opts;
    std::vector<std::string> sweep_params;
    std::string sweep_values;
    std::string sweep_range;
    auto add_common = [&opts](CLI::App *sub) {
        sub->add_option("--config", opts.config, "Experiment config (JSON)")->required();
        sub->add_option("--out", opts.out, "Directory for output files");
        sub->add_option("--format", opts.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    };
    CLI::App *analyze = app.add_subcommand("analyze", "Closed-form report");
    CLI::App *sample = app.add_subcommand("sample", "Monte Carlo trials and the signed-product estimate");
    CLI::App *check = app.add_subcommand("oracle-check", "Brute-force grid law against the analytic engine");
    CLI::App *sweep = app.add_subcommand("sweep", "Report table over a parameter sweep");
    for (CLI::App *sub : {analyze, sample, check, sweep}) {
        add_common(sub);
    }
    sweep->add_option("--param", sweep_params, "Dotted config path to vary (repeatable)");
    auto *values_opt = sweep->add_option("--values", sweep_values, "Comma-separated values");
    sweep->add_option("--range", sweep_range, "start:stop:count")->excludes(values_opt);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError &e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    }

    const bool csv = opts.format == "csv";
    std::filesystem::path out_dir;
    if (!opts.out.empty()) {
        out_dir = opts.out;
    }
    auto ensure_dir = [&out_dir] {
        if (!out_dir.empty()) {
            std::filesystem::create_directories(out_dir);
        }
    };

    try {
        const json doc = read_json_file(opts.config);
        const ExperimentConfig cfg = parse_config(doc);

        if (analyze->parsed()) {
            const json report = analyze_report(cfg);
            std::ostringstream text;
            if (csv) {
                const auto cols = analyze_columns();
                const auto row = analyze_row(report);
                for (std::size_t k = 0; k < cols.size(); ++k) {
                    text << cols[k] << (k + 1 < cols.size() ? "," : "\n");
                }
                for (std::size_t k = 0; k < row.size(); ++k) {
                    text << format_double(row[k]) << (k + 1 < row.size() ? "," : "\n");
                }
            } else {
                text << report.dump(2) << '\n';
            }
            out << text.str();
            if (!out_dir.empty()) {
                ensure_dir();
                write_file(out_dir / cfg.outputs.report, report.dump(2) + "\n");
                if (cfg.outputs.density_grid) {
                    std::ostringstream d;
                    write_density_csv(d, cfg);
                    write_file(out_dir / "density.csv", d.str());
                }
            }
            return kExitOk;
        }

        if (sample->parsed()) {
            const SampleResult r = run_sample(cfg);
            if (!out_dir.empty()) {
                ensure_dir();
                std::ostringstream trials;
                write_trials_csv(trials, r.batch.records);
                write_file(out_dir / cfg.outputs.trials, trials.str());
                write_file(out_dir / "summary.json", r.summary.dump(2) + "\n");
            }
            if (csv) {
                out << "n_trials,estimate,std_error,c_total,success_fraction,p_postselect,noise_check\n";
                const json &s = r.summary;
                out << s["n_trials"].get<std::uint64_t>() << ',' << format_double(s["estimate"].get<double>()) << ','
                    << format_double(r.estimate.std_error) << ',' << format_double(s["c_total"].get<double>()) << ','
                    << format_double(s["success_fraction"].get<double>()) << ','
                    << format_double(s["p_postselect"].get<double>()) << ','
                    << (s["noise"].is_null() ? "" : s["noise"]["check"].get<std::string>()) << '\n';
            } else {
                out << r.summary.dump(2) << '\n';
            }
            return kExitOk;
        }

        if (check->parsed()) {
            const OracleCheckResult r = run_oracle_check(cfg);
            const json j = r.to_json();
            if (csv) {
                out << "pass,max_residual,tolerance,mass_total\n"
                    << (r.pass ? 1 : 0) << ',' << format_double(r.max_residual) << ',' << format_double(r.tolerance) << ','
                    << format_double(r.mass_success + r.mass_failure) << '\n';
            } else {
                out << j.dump(2) << '\n';
            }
            if (!out_dir.empty()) {
                ensure_dir();
                write_file(out_dir / "oracle_check.json", j.dump(2) + "\n");
            }
            return r.pass ? kExitOk : kExitOracleMismatch;
        }

        SweepPlan plan = sweep_from_config(doc);
        if (!sweep_params.empty()) {
            plan.params = sweep_params;
        }
        if (!sweep_values.empty()) {
            plan.values = parse_values(sweep_values);
        } else if (!sweep_range.empty()) {
            plan.values = parse_values(sweep_range);
        }
        const SweepTable table = run_sweep(doc, plan);
        std::ostringstream text;
        if (csv) {
            write_sweep_csv(text, table);
        } else {
            text << sweep_to_json(table).dump(2) << '\n';
        }
        out << text.str();
        if (!out_dir.empty()) {
            ensure_dir();
            std::ostringstream file;
            write_sweep_csv(file, table);
            write_file(out_dir / "sweep.csv", file.str());
        }
        return kExitOk;
    } catch (const ConfigError &e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const InvalidInput &e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ZeroPostselection &e) {
        err << "zero post-selection: " << e.what() << '\n';
        return kExitZeroPostselection;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

}  // namespace cheshire::cli
