// Copyright 2026 The qnnlab Authors
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

#include "qnnlab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "qnnlab/dynamics.hpp"
#include "qnnlab/errors.hpp"
#include "qnnlab/kernel.hpp"
#include "qnnlab/lightcone.hpp"
#include "qnnlab/rng.hpp"
#include "qnnlab/transport.hpp"

namespace qnnlab {

namespace {

using nlohmann::json;

constexpr double kLateTimeCap = 1e4;

json read_json_file(const std::filesystem::path& path, const std::string& field) {
    std::ifstream in(path);
    if (!in) throw ConfigError(field, "cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(field, std::string("invalid JSON in ") + path.string() + ": " + e.what());
    }
}

/// Object or path to a JSON file holding the object.
json resolve_reference(const json& value, const std::string& field, const std::filesystem::path& base_dir) {
    if (value.is_string()) {
        std::filesystem::path p = value.get<std::string>();
        if (p.is_relative()) p = base_dir / p;
        return read_json_file(p, field);
    }
    if (!value.is_object()) throw ConfigError(field, "expected an object or a file path");
    return value;
}

std::size_t positive_count(const json& obj, const char* key, std::size_t fallback, const std::string& path) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number_integer() || v.get<long long>() <= 0) {
        throw ConfigError(path + key, "expected a positive integer");
    }
    return v.get<std::size_t>();
}

double number(const json& obj, const char* key, double fallback, const std::string& path) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number() || !std::isfinite(v.get<double>())) throw ConfigError(path + key, "expected a finite number");
    return v.get<double>();
}

double positive_number(const json& obj, const char* key, double fallback, const std::string& path) {
    const double v = number(obj, key, fallback, path);
    if (!(v > 0.0)) throw ConfigError(path + key, "must be positive");
    return v;
}

Input parse_input(const json& v, std::size_t dim, const std::string& path) {
    std::vector<double> values;
    if (v.is_number()) {
        values.push_back(v.get<double>());
    } else if (v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number(); })) {
        values = v.get<std::vector<double>>();
    } else {
        throw ConfigError(path, "expected a number or an array of numbers");
    }
    if (values.size() != dim) {
        throw ConfigError(path, "expected " + std::to_string(dim) + " coordinates, got " +
                                    std::to_string(values.size()));
    }
    for (double x : values) {
        if (!std::isfinite(x)) throw ConfigError(path, "coordinates must be finite");
    }
    return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

bool same_input(const Input& a, const Input& b) { return a.size() == b.size() && a == b; }

json input_json(const Input& x) { return std::vector<double>(x.data(), x.data() + x.size()); }

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

json num(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

const char* gradient_name(GradientMethod g) {
    return g == GradientMethod::Adjoint ? "adjoint" : "parameter_shift";
}

const char* simulation_name(SimulationMode s) {
    switch (s) {
        case SimulationMode::Dense: return "dense";
        case SimulationMode::Cones: return "cones";
        case SimulationMode::Auto: break;
    }
    return "auto";
}

std::vector<std::size_t> all_inputs(const Model& model) {
    std::vector<std::size_t> idx(model.feature_space().size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    return idx;
}

Matrix submatrix(const Matrix& k, const std::vector<std::size_t>& idx) {
    const auto n = static_cast<Eigen::Index>(idx.size());
    Matrix out(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            out(i, j) = k(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(i)]),
                          static_cast<Eigen::Index>(idx[static_cast<std::size_t>(j)]));
    return out;
}

double smallest_eigenvalue(const Matrix& k) { return jacobi_eigen(k).values(0); }

std::string csv_header_comment(const ExperimentConfig& c) { return "# seed=" + std::to_string(c.seed) + "\n"; }

std::string samples_csv(const ExperimentConfig& c, const Matrix& points) {
    std::ostringstream out;
    out << csv_header_comment(c);
    write_samples_csv(out, SampleSet(points));
    return out.str();
}

std::string kernel_csv(const ExperimentConfig& c, const KernelMatrix& k) {
    std::ostringstream out;
    out << csv_header_comment(c);
    write_kernel_csv(out, k);
    return out.str();
}

/// Shared start of every experiment: a calibrated model.
struct Prepared {
    Model model;
    CalibrationResult calibration;
    CircuitSizes sizes;
};

Prepared prepare(const ExperimentConfig& c) {
    Model model = build_model(c);
    auto cal = calibrate_normalization(model, c.samples.calibration, stream_seed(c, SeedStream::Calibration));
    const auto sizes = circuit_sizes(model);
    return {std::move(model), std::move(cal), sizes};
}

json sizes_json(const ExperimentConfig& c, const Prepared& p) {
    json doc = to_json(p.sizes);
    doc["seed"] = c.seed;
    doc["num_params"] = p.model.num_params();
    doc["nbar"] = p.model.feature_space().size();
    return doc;
}

std::string summary_text(const CommandResult& r) {
    std::ostringstream out;
    out << "command: " << r.command << "\n";
    for (const auto& [key, value] : r.summary.items()) {
        if (value.is_structured() || key == "command") continue;
        out << key << ": " << value.dump() << "\n";
    }
    for (const auto& chk : r.report.checks) {
        out << "check " << chk.name << ": observed " << format_number(chk.observed) << " bound "
            << format_number(chk.bound) << " -> " << status_name(chk.status) << "\n";
    }
    for (const auto& a : r.report.audit.checks) {
        out << "assumption " << a.name << ": " << format_number(a.lhs) << " " << a.relation << " "
            << format_number(a.rhs) << " -> " << (a.holds ? "holds" : "unmet") << "\n";
    }
    out << "exit_code: " << r.exit_code << "\n";
    return out.str();
}

CommandResult start(const char* name, const ExperimentConfig& c) {
    CommandResult r;
    r.command = name;
    r.summary["command"] = name;
    r.summary["seed"] = c.seed;
    r.files["config.json"] = dump(config_to_json(c));
    return r;
}

void finish(CommandResult& r) {
    r.exit_code = r.report.exit_code();
    r.summary["exit_code"] = r.exit_code;
    json report = to_json(r.report);
    report["seed"] = r.summary["seed"];
    r.files["bound_report.json"] = dump(report);
    r.files["summary.json"] = dump(r.summary);
    r.files["summary.txt"] = summary_text(r);
}

void add_calibration(CommandResult& r, const ExperimentConfig& c, const Prepared& p) {
    json cal = calibration_to_json(p.calibration);
    cal["config_seed"] = c.seed;
    r.files["calibration.json"] = dump(cal);
    r.summary["N_m"] = p.calibration.normalization;
    r.summary["N_m_standard_error"] = p.calibration.standard_error;
    r.summary["sizes"] = sizes_json(c, p);
}

AuditInputs audit_inputs(const ExperimentConfig& c, const Prepared& p, double lambda_min_k, double k0bar_min) {
    AuditInputs in;
    in.sizes = p.sizes;
    in.nbar = p.model.feature_space().size();
    in.n = c.dataset ? c.dataset->size() : 1;
    in.lambda_min_k = lambda_min_k;
    in.k0bar_min_eigenvalue = k0bar_min;
    in.delta = c.delta;
    return in;
}

void attach_centering(AuditInputs& in, const ExperimentConfig& c, const Model& model, CommandResult& r) {
    if (c.samples.centering == 0) return;
    const auto rep = check_centering(model, c.samples.centering, stream_seed(c, SeedStream::Centering));
    in.has_centering = true;
    in.centering_max_mean = rep.max_abs_mean;
    in.centering_tolerance = rep.tolerance;
    r.summary["centering"] = centering_to_json(rep);
}

std::vector<double> checkpoint_grid(const ExperimentConfig& c, double lambda_min) {
    auto grid = geometric_checkpoints(c.checkpoints.t_first, c.checkpoints.t_max, c.checkpoints.count);
    if (c.checkpoints.include_infinity && lambda_min > kSingularEigenvalue) {
        const double late = std::min(50.0 / (c.eta * lambda_min), kLateTimeCap);
        if (late > grid.back()) grid.push_back(late);
    }
    return grid;
}

FlowOptions flow_options(const ExperimentConfig& c) {
    FlowOptions opt;
    opt.gradient = c.gradient;
    return opt;
}

double max_loss_increase(const FlowTrajectory& traj) {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < traj.loss.size(); ++i) worst = std::max(worst, traj.loss[i] - traj.loss[i - 1]);
    return worst;
}

Dataset seed_dataset(const ExperimentConfig& c, const Model& model, const ParameterVector& theta0,
                     const std::vector<std::size_t>& train) {
    Dataset data = c.require_dataset();
    if (c.targets == TargetMode::InitialOutput) {
        for (std::size_t i = 0; i < train.size(); ++i)
            data.Y(static_cast<Eigen::Index>(i)) = model.eval_f(theta0, train[i]);
    }
    return data;
}

}  // namespace

const Dataset& ExperimentConfig::require_dataset() const {
    if (!dataset) throw ConfigError("dataset", "this command needs a training dataset");
    return *dataset;
}

ExperimentConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
    if (!doc.is_object()) throw ConfigError("$", "config must be a JSON object");
    static const std::vector<std::string> known = {
        "architecture", "feature_space", "dataset", "targets",   "samples",    "seed",       "eta",
        "checkpoints",  "truncation",    "delta",   "lazy_seeds", "gradient", "simulation", "concentration"};
    for (const auto& [key, value] : doc.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) throw ConfigError(key, "unknown field");
    }

    ExperimentConfig c;
    if (!doc.contains("architecture")) throw ConfigError("architecture", "required");
    const json arch_doc = resolve_reference(doc.at("architecture"), "architecture", base_dir);
    try {
        c.architecture = architecture_from_json(arch_doc);
        c.architecture.validate();
    } catch (const StructuralError& e) {
        throw ConfigError("architecture", e.what());
    } catch (const json::exception& e) {
        throw ConfigError("architecture", e.what());
    }
    const std::size_t dim = c.architecture.input_dim;

    if (doc.contains("dataset")) {
        const json data_doc = resolve_reference(doc.at("dataset"), "dataset", base_dir);
        if (data_doc.contains("X") && data_doc.at("X").is_array()) {
            const auto& xs = data_doc.at("X");
            for (std::size_t i = 0; i < xs.size(); ++i) parse_input(xs[i], dim, "dataset.X[" + std::to_string(i) + "]");
        }
        c.dataset = dataset_from_json(data_doc);
    }

    if (doc.contains("feature_space")) {
        const auto& fs = doc.at("feature_space");
        if (!fs.is_array() || fs.empty()) throw ConfigError("feature_space", "expected a nonempty array of inputs");
        for (std::size_t i = 0; i < fs.size(); ++i) {
            const std::string path = "feature_space[" + std::to_string(i) + "]";
            Input x = parse_input(fs[i], dim, path);
            for (const auto& y : c.feature_space) {
                if (same_input(x, y)) throw ConfigError(path, "duplicate input");
            }
            c.feature_space.push_back(std::move(x));
        }
        if (c.dataset) {
            for (std::size_t i = 0; i < c.dataset->size(); ++i) {
                const bool found = std::any_of(c.feature_space.begin(), c.feature_space.end(),
                                               [&](const Input& y) { return same_input(c.dataset->X[i], y); });
                if (!found) throw ConfigError("dataset.X[" + std::to_string(i) + "]", "not in feature_space");
            }
        }
    } else if (c.dataset) {
        c.feature_space = c.dataset->X;
    } else {
        throw ConfigError("feature_space", "required when no dataset is given");
    }

    if (doc.contains("targets")) {
        const auto& t = doc.at("targets");
        if (t == "labels") {
            c.targets = TargetMode::Labels;
        } else if (t == "initial_output") {
            c.targets = TargetMode::InitialOutput;
        } else {
            throw ConfigError("targets", "expected \"labels\" or \"initial_output\"");
        }
    }

    if (doc.contains("samples")) {
        const auto& s = doc.at("samples");
        if (!s.is_object()) throw ConfigError("samples", "expected an object");
        for (const auto& [key, value] : s.items()) {
            static const std::vector<std::string> keys = {"calibration", "covariance", "kernel",
                                                          "w1",          "bootstrap",  "centering"};
            if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
                throw ConfigError("samples." + key, "unknown field");
            }
        }
        c.samples.calibration = positive_count(s, "calibration", c.samples.calibration, "samples.");
        c.samples.covariance = positive_count(s, "covariance", c.samples.covariance, "samples.");
        c.samples.kernel = positive_count(s, "kernel", c.samples.kernel, "samples.");
        c.samples.w1 = positive_count(s, "w1", c.samples.w1, "samples.");
        c.samples.bootstrap = positive_count(s, "bootstrap", c.samples.bootstrap, "samples.");
        if (s.contains("centering")) {
            const auto& v = s.at("centering");
            if (!v.is_number_integer() || v.get<long long>() < 0) {
                throw ConfigError("samples.centering", "expected a nonnegative integer");
            }
            c.samples.centering = v.get<std::size_t>();
        }
        if (c.samples.w1 > kMaxTransportSamples) {
            throw ConfigError("samples.w1", "exceeds " + std::to_string(kMaxTransportSamples));
        }
    }

    if (doc.contains("seed")) {
        const auto& s = doc.at("seed");
        if (!s.is_number_integer() || (!s.is_number_unsigned() && s.get<long long>() < 0)) {
            throw ConfigError("seed", "expected a nonnegative integer");
        }
        c.seed = s.get<std::uint64_t>();
    }
    c.eta = positive_number(doc, "eta", c.eta, "");
    c.truncation = positive_number(doc, "truncation", c.truncation, "");
    c.delta = number(doc, "delta", c.delta, "");
    if (!(c.delta > 0.0 && c.delta < 1.0)) throw ConfigError("delta", "must lie in (0, 1)");
    c.lazy_seeds = positive_count(doc, "lazy_seeds", c.lazy_seeds, "");

    if (doc.contains("checkpoints")) {
        const auto& cp = doc.at("checkpoints");
        if (!cp.is_object()) throw ConfigError("checkpoints", "expected an object");
        c.checkpoints.count = positive_count(cp, "count", c.checkpoints.count, "checkpoints.");
        c.checkpoints.t_first = positive_number(cp, "t_first", c.checkpoints.t_first, "checkpoints.");
        c.checkpoints.t_max = positive_number(cp, "t_max", c.checkpoints.t_max, "checkpoints.");
        if (c.checkpoints.t_max < c.checkpoints.t_first) throw ConfigError("checkpoints.t_max", "below t_first");
        if (cp.contains("include_infinity")) {
            if (!cp.at("include_infinity").is_boolean()) {
                throw ConfigError("checkpoints.include_infinity", "expected a boolean");
            }
            c.checkpoints.include_infinity = cp.at("include_infinity").get<bool>();
        }
    }

    if (doc.contains("gradient")) {
        const auto& g = doc.at("gradient");
        if (g == "adjoint") {
            c.gradient = GradientMethod::Adjoint;
        } else if (g == "parameter_shift") {
            c.gradient = GradientMethod::ParameterShift;
        } else {
            throw ConfigError("gradient", "expected \"parameter_shift\" or \"adjoint\"");
        }
    }
    if (doc.contains("simulation")) {
        const auto& s = doc.at("simulation");
        if (s == "auto") {
            c.simulation = SimulationMode::Auto;
        } else if (s == "dense") {
            c.simulation = SimulationMode::Dense;
        } else if (s == "cones") {
            c.simulation = SimulationMode::Cones;
        } else {
            throw ConfigError("simulation", "expected \"auto\", \"dense\" or \"cones\"");
        }
    }

    if (doc.contains("concentration")) {
        const auto& cc = doc.at("concentration");
        if (!cc.is_object() || !cc.contains("epsilons") || !cc.at("epsilons").is_array() ||
            cc.at("epsilons").empty()) {
            throw ConfigError("concentration.epsilons", "expected a nonempty array");
        }
        ConcentrationSettings s;
        for (std::size_t i = 0; i < cc.at("epsilons").size(); ++i) {
            const auto& e = cc.at("epsilons")[i];
            if (!e.is_number() || e.get<double>() < 0.0) {
                throw ConfigError("concentration.epsilons[" + std::to_string(i) + "]", "expected a nonnegative number");
            }
            s.epsilons.push_back(e.get<double>());
        }
        s.trials = positive_count(cc, "trials", s.trials, "concentration.");
        c.concentration = std::move(s);
    }
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    const json doc = read_json_file(path, "config");
    return parse_config(doc, path.parent_path());
}

json config_to_json(const ExperimentConfig& c) {
    json doc;
    doc["architecture"] = architecture_to_json(c.architecture);
    doc["feature_space"] = json::array();
    for (const auto& x : c.feature_space) doc["feature_space"].push_back(input_json(x));
    if (c.dataset) doc["dataset"] = dataset_to_json(*c.dataset);
    doc["targets"] = c.targets == TargetMode::Labels ? "labels" : "initial_output";
    doc["samples"] = {{"calibration", c.samples.calibration}, {"covariance", c.samples.covariance},
                      {"kernel", c.samples.kernel},           {"w1", c.samples.w1},
                      {"bootstrap", c.samples.bootstrap},     {"centering", c.samples.centering}};
    doc["seed"] = c.seed;
    doc["eta"] = c.eta;
    doc["checkpoints"] = {{"count", c.checkpoints.count},
                          {"t_first", c.checkpoints.t_first},
                          {"t_max", c.checkpoints.t_max},
                          {"include_infinity", c.checkpoints.include_infinity}};
    doc["truncation"] = c.truncation;
    doc["delta"] = c.delta;
    doc["lazy_seeds"] = c.lazy_seeds;
    doc["gradient"] = gradient_name(c.gradient);
    doc["simulation"] = simulation_name(c.simulation);
    if (c.concentration) {
        doc["concentration"] = {{"epsilons", c.concentration->epsilons}, {"trials", c.concentration->trials}};
    }
    return doc;
}

std::uint64_t stream_seed(const ExperimentConfig& config, SeedStream stream) {
    return derive_seed(config.seed, static_cast<std::uint64_t>(stream));
}

Model build_model(const ExperimentConfig& config) {
    Model model(config.architecture, config.feature_space);
    if (config.simulation == SimulationMode::Dense) model.set_use_cones(false);
    if (config.simulation == SimulationMode::Cones) model.set_use_cones(true);
    return model;
}

void CommandResult::write(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    for (const auto& [name, contents] : files) {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
        out << contents;
    }
}

CommandResult cmd_calibrate(const ExperimentConfig& c) {
    CommandResult r = start("calibrate", c);
    const Prepared p = prepare(c);
    add_calibration(r, c, p);
    json cones = lightcones_to_json(p.model.lightcones());
    cones["seed"] = c.seed;
    r.files["lightcones.json"] = dump(cones);
    AuditInputs in = audit_inputs(c, p, std::numeric_limits<double>::quiet_NaN(), 1.0);
    attach_centering(in, c, p.model, r);
    const auto audit = assumption_audit(in);
    r.summary["normalization_at_least_one"] = audit.holds("normalization_at_least_one");
    r.summary["normalization_upper"] = audit.holds("normalization_upper");
    if (in.has_centering) r.summary["centering_holds"] = audit.holds("centering");
    finish(r);
    return r;
}

CommandResult cmd_lightcones(const ExperimentConfig& c) {
    CommandResult r = start("lightcones", c);
    const auto table = build_lightcones(c.architecture);
    json cones = lightcones_to_json(table);
    cones["seed"] = c.seed;
    r.files["lightcones.json"] = dump(cones);
    r.summary["maxM"] = table.maxM;
    r.summary["maxN"] = table.maxN;
    r.summary["D"] = table.D;
    r.summary["Dtilde"] = table.Dtilde;
    finish(r);
    return r;
}

CommandResult cmd_init_gauss(const ExperimentConfig& c) {
    CommandResult r = start("init-gauss", c);
    const Prepared p = prepare(c);
    add_calibration(r, c, p);
    const auto& model = p.model;
    const auto idx = all_inputs(model);
    const std::size_t nbar = idx.size();

    const auto cov = covariance_init(model, idx, c.samples.covariance, stream_seed(c, SeedStream::Calibration));
    r.files["covariance.csv"] = kernel_csv(c, cov.matrix);
    const auto bound = init_bound(p.sizes, nbar, cov.matrix.entries);

    const auto S = static_cast<Eigen::Index>(c.samples.w1);
    Matrix model_samples(S, static_cast<Eigen::Index>(nbar));
    const std::uint64_t init_stream = stream_seed(c, SeedStream::Initialization);
    for (Eigen::Index s = 0; s < S; ++s) {
        model_samples.row(s) =
            model.eval_all(sample_init(model, init_seed(init_stream, static_cast<std::size_t>(s)))).transpose();
    }
    GaussianSpec gauss{Vector::Zero(static_cast<Eigen::Index>(nbar)), cov.matrix.entries};
    const Matrix gauss_samples = sample_gaussian(gauss, c.samples.w1, stream_seed(c, SeedStream::Gaussian));
    r.files["samples_model.csv"] = samples_csv(c, model_samples);
    r.files["samples_gaussian.csv"] = samples_csv(c, gauss_samples);

    const std::uint64_t boot = stream_seed(c, SeedStream::Bootstrap);
    const SampleSet a(model_samples), b(gauss_samples);
    const auto exact = w1_bootstrap(a, b, c.samples.bootstrap, boot);
    const auto trunc = w1_bootstrap(a, b, c.samples.bootstrap, derive_seed(boot, 1), c.truncation);

    AuditInputs in = audit_inputs(c, p, std::numeric_limits<double>::quiet_NaN(), cov.min_eigenvalue);
    attach_centering(in, c, model, r);
    r.report.audit = assumption_audit(in);
    const bool hyp = r.report.audit.holds("normalization_at_least_one") &&
                     r.report.audit.holds("covariance_invertible");
    const double vac = w1_vacuous_threshold(p.sizes, nbar);
    const double vac_trunc = std::min(c.truncation, vac);
    r.report.constants = to_json(bound);
    r.report.checks.push_back({"init_w1", exact.value, bound.headline, classify(exact.value, bound.headline, hyp, vac),
                               "W1 to N(0, K0bar) against the headline constant"});
    r.report.checks.push_back({"init_w1_tight", exact.value, bound.tight, classify(exact.value, bound.tight, hyp, vac),
                               "W1 against the pre-simplification constant"});
    r.report.checks.push_back({"init_w1_truncated", trunc.value, bound.headline,
                               classify(trunc.value, bound.headline, hyp, vac_trunc),
                               "truncated W1 never exceeds W1"});

    r.summary["w1"] = exact.value;
    r.summary["w1_bootstrap_se"] = exact.bootstrap_se;
    r.summary["w1_truncated"] = trunc.value;
    r.summary["w1_truncated_bootstrap_se"] = trunc.bootstrap_se;
    r.summary["truncation"] = c.truncation;
    r.summary["k0bar_min_eigenvalue"] = cov.min_eigenvalue;
    r.summary["init_bound"] = num(bound.headline);
    r.summary["init_bound_tight"] = num(bound.tight);
    finish(r);
    return r;
}

CommandResult cmd_train(const ExperimentConfig& c) {
    CommandResult r = start("train", c);
    const Dataset& data = c.require_dataset();
    const Prepared p = prepare(c);
    add_calibration(r, c, p);
    const auto& model = p.model;
    const auto idx = all_inputs(model);
    const std::size_t nbar = idx.size();
    const auto train = training_indices(model, data);

    const auto cov = covariance_init(model, idx, c.samples.covariance, stream_seed(c, SeedStream::Calibration));
    const auto kernel = analytic_ntk(model, idx, c.samples.kernel, stream_seed(c, SeedStream::Kernel), c.gradient);
    r.files["covariance.csv"] = kernel_csv(c, cov.matrix);
    r.files["kernel.csv"] = kernel_csv(c, kernel.mean);
    const Matrix& K = kernel.mean.entries;
    const double lambda = smallest_eigenvalue(submatrix(K, train));

    AuditInputs in = audit_inputs(c, p, lambda, cov.min_eigenvalue);
    attach_centering(in, c, model, r);
    r.report.audit = assumption_audit(in);
    const auto& audit = r.report.audit;
    const bool hyp = audit.holds("covariance_invertible") && audit.holds("kernel_invertible") &&
                     audit.holds("kernel_gap") && audit.holds("kernel_concentration");

    TrainedInputs ti;
    ti.nbar = nbar;
    ti.n = data.size();
    ti.y_norm = data.Y.norm();
    ti.lambda_min = lambda;
    ti.s = c.truncation;
    ti.sizes = p.sizes;
    const auto bound = trained_bound(ti, cov.matrix.entries);
    r.report.constants = to_json(bound);

    const auto grid = checkpoint_grid(c, lambda);
    const auto S = static_cast<Eigen::Index>(c.samples.w1);
    std::vector<Matrix> clouds(grid.size(), Matrix(S, static_cast<Eigen::Index>(nbar)));
    const std::uint64_t init_stream = stream_seed(c, SeedStream::Initialization);
    double loss_increase = -std::numeric_limits<double>::infinity();
    std::size_t rhs_evals = 0;
    for (Eigen::Index s = 0; s < S; ++s) {
        const auto theta0 = sample_init(model, init_seed(init_stream, static_cast<std::size_t>(s)));
        const auto traj = train_gradient_flow(model, theta0, data, c.eta, grid, flow_options(c));
        for (std::size_t k = 0; k < grid.size(); ++k) clouds[k].row(s) = traj.fbar[k].transpose();
        loss_increase = std::max(loss_increase, max_loss_increase(traj));
        rhs_evals += traj.stats.rhs_evals;
        if (s == 0) {
            std::ostringstream out;
            out << csv_header_comment(c);
            write_trajectory_csv(out, traj);
            r.files["trajectory_seed0.csv"] = out.str();
        }
    }

    const double vac = std::min(c.truncation, w1_vacuous_threshold(p.sizes, nbar));
    const std::uint64_t gauss_stream = stream_seed(c, SeedStream::Gaussian);
    const std::uint64_t boot_stream = stream_seed(c, SeedStream::Bootstrap);
    std::ostringstream table;
    table << csv_header_comment(c) << "checkpoint,time,observed,bootstrap_se,bound,status\n";
    json limits = json::array();
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const auto spec = limit_gaussian(cov.matrix.entries, K, train, data.Y, c.eta, grid[k]);
        const Matrix gauss = sample_gaussian(spec, c.samples.w1, derive_seed(gauss_stream, k));
        const auto est = w1_bootstrap(SampleSet(clouds[k]), SampleSet(gauss), c.samples.bootstrap,
                                      derive_seed(boot_stream, k), c.truncation);
        const auto status = classify(est.value, bound.gamma, hyp, vac);
        r.report.checks.push_back({"train_w1_t" + std::to_string(k), est.value, bound.gamma, status,
                                   "truncated W1 at t=" + format_number(grid[k])});
        table << k << ',' << format_number(grid[k]) << ',' << format_number(est.value) << ','
              << format_number(est.bootstrap_se) << ',' << format_number(bound.gamma) << ',' << status_name(status)
              << '\n';
        json lim = gaussian_to_json(spec);
        lim["t"] = grid[k];
        limits.push_back(lim);
    }
    r.files["train_w1.csv"] = table.str();
    r.files["limits.json"] = dump(json{{"seed", c.seed}, {"checkpoints", limits}});

    r.summary["lambda_min_K"] = lambda;
    r.summary["k0bar_min_eigenvalue"] = cov.min_eigenvalue;
    r.summary["checkpoints"] = grid;
    r.summary["max_loss_increase"] = num(loss_increase);
    r.summary["rhs_evals"] = rhs_evals;
    r.summary["trained_bound"] = num(bound.gamma);
    r.summary["hypotheses_met"] = hyp;
    finish(r);
    return r;
}

CommandResult cmd_lazy(const ExperimentConfig& c) {
    CommandResult r = start("lazy", c);
    const Prepared p = prepare(c);
    add_calibration(r, c, p);
    const auto& model = p.model;
    const auto train = training_indices(model, c.require_dataset());
    const auto kernel = analytic_ntk(model, train, c.samples.kernel, stream_seed(c, SeedStream::Kernel), c.gradient);
    const double lambda = smallest_eigenvalue(kernel.mean.entries);

    AuditInputs in = audit_inputs(c, p, lambda, 1.0);
    r.report.audit = assumption_audit(in);

    std::ostringstream table;
    table << csv_header_comment(c)
          << "seed_index,time,loss,loss_rhs,drift,drift_rhs,path_length,linear_gap,linear_gap_rhs,holds\n";
    const std::uint64_t lazy_stream = stream_seed(c, SeedStream::Lazy);
    std::size_t holding = 0;
    bool hypothesis = true;
    bool drift_within = true;
    double loss_increase = -std::numeric_limits<double>::infinity();
    double max_drift = 0.0;
    double gap_sum = 0.0;
    json per_seed = json::array();
    const auto grid = checkpoint_grid(c, lambda);
    for (std::size_t s = 0; s < c.lazy_seeds; ++s) {
        const auto theta0 = sample_init(model, init_seed(lazy_stream, s));
        const Dataset data = seed_dataset(c, model, theta0, train);
        LazyInputs li;
        li.n = data.size();
        li.y_norm = data.Y.norm();
        li.lambda_min = lambda;
        li.delta = c.delta;
        li.sizes = p.sizes;
        const auto constants = lazy_constants(li);
        if (s == 0) r.report.constants = to_json(constants);
        const auto traj = train_gradient_flow(model, theta0, data, c.eta, grid, flow_options(c));
        const auto rep = lazy_metrics(traj, model, data, c.eta, constants, c.gradient);
        hypothesis = hypothesis && rep.hypothesis_holds;
        if (rep.all_hold) ++holding;
        loss_increase = std::max(loss_increase, max_loss_increase(traj));
        gap_sum += rep.max_linear_gap;
        for (const auto& row : rep.rows) {
            const bool ok = row.loss <= row.loss_rhs && row.drift <= row.drift_rhs && row.linear_gap <= rep.grad3_rhs;
            max_drift = std::max(max_drift, row.drift);
            drift_within = drift_within && row.drift <= row.path_length + 1e-12;
            table << s << ',' << format_number(row.t) << ',' << format_number(row.loss) << ','
                  << format_number(row.loss_rhs) << ',' << format_number(row.drift) << ','
                  << format_number(row.drift_rhs) << ',' << format_number(row.path_length) << ','
                  << format_number(row.linear_gap) << ',' << format_number(rep.grad3_rhs) << ','
                  << (ok ? "true" : "false") << '\n';
        }
        json entry = lazy_to_json(rep);
        entry["seed_index"] = s;
        per_seed.push_back(entry);
    }
    r.files["lazy.csv"] = table.str();
    r.files["lazy_seeds.json"] = dump(json{{"seed", c.seed}, {"seeds", per_seed}});

    const double seeds = static_cast<double>(c.lazy_seeds);
    const double failure_rate = 1.0 - static_cast<double>(holding) / seeds;
    const double allowed = c.delta + 3.0 * std::sqrt(c.delta * (1.0 - c.delta) / seeds);
    r.report.checks.push_back({"lazy_failure_rate", failure_rate, allowed,
                               classify(failure_rate, allowed, hypothesis, 1.0),
                               "fraction of seeds violating a lazy-training inequality"});

    r.summary["lambda_min_K"] = lambda;
    r.summary["checkpoints"] = grid;
    r.summary["fraction_holding"] = static_cast<double>(holding) / seeds;
    r.summary["hypothesis_holds"] = hypothesis;
    r.summary["max_drift"] = max_drift;
    r.summary["mean_max_linear_gap"] = num(gap_sum / seeds);
    r.summary["max_loss_increase"] = num(loss_increase);
    r.summary["drift_within_path_length"] = drift_within;
    finish(r);
    return r;
}

CommandResult cmd_bounds_report(const ExperimentConfig& c) {
    CommandResult r = start("bounds-report", c);
    const Prepared p = prepare(c);
    add_calibration(r, c, p);
    const auto& model = p.model;
    const auto idx = all_inputs(model);
    const std::size_t nbar = idx.size();
    const auto cov = covariance_init(model, idx, c.samples.covariance, stream_seed(c, SeedStream::Calibration));
    const auto kernel = analytic_ntk(model, idx, c.samples.kernel, stream_seed(c, SeedStream::Kernel), c.gradient);
    r.files["covariance.csv"] = kernel_csv(c, cov.matrix);
    r.files["kernel.csv"] = kernel_csv(c, kernel.mean);

    double lambda = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::size_t> train;
    if (c.dataset) {
        train = training_indices(model, *c.dataset);
        lambda = smallest_eigenvalue(submatrix(kernel.mean.entries, train));
    }
    AuditInputs in = audit_inputs(c, p, lambda, cov.min_eigenvalue);
    attach_centering(in, c, model, r);
    r.report.audit = assumption_audit(in);

    json constants;
    constants["sizes"] = sizes_json(c, p);
    constants["ntk_entry_bound"] = ntk_entry_bound(model);
    constants["ntk_lipschitz_constant"] = ntk_lipschitz_constant(model);
    constants["stein_constant"] = stein_constant(static_cast<double>(nbar));
    if (!cov.singular) {
        constants["init"] = to_json(init_bound(p.sizes, nbar, cov.matrix.entries));
    }
    if (c.dataset) {
        LazyInputs li;
        li.n = c.dataset->size();
        li.y_norm = c.dataset->Y.norm();
        li.lambda_min = lambda;
        li.delta = c.delta;
        li.sizes = p.sizes;
        constants["lazy"] = to_json(lazy_constants(li));
        if (!cov.singular) {
            TrainedInputs ti;
            ti.nbar = nbar;
            ti.n = li.n;
            ti.y_norm = li.y_norm;
            ti.lambda_min = lambda;
            ti.s = c.truncation;
            ti.sizes = p.sizes;
            constants["trained"] = to_json(trained_bound(ti, cov.matrix.entries));
        }
    }

    if (c.concentration) {
        const auto rep = concentration_check(model, kernel.mean, c.concentration->epsilons, c.concentration->trials,
                                             stream_seed(c, SeedStream::Concentration));
        for (std::size_t i = 0; i < rep.rows.size(); ++i) {
            const auto& row = rep.rows[i];
            const double allowed = row.rhs + row.slack;
            BoundStatus status = BoundStatus::Holds;
            if (!row.consistent) {
                status = BoundStatus::Violated;
            } else if (row.vacuous) {
                status = BoundStatus::Vacuous;
            }
            r.report.checks.push_back({"concentration_eps" + std::to_string(i), row.frequency, allowed, status,
                                       "exceedance frequency at epsilon=" + format_number(row.epsilon)});
        }
        r.files["concentration.json"] = dump(concentration_to_json(rep));
        r.summary["concentration_consistent"] = rep.consistent();
    }
    r.report.constants = constants;
    r.summary["lambda_min_K"] = num(lambda);
    r.summary["k0bar_min_eigenvalue"] = cov.min_eigenvalue;
    bool all_hold = true;
    for (const auto& a : r.report.audit.checks) all_hold = all_hold && a.holds;
    r.summary["assumptions_hold"] = all_hold;
    finish(r);
    if (!all_hold && r.exit_code == 0) {
        r.exit_code = kExitHypothesisUnmet;
        r.summary["exit_code"] = r.exit_code;
        r.files["summary.json"] = dump(r.summary);
        r.files["summary.txt"] = summary_text(r);
    }
    return r;
}

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names = {"calibrate", "lightcones", "init-gauss",
                                                   "train",     "lazy",       "bounds-report"};
    return names;
}

CommandResult run_command(const std::string& name, const ExperimentConfig& config) {
    if (name == "calibrate") return cmd_calibrate(config);
    if (name == "lightcones") return cmd_lightcones(config);
    if (name == "init-gauss") return cmd_init_gauss(config);
    if (name == "train") return cmd_train(config);
    if (name == "lazy") return cmd_lazy(config);
    if (name == "bounds-report") return cmd_bounds_report(config);
    throw ConfigError("command", "unknown command '" + name + "'");
}

}  // namespace qnnlab
