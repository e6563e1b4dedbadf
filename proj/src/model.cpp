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

#include "qnnlab/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qnnlab/errors.hpp"
#include "qnnlab/rng.hpp"

namespace qnnlab {

namespace {

constexpr double kShift = std::numbers::pi / 4.0;
constexpr double kInputMatchTol = 1e-12;

bool same_input(const Input& a, const Input& b) {
    return a.size() == b.size() && (a.size() == 0 || (a - b).cwiseAbs().maxCoeff() <= kInputMatchTol);
}

}  // namespace

void Dataset::validate_structure() const {
    if (X.empty()) {
        throw PreconditionError("dataset needs at least one example");
    }
    if (static_cast<std::size_t>(Y.size()) != X.size()) {
        throw StructuralError("dataset has " + std::to_string(X.size()) + " inputs but " +
                              std::to_string(Y.size()) + " labels");
    }
    if (!Y.allFinite()) {
        throw PreconditionError("labels must be finite");
    }
    for (std::size_t i = 0; i < X.size(); ++i) {
        for (std::size_t j = i + 1; j < X.size(); ++j) {
            if (same_input(X[i], X[j])) {
                throw PreconditionError("training inputs " + std::to_string(i) + " and " +
                                        std::to_string(j) + " coincide");
            }
        }
    }
}

void Dataset::validate() const {
    validate_structure();
    for (Eigen::Index i = 0; i < Y.size(); ++i) {
        if (Y(i) != 1.0 && Y(i) != -1.0) {
            throw PreconditionError("label " + std::to_string(i) + " is not +1 or -1");
        }
    }
}

Dataset dataset_from_json(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("X") || !doc.contains("Y")) {
        throw ConfigError("dataset", "expected an object with X and Y");
    }
    Dataset data;
    try {
        for (const auto& row : doc.at("X")) {
            const auto values = row.get<std::vector<double>>();
            data.X.push_back(Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size())));
        }
        const auto labels = doc.at("Y").get<std::vector<double>>();
        data.Y = Eigen::Map<const Vector>(labels.data(), static_cast<Eigen::Index>(labels.size()));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("dataset", e.what());
    }
    try {
        data.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError("dataset", e.what());
    }
    return data;
}

nlohmann::json dataset_to_json(const Dataset& data) {
    nlohmann::json doc;
    doc["X"] = nlohmann::json::array();
    for (const auto& x : data.X) {
        doc["X"].push_back(std::vector<double>(x.data(), x.data() + x.size()));
    }
    doc["Y"] = std::vector<double>(data.Y.data(), data.Y.data() + data.Y.size());
    return doc;
}

Model::Model(ArchitectureSpec arch, std::vector<Input> feature_space, double normalization)
    : arch_(std::move(arch)), inputs_(std::move(feature_space)) {
    arch_.validate();
    if (inputs_.empty()) {
        throw PreconditionError("feature space needs at least one input");
    }
    for (std::size_t i = 0; i < inputs_.size(); ++i) {
        angles_.push_back(arch_.encoding_angles(inputs_[i]));
    }
    table_ = build_lightcones(arch_);
    full_ = compile_full(arch_);
    double cone_cost = 0.0;
    for (std::size_t k = 0; k < arch_.num_qubits; ++k) {
        cones_.push_back(compile_cone(arch_, table_, k));
        cone_cost += cones_.back().cost();
    }
    use_cones_ = cone_cost < full_.cost();
    if (!(normalization > 0.0) || !std::isfinite(normalization)) {
        throw PreconditionError("normalization must be positive and finite");
    }
    normalization_ = normalization;
}

void Model::set_normalization(double n_m) {
    if (!(n_m > 0.0) || !std::isfinite(n_m)) {
        throw PreconditionError("normalization must be positive and finite");
    }
    normalization_ = n_m;
    calibrated_ = true;
}

std::size_t Model::input_index(const Input& x) const {
    for (std::size_t i = 0; i < inputs_.size(); ++i) {
        if (same_input(inputs_[i], x)) {
            return i;
        }
    }
    throw UnknownInput("input is not a member of the model's feature space");
}

void Model::check_theta(const ParameterVector& theta) const {
    if (theta.size() != num_params()) {
        throw StructuralError("parameter vector has length " + std::to_string(theta.size()) +
                              ", expected " + std::to_string(num_params()));
    }
}

Vector Model::eval_local(const ParameterVector& theta, std::size_t input) const {
    check_theta(theta);
    const Vector& angles = angles_.at(input);
    Vector out(static_cast<Eigen::Index>(arch_.num_qubits));
    if (use_cones_) {
        for (std::size_t k = 0; k < cones_.size(); ++k) {
            out(static_cast<Eigen::Index>(k)) = cones_[k].measure(theta.values(), angles).front();
        }
    } else {
        const auto values = full_.measure(theta.values(), angles);
        for (std::size_t k = 0; k < values.size(); ++k) {
            out(static_cast<Eigen::Index>(k)) = values[k];
        }
    }
    return out;
}

double Model::eval_f(const ParameterVector& theta, std::size_t input) const {
    return eval_local(theta, input).sum() / normalization_;
}

double Model::eval_f(const ParameterVector& theta, const Input& x) const {
    return eval_f(theta, input_index(x));
}

Vector Model::eval_all(const ParameterVector& theta) const {
    Vector out(static_cast<Eigen::Index>(inputs_.size()));
    for (std::size_t i = 0; i < inputs_.size(); ++i) {
        out(static_cast<Eigen::Index>(i)) = eval_f(theta, i);
    }
    return out;
}

Vector Model::grad_f(const ParameterVector& theta, const Input& x, GradientMethod method) const {
    return grad_f(theta, input_index(x), method);
}

Vector Model::grad_f(const ParameterVector& theta, std::size_t input, GradientMethod method) const {
    check_theta(theta);
    const Vector& angles = angles_.at(input);
    const std::size_t P = num_params();
    Vector grad = Vector::Zero(static_cast<Eigen::Index>(P));
    if (method == GradientMethod::Adjoint) {
        if (use_cones_) {
            for (const auto& cone : cones_) {
                cone.adjoint_gradient(theta.values(), angles, grad);
            }
        } else {
            full_.adjoint_gradient(theta.values(), angles, grad);
        }
        return grad / normalization_;
    }
    Vector shifted = theta.values();
    for (std::size_t i = 0; i < P; ++i) {
        const auto idx = static_cast<Eigen::Index>(i);
        const double base = shifted(idx);
        double plus = 0.0;
        double minus = 0.0;
        if (use_cones_) {
            for (std::size_t k : table_.M[i]) {
                shifted(idx) = base + kShift;
                plus += cones_[k].measure_sum(shifted, angles);
                shifted(idx) = base - kShift;
                minus += cones_[k].measure_sum(shifted, angles);
            }
        } else {
            shifted(idx) = base + kShift;
            plus = full_.measure_sum(shifted, angles);
            shifted(idx) = base - kShift;
            minus = full_.measure_sum(shifted, angles);
        }
        shifted(idx) = base;
        grad(idx) = (plus - minus) / normalization_;
    }
    return grad;
}

Matrix Model::grad_local(const ParameterVector& theta, std::size_t input) const {
    check_theta(theta);
    const Vector& angles = angles_.at(input);
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(arch_.num_qubits), static_cast<Eigen::Index>(num_params()));
    Vector shifted = theta.values();
    for (std::size_t k = 0; k < cones_.size(); ++k) {
        for (std::size_t i : table_.N[k]) {
            const auto idx = static_cast<Eigen::Index>(i);
            const double base = shifted(idx);
            shifted(idx) = base + kShift;
            const double plus = cones_[k].measure_sum(shifted, angles);
            shifted(idx) = base - kShift;
            const double minus = cones_[k].measure_sum(shifted, angles);
            shifted(idx) = base;
            out(static_cast<Eigen::Index>(k), idx) = plus - minus;
        }
    }
    return out;
}

std::uint64_t init_seed(std::uint64_t seed, std::size_t s) { return derive_seed(seed, s); }

ParameterVector sample_init(const Model& model, std::uint64_t seed) {
    Rng rng(seed);
    Vector v(static_cast<Eigen::Index>(model.num_params()));
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        v(i) = rng.uniform(0.0, std::numbers::pi);
    }
    return ParameterVector(std::move(v));
}

CalibrationResult calibrate_normalization(Model& model, std::size_t samples, std::uint64_t seed) {
    if (samples < 100) {
        throw PreconditionError("calibration needs at least 100 samples");
    }
    const std::size_t nbar = model.feature_space().size();
    Vector sum = Vector::Zero(static_cast<Eigen::Index>(nbar));
    Vector sum_sq = Vector::Zero(static_cast<Eigen::Index>(nbar));
    for (std::size_t s = 0; s < samples; ++s) {
        const auto theta = sample_init(model, init_seed(seed, s));
        for (std::size_t x = 0; x < nbar; ++x) {
            const double total = model.eval_local(theta, x).sum();
            const double sq = total * total;
            sum(static_cast<Eigen::Index>(x)) += sq;
            sum_sq(static_cast<Eigen::Index>(x)) += sq * sq;
        }
    }
    CalibrationResult out;
    out.samples = samples;
    out.seed = seed;
    const double S = static_cast<double>(samples);
    out.second_moments = sum / S;
    Eigen::Index best = 0;
    const double top = out.second_moments.maxCoeff(&best);
    out.argmax_input = static_cast<std::size_t>(best);
    if (!(top > 1e-300)) {
        throw CalibrationError("generated function is identically zero on every sampled initialization");
    }
    const double mean = top;
    const double var = std::max(0.0, sum_sq(best) / S - mean * mean) * S / (S - 1.0);
    out.normalization = std::sqrt(mean);
    out.standard_error = std::sqrt(var / S) / (2.0 * out.normalization);
    model.set_normalization(out.normalization);
    return out;
}

CenteringReport check_centering(const Model& model, std::size_t samples, std::uint64_t seed) {
    if (samples == 0) {
        throw PreconditionError("centering check needs at least one sample");
    }
    const std::size_t m = model.num_qubits();
    const std::size_t nbar = model.feature_space().size();
    CenteringReport rep;
    rep.samples = samples;
    rep.tolerance = 4.0 / std::sqrt(static_cast<double>(samples));
    rep.means = Matrix::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(nbar));
    for (std::size_t s = 0; s < samples; ++s) {
        const auto theta = sample_init(model, init_seed(seed, s));
        for (std::size_t x = 0; x < nbar; ++x) {
            rep.means.col(static_cast<Eigen::Index>(x)) += model.eval_local(theta, x);
        }
    }
    rep.means /= static_cast<double>(samples);
    Eigen::Index row = 0;
    Eigen::Index col = 0;
    rep.max_abs_mean = rep.means.cwiseAbs().maxCoeff(&row, &col);
    rep.worst_qubit = static_cast<std::size_t>(row);
    rep.worst_input = static_cast<std::size_t>(col);
    rep.passed = rep.max_abs_mean <= rep.tolerance;
    return rep;
}

nlohmann::json calibration_to_json(const CalibrationResult& result) {
    return {{"N_m", result.normalization},
            {"N_m_stderr", result.standard_error},
            {"second_moments", std::vector<double>(result.second_moments.data(),
                                                   result.second_moments.data() + result.second_moments.size())},
            {"argmax_input", result.argmax_input},
            {"samples", result.samples},
            {"seed", result.seed}};
}

nlohmann::json centering_to_json(const CenteringReport& report) {
    nlohmann::json means = nlohmann::json::array();
    for (Eigen::Index k = 0; k < report.means.rows(); ++k) {
        std::vector<double> row(static_cast<std::size_t>(report.means.cols()));
        for (Eigen::Index x = 0; x < report.means.cols(); ++x) row[static_cast<std::size_t>(x)] = report.means(k, x);
        means.push_back(row);
    }
    return {{"passed", report.passed},
            {"tolerance", report.tolerance},
            {"max_abs_mean", report.max_abs_mean},
            {"worst_qubit", report.worst_qubit},
            {"worst_input", report.worst_input},
            {"samples", report.samples},
            {"means", means}};
}

}  // namespace qnnlab
