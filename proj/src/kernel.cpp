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

#include "qnnlab/kernel.hpp"

#include <cmath>
#include <cstdio>

#include "qnnlab/errors.hpp"

namespace qnnlab {

namespace {

void check_inputs(const Model& model, const std::vector<std::size_t>& inputs) {
    if (inputs.empty()) {
        throw PreconditionError("kernel needs at least one input");
    }
    for (std::size_t i : inputs) {
        if (i >= model.feature_space().size()) {
            throw UnknownInput("input index " + std::to_string(i) + " is outside the feature space");
        }
    }
}

Matrix standard_error_from(const Matrix& sum, const Matrix& sum_sq, std::size_t samples) {
    const double S = static_cast<double>(samples);
    if (samples < 2) {
        return Matrix::Zero(sum.rows(), sum.cols());
    }
    const Matrix mean = sum / S;
    const Matrix var = ((sum_sq / S) - mean.cwiseProduct(mean)).cwiseMax(0.0) * (S / (S - 1.0));
    return (var / S).cwiseSqrt();
}

}  // namespace

Matrix gradient_matrix(const Model& model, const ParameterVector& theta, const std::vector<std::size_t>& inputs,
                       GradientMethod method) {
    check_inputs(model, inputs);
    Matrix g(static_cast<Eigen::Index>(model.num_params()), static_cast<Eigen::Index>(inputs.size()));
    for (std::size_t j = 0; j < inputs.size(); ++j) {
        g.col(static_cast<Eigen::Index>(j)) = model.grad_f(theta, inputs[j], method);
    }
    return g;
}

KernelMatrix empirical_ntk(const Model& model, const ParameterVector& theta, const std::vector<std::size_t>& inputs,
                           GradientMethod method) {
    const Matrix g = gradient_matrix(model, theta, inputs, method);
    KernelMatrix k;
    k.entries = g.transpose() * g;
    k.inputs = inputs;
    k.samples = 0;
    return k;
}

AnalyticNtk analytic_ntk(const Model& model, const std::vector<std::size_t>& inputs, std::size_t samples,
                         std::uint64_t seed, GradientMethod method) {
    check_inputs(model, inputs);
    if (samples == 0) {
        throw PreconditionError("analytic kernel needs at least one sample");
    }
    const auto n = static_cast<Eigen::Index>(inputs.size());
    Matrix sum = Matrix::Zero(n, n);
    Matrix sum_sq = Matrix::Zero(n, n);
    for (std::size_t s = 0; s < samples; ++s) {
        const auto theta = sample_init(model, init_seed(seed, s));
        const Matrix k = empirical_ntk(model, theta, inputs, method).entries;
        sum += k;
        sum_sq += k.cwiseProduct(k);
    }
    AnalyticNtk out;
    out.mean.entries = sum / static_cast<double>(samples);
    out.mean.inputs = inputs;
    out.mean.samples = samples;
    out.standard_error = standard_error_from(sum, sum_sq, samples);
    return out;
}

CovarianceEstimate covariance_init(const Model& model, const std::vector<std::size_t>& inputs, std::size_t samples,
                                   std::uint64_t seed) {
    check_inputs(model, inputs);
    if (samples == 0) {
        throw PreconditionError("covariance estimate needs at least one sample");
    }
    const auto n = static_cast<Eigen::Index>(inputs.size());
    Matrix sum = Matrix::Zero(n, n);
    Matrix sum_sq = Matrix::Zero(n, n);
    Vector f(n);
    for (std::size_t s = 0; s < samples; ++s) {
        const auto theta = sample_init(model, init_seed(seed, s));
        for (Eigen::Index j = 0; j < n; ++j) {
            f(j) = model.eval_f(theta, inputs[static_cast<std::size_t>(j)]);
        }
        const Matrix outer = f * f.transpose();
        sum += outer;
        sum_sq += outer.cwiseProduct(outer);
    }
    CovarianceEstimate out;
    out.matrix.entries = sum / static_cast<double>(samples);
    out.matrix.inputs = inputs;
    out.matrix.samples = samples;
    out.standard_error = standard_error_from(sum, sum_sq, samples);
    out.min_eigenvalue = qnnlab::min_eigenvalue(out.matrix.entries);
    out.singular = out.min_eigenvalue <= kSingularEigenvalue;
    return out;
}

double ntk_entry_bound(const Model& model) {
    const auto& t = model.lightcones();
    const double Lm = static_cast<double>(model.num_params());
    const double M = static_cast<double>(t.maxM);
    const double N = model.normalization();
    return 4.0 * Lm * M * M / (N * N);
}

double ntk_lipschitz_constant(const Model& model) {
    const auto& t = model.lightcones();
    const double Lm = static_cast<double>(model.num_params());
    const double M = static_cast<double>(t.maxM);
    const double Nc = static_cast<double>(t.maxN);
    const double N = model.normalization();
    return 16.0 * Lm * M * M * Nc / (N * N);
}

double concentration_rhs(const Model& model, double epsilon) {
    const auto& t = model.lightcones();
    const double Lm = static_cast<double>(model.num_params());
    const double M = static_cast<double>(t.maxM);
    const double Nc = static_cast<double>(t.maxN);
    const double N = model.normalization();
    const double exponent = std::pow(N, 4) * epsilon * epsilon / (256.0 * Lm * std::pow(M, 4) * Nc * Nc);
    return std::exp(-exponent);
}

bool ConcentrationReport::consistent() const {
    for (const auto& row : rows) {
        if (!row.consistent) return false;
    }
    return true;
}

ConcentrationReport concentration_check(const Model& model, const KernelMatrix& analytic,
                                        const std::vector<double>& epsilons, std::size_t trials,
                                        std::uint64_t seed) {
    if (trials == 0) {
        throw PreconditionError("concentration check needs at least one trial");
    }
    const auto n = static_cast<Eigen::Index>(analytic.size());
    std::vector<Eigen::MatrixXi> counts(epsilons.size(), Eigen::MatrixXi::Zero(n, n));
    ConcentrationReport rep;
    rep.trials = trials;
    rep.seed = seed;
    for (std::size_t s = 0; s < trials; ++s) {
        const auto theta = sample_init(model, init_seed(seed, s));
        const Matrix dev = (empirical_ntk(model, theta, analytic.inputs).entries - analytic.entries).cwiseAbs();
        rep.max_deviation = std::max(rep.max_deviation, dev.maxCoeff());
        for (std::size_t e = 0; e < epsilons.size(); ++e) {
            counts[e] += (dev.array() >= epsilons[e]).cast<int>().matrix();
        }
    }
    const double T = static_cast<double>(trials);
    for (std::size_t e = 0; e < epsilons.size(); ++e) {
        ConcentrationRow row;
        row.epsilon = epsilons[e];
        Eigen::Index r = 0;
        Eigen::Index c = 0;
        row.frequency = static_cast<double>(counts[e].maxCoeff(&r, &c)) / T;
        row.worst_row = static_cast<std::size_t>(r);
        row.worst_col = static_cast<std::size_t>(c);
        row.rhs = concentration_rhs(model, epsilons[e]);
        row.slack = 3.0 * std::sqrt(row.rhs * (1.0 - row.rhs) / T);
        row.vacuous = row.rhs + row.slack >= 1.0;
        row.consistent = row.vacuous || row.frequency <= row.rhs + row.slack;
        rep.rows.push_back(row);
    }
    return rep;
}

double min_eigenvalue(const KernelMatrix& k) { return qnnlab::min_eigenvalue(k.entries); }

void write_kernel_csv(std::ostream& out, const KernelMatrix& k) {
    out << "input";
    for (std::size_t i : k.inputs) {
        out << ",x" << i;
    }
    out << '\n';
    char buf[32];
    for (Eigen::Index r = 0; r < k.entries.rows(); ++r) {
        out << 'x' << k.inputs[static_cast<std::size_t>(r)];
        for (Eigen::Index c = 0; c < k.entries.cols(); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", k.entries(r, c));
            out << ',' << buf;
        }
        out << '\n';
    }
}

nlohmann::json concentration_to_json(const ConcentrationReport& report) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : report.rows) {
        rows.push_back({{"epsilon", r.epsilon},
                        {"frequency", r.frequency},
                        {"entry", {r.worst_row, r.worst_col}},
                        {"rhs", r.rhs},
                        {"slack", r.slack},
                        {"vacuous", r.vacuous},
                        {"consistent", r.consistent}});
    }
    return {{"trials", report.trials},
            {"seed", report.seed},
            {"max_deviation", report.max_deviation},
            {"consistent", report.consistent()},
            {"rows", rows}};
}

}  // namespace qnnlab
