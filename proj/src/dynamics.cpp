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

#include "qnnlab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>

#include "qnnlab/errors.hpp"
#include "qnnlab/kernel.hpp"
#include "qnnlab/rng.hpp"

namespace qnnlab {

namespace {

// (1 - exp(-a lambda)) / lambda, continuous at lambda = 0.
double flow_filter(double lambda, double a) {
    if (lambda == 0.0) return a;
    return -std::expm1(-a * lambda) / lambda;
}

Matrix select_rows(const Matrix& m, const std::vector<std::size_t>& rows) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
    return out;
}

Matrix select_cols(const Matrix& m, const std::vector<std::size_t>& cols) {
    Matrix out(m.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = m.col(static_cast<Eigen::Index>(cols[j]));
    return out;
}

void write_number(std::ostream& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
}

}  // namespace

std::vector<std::size_t> training_indices(const Model& model, const Dataset& data) {
    data.validate_structure();
    std::vector<std::size_t> idx;
    idx.reserve(data.size());
    for (const auto& x : data.X) idx.push_back(model.input_index(x));
    return idx;
}

double squared_loss(const Vector& F, const Vector& Y) { return 0.5 * (F - Y).squaredNorm(); }

std::vector<double> geometric_checkpoints(double t_first, double t_max, std::size_t count) {
    if (!(t_first > 0.0) || !(t_max >= t_first) || count == 0) {
        throw PreconditionError("geometric checkpoints need 0 < t_first <= t_max and count >= 1");
    }
    std::vector<double> out{0.0};
    if (count == 1) {
        out.push_back(t_max);
        return out;
    }
    const double ratio = std::pow(t_max / t_first, 1.0 / static_cast<double>(count - 1));
    double t = t_first;
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back(i + 1 == count ? t_max : t);
        t *= ratio;
    }
    return out;
}

FlowTrajectory train_gradient_flow(const Model& model, const ParameterVector& theta0, const Dataset& data,
                                   double eta, const std::vector<double>& checkpoints, const FlowOptions& options) {
    if (!(eta >= 0.0)) {
        throw PreconditionError("learning rate must be nonnegative");
    }
    if (theta0.size() != model.num_params()) {
        throw StructuralError("initial parameters have the wrong length");
    }
    const auto train = training_indices(model, data);
    const auto P = static_cast<Eigen::Index>(model.num_params());

    // State: Theta followed by the accumulated path length.
    auto rhs = [&](double, const Vector& y, Vector& dy) {
        const ParameterVector theta(y.head(P));
        Vector dtheta = Vector::Zero(P);
        for (std::size_t i = 0; i < train.size(); ++i) {
            const double residual = model.eval_f(theta, train[i]) - data.Y(static_cast<Eigen::Index>(i));
            if (residual != 0.0) {
                dtheta -= eta * residual * model.grad_f(theta, train[i], options.gradient);
            }
        }
        dy.resize(P + 1);
        dy.head(P) = dtheta;
        dy(P) = P > 0 ? dtheta.cwiseAbs().maxCoeff() : 0.0;
    };

    FlowTrajectory traj;
    Vector y(P + 1);
    y.head(P) = theta0.values();
    y(P) = 0.0;
    auto observe = [&](std::size_t, double t, const Vector& state) {
        const ParameterVector theta(state.head(P));
        const Vector fbar = model.eval_all(theta);
        Vector F(static_cast<Eigen::Index>(train.size()));
        for (std::size_t i = 0; i < train.size(); ++i) F(static_cast<Eigen::Index>(i)) = fbar(static_cast<Eigen::Index>(train[i]));
        traj.times.push_back(t);
        traj.thetas.push_back(theta.values());
        traj.loss.push_back(squared_loss(F, data.Y));
        traj.drift.push_back(P > 0 ? (theta.values() - theta0.values()).cwiseAbs().maxCoeff() : 0.0);
        traj.path_length.push_back(state(P));
        traj.F.push_back(std::move(F));
        traj.fbar.push_back(fbar);
    };
    traj.stats = integrate_dopri5(rhs, 0.0, y, checkpoints, observe, options.ode);
    return traj;
}

LinearizedFlow::LinearizedFlow(const Model& model, const ParameterVector& theta0, const Dataset& data, double eta,
                               GradientMethod method)
    : train_(training_indices(model, data)), y_(data.Y), eta_(eta) {
    const std::size_t nbar = model.feature_space().size();
    std::vector<std::size_t> all(nbar);
    for (std::size_t i = 0; i < nbar; ++i) all[i] = i;
    const Matrix g_all = gradient_matrix(model, theta0, all, method);
    const Matrix g_train = select_cols(g_all, train_);
    k_cross_ = g_all.transpose() * g_train;
    k_train_ = g_train.transpose() * g_train;
    eig_ = jacobi_eigen(k_train_);
    if (eig_.values(0) <= kSingularEigenvalue) {
        throw AssumptionFailure("empirical kernel on the training inputs is singular (min eigenvalue " +
                                std::to_string(eig_.values(0)) + ")");
    }
    f0_ = model.eval_all(theta0);
    Vector f0_train(static_cast<Eigen::Index>(train_.size()));
    for (std::size_t i = 0; i < train_.size(); ++i) f0_train(static_cast<Eigen::Index>(i)) = f0_(static_cast<Eigen::Index>(train_[i]));
    residual0_ = f0_train - y_;
}

Vector LinearizedFlow::predict_all(double t) const {
    const double a = eta_ * t;
    const Matrix filter = apply_spectral(eig_, [a](double lambda) { return flow_filter(lambda, a); });
    return f0_ - k_cross_ * (filter * residual0_);
}

double LinearizedFlow::predict(double t, std::size_t input) const {
    return predict_all(t)(static_cast<Eigen::Index>(input));
}

Vector LinearizedFlow::predict_train(double t) const {
    const Vector all = predict_all(t);
    Vector out(static_cast<Eigen::Index>(train_.size()));
    for (std::size_t i = 0; i < train_.size(); ++i) out(static_cast<Eigen::Index>(i)) = all(static_cast<Eigen::Index>(train_[i]));
    return out;
}

std::vector<Vector> LinearizedFlow::integrate(const std::vector<double>& checkpoints, const OdeOptions& options) const {
    auto rhs = [&](double, const Vector& f, Vector& df) {
        Vector residual(static_cast<Eigen::Index>(train_.size()));
        for (std::size_t i = 0; i < train_.size(); ++i) {
            residual(static_cast<Eigen::Index>(i)) = f(static_cast<Eigen::Index>(train_[i])) - y_(static_cast<Eigen::Index>(i));
        }
        df = -eta_ * (k_cross_ * residual);
    };
    std::vector<Vector> out;
    Vector f = f0_;
    integrate_dopri5(rhs, 0.0, f, checkpoints, [&](std::size_t, double, const Vector& v) { out.push_back(v); },
                     options);
    return out;
}

double linear_flow_closed_form(const Model& model, const ParameterVector& theta0, const Dataset& data, double eta,
                               double t, const Input& x) {
    const std::size_t idx = model.input_index(x);
    return LinearizedFlow(model, theta0, data, eta).predict(t, idx);
}

GaussianSpec limit_gaussian(const Matrix& k0bar, const Matrix& k_analytic, const std::vector<std::size_t>& train,
                            const Vector& Y, double eta, double t) {
    const auto nbar = k0bar.rows();
    if (k0bar.cols() != nbar || k_analytic.rows() != nbar || k_analytic.cols() != nbar) {
        throw StructuralError("limit_gaussian: kernels must be square over the same inputs");
    }
    if (train.empty() || static_cast<std::size_t>(Y.size()) != train.size()) {
        throw StructuralError("limit_gaussian: labels do not match the training inputs");
    }
    for (std::size_t i : train) {
        if (static_cast<Eigen::Index>(i) >= nbar) throw StructuralError("limit_gaussian: training index out of range");
    }
    const Matrix k_xx = select_cols(select_rows(k_analytic, train), train);
    const auto eig = jacobi_eigen(k_xx);
    if (eig.values(0) <= kSingularEigenvalue) {
        throw AssumptionFailure("analytic kernel on the training inputs is singular (min eigenvalue " +
                                std::to_string(eig.values(0)) + ")");
    }
    const double a = eta * t;
    const Matrix filter = apply_spectral(eig, [a](double lambda) { return flow_filter(lambda, a); });
    const Matrix A = select_cols(k_analytic, train) * filter;  // K(X-bar, X) K^{-1} (1 - e^{-t eta K})
    const Matrix k0_x = select_rows(k0bar, train);              // K0(X, X-bar)
    const Matrix k0_xx = select_cols(k0_x, train);              // K0(X, X)
    GaussianSpec spec;
    spec.mean = A * Y;
    const Matrix cross = A * k0_x;
    Matrix cov = k0bar - cross - cross.transpose() + A * k0_xx * A.transpose();
    spec.cov = 0.5 * (cov + cov.transpose());
    return spec;
}

Matrix sample_gaussian(const GaussianSpec& spec, std::size_t samples, std::uint64_t seed) {
    const auto d = spec.mean.size();
    if (spec.cov.rows() != d || spec.cov.cols() != d) {
        throw StructuralError("sample_gaussian: covariance does not match the mean");
    }
    const Matrix B = psd_factor(spec.cov);
    Rng rng(seed);
    Matrix out(static_cast<Eigen::Index>(samples), d);
    Vector z(d);
    for (std::size_t s = 0; s < samples; ++s) {
        for (Eigen::Index j = 0; j < d; ++j) z(j) = rng.normal();
        out.row(static_cast<Eigen::Index>(s)) = (spec.mean + B * z).transpose();
    }
    return out;
}

LazyReport lazy_metrics(const FlowTrajectory& traj, const Model& model, const Dataset& data, double eta,
                        const LazyConstants& constants, GradientMethod method) {
    LazyReport rep;
    rep.grad3_rhs = constants.grad3;
    rep.hypothesis_holds = constants.hypothesis_holds && constants.defined;
    if (traj.times.empty()) return rep;
    std::optional<LinearizedFlow> lin;
    try {
        lin.emplace(model, ParameterVector(traj.thetas.front()), data, eta, method);
    } catch (const AssumptionFailure&) {
        rep.linearization_defined = false;
    }
    for (std::size_t c = 0; c < traj.times.size(); ++c) {
        LazyRow row;
        row.t = traj.times[c];
        row.loss = traj.loss[c];
        row.loss_rhs = constants.grad1(eta, row.t);
        row.drift = traj.drift[c];
        row.path_length = traj.path_length[c];
        row.drift_rhs = constants.grad2(eta, row.t);
        if (lin) {
            row.linear_gap = (traj.fbar[c] - lin->predict_all(row.t)).cwiseAbs().maxCoeff();
        } else {
            row.linear_gap = std::numeric_limits<double>::quiet_NaN();
        }
        rep.max_linear_gap = std::max(rep.max_linear_gap, row.linear_gap);
        const bool ok = row.loss <= row.loss_rhs && row.drift <= row.drift_rhs && row.linear_gap <= rep.grad3_rhs;
        rep.all_hold = rep.all_hold && ok;
        rep.rows.push_back(row);
    }
    return rep;
}

void write_trajectory_csv(std::ostream& out, const FlowTrajectory& traj) {
    out << "time,loss,drift,path_length";
    const std::size_t n = traj.F.empty() ? 0 : static_cast<std::size_t>(traj.F.front().size());
    for (std::size_t i = 0; i < n; ++i) out << ",F" << i;
    out << '\n';
    for (std::size_t c = 0; c < traj.times.size(); ++c) {
        write_number(out, traj.times[c]);
        for (double v : {traj.loss[c], traj.drift[c], traj.path_length[c]}) {
            out << ',';
            write_number(out, v);
        }
        for (Eigen::Index i = 0; i < traj.F[c].size(); ++i) {
            out << ',';
            write_number(out, traj.F[c](i));
        }
        out << '\n';
    }
}

nlohmann::json gaussian_to_json(const GaussianSpec& spec) {
    nlohmann::json cov = nlohmann::json::array();
    for (Eigen::Index r = 0; r < spec.cov.rows(); ++r) {
        std::vector<double> row(static_cast<std::size_t>(spec.cov.cols()));
        for (Eigen::Index c = 0; c < spec.cov.cols(); ++c) row[static_cast<std::size_t>(c)] = spec.cov(r, c);
        cov.push_back(row);
    }
    return {{"mean", std::vector<double>(spec.mean.data(), spec.mean.data() + spec.mean.size())}, {"cov", cov}};
}

nlohmann::json lazy_to_json(const LazyReport& report) {
    auto num = [](double v) -> nlohmann::json {
        if (std::isfinite(v)) return v;
        return nullptr;
    };
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : report.rows) {
        rows.push_back({{"t", r.t},
                        {"loss", num(r.loss)},
                        {"loss_rhs", num(r.loss_rhs)},
                        {"drift", num(r.drift)},
                        {"path_length", num(r.path_length)},
                        {"drift_rhs", num(r.drift_rhs)},
                        {"linear_gap", num(r.linear_gap)}});
    }
    return {{"rows", rows},
            {"grad3_rhs", num(report.grad3_rhs)},
            {"max_linear_gap", num(report.max_linear_gap)},
            {"linearization_defined", report.linearization_defined},
            {"hypothesis_holds", report.hypothesis_holds},
            {"all_hold", report.all_hold}};
}

}  // namespace qnnlab
