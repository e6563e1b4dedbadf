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

// Gradient-flow training, the linearized flow, and the limiting Gaussian process.
//
// The loss is 1/2 sum_i (f(Theta, x_i) - y_i)^2, so the flow on outputs reads
// dF/dt = -eta K_hat_Theta (F - Y).

#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <vector>

#include <nlohmann/json.hpp>

#include "qnnlab/bounds.hpp"
#include "qnnlab/model.hpp"
#include "qnnlab/ode.hpp"

namespace qnnlab {

struct FlowTrajectory {
    std::vector<double> times;
    std::vector<Vector> thetas;
    /// f(Theta_t, X) on the training inputs.
    std::vector<Vector> F;
    /// f(Theta_t, X-bar) on the whole feature space.
    std::vector<Vector> fbar;
    std::vector<double> loss;
    /// ||Theta_t - Theta_0||_inf.
    std::vector<double> drift;
    /// Integral of ||dTheta/dt||_inf; nondecreasing and never below drift.
    std::vector<double> path_length;
    OdeStats stats;
};

struct FlowOptions {
    OdeOptions ode;
    GradientMethod gradient = GradientMethod::ParameterShift;
};

/// Feature-space index of every training input; throws UnknownInput.
std::vector<std::size_t> training_indices(const Model& model, const Dataset& data);

double squared_loss(const Vector& F, const Vector& Y);

/// {0} followed by `count` geometrically spaced times ending at t_max.
std::vector<double> geometric_checkpoints(double t_first, double t_max, std::size_t count);

FlowTrajectory train_gradient_flow(const Model& model, const ParameterVector& theta0, const Dataset& data,
                                   double eta, const std::vector<double>& checkpoints,
                                   const FlowOptions& options = {});

/// Closed-form training of the model linearized around Theta_0:
/// f_lin(t, x) = f_0(x) - K_hat_0(x, X) K_hat_0^{-1} (1 - exp(-eta K_hat_0 t)) (F_0 - Y).
class LinearizedFlow {
  public:
    /// Throws AssumptionFailure if K_hat_0(X, X) has min eigenvalue <= 1e-10.
    LinearizedFlow(const Model& model, const ParameterVector& theta0, const Dataset& data, double eta,
                   GradientMethod method = GradientMethod::ParameterShift);

    /// f_lin at every feature-space input.
    Vector predict_all(double t) const;
    double predict(double t, std::size_t input) const;
    Vector predict_train(double t) const;

    const Matrix& train_kernel() const { return k_train_; }
    /// K_hat_0(X-bar, X).
    const Matrix& cross_kernel() const { return k_cross_; }
    double min_eigenvalue() const { return eig_.values(0); }
    const Vector& f0() const { return f0_; }
    const std::vector<std::size_t>& train_indices() const { return train_; }
    double eta() const { return eta_; }

    /// Integrates d f_lin(X-bar)/dt = -eta K_hat_0(X-bar, X) (f_lin(X) - Y) numerically.
    std::vector<Vector> integrate(const std::vector<double>& checkpoints, const OdeOptions& options) const;

  private:
    std::vector<std::size_t> train_;
    Vector y_;
    double eta_;
    Vector f0_;
    Matrix k_train_;
    Matrix k_cross_;
    SymmetricEigen eig_;
    Vector residual0_;
};

double linear_flow_closed_form(const Model& model, const ParameterVector& theta0, const Dataset& data, double eta,
                               double t, const Input& x);

struct GaussianSpec {
    Vector mean;
    Matrix cov;
};

/// Mean mu_t = K(x, X) K^{-1} (1 - e^{-t eta K}) Y and covariance K_t over X-bar.
/// `k0bar` and `k_analytic` are both indexed by the feature space; `train` picks X.
GaussianSpec limit_gaussian(const Matrix& k0bar, const Matrix& k_analytic, const std::vector<std::size_t>& train,
                            const Vector& Y, double eta, double t);

/// S draws from N(mean, cov) through an eigen-factor of cov + 1e-10 I; one row per draw.
Matrix sample_gaussian(const GaussianSpec& spec, std::size_t samples, std::uint64_t seed);

struct LazyRow {
    double t = 0.0;
    double loss = 0.0;
    double loss_rhs = 0.0;
    double drift = 0.0;
    double path_length = 0.0;
    double drift_rhs = 0.0;
    double linear_gap = 0.0;
};

struct LazyReport {
    std::vector<LazyRow> rows;
    double grad3_rhs = 0.0;
    double max_linear_gap = 0.0;
    /// False when K_hat_0 is singular and f_lin is undefined.
    bool linearization_defined = true;
    bool hypothesis_holds = false;
    /// Every row within its right-hand side.
    bool all_hold = true;
};

/// Loss, drift and sup_x |f - f_lin| at every checkpoint, each beside its lazy-training right-hand side.
LazyReport lazy_metrics(const FlowTrajectory& traj, const Model& model, const Dataset& data, double eta,
                        const LazyConstants& constants, GradientMethod method = GradientMethod::ParameterShift);

/// time, loss, drift, path_length, then F at each training input.
void write_trajectory_csv(std::ostream& out, const FlowTrajectory& traj);
nlohmann::json gaussian_to_json(const GaussianSpec& spec);
nlohmann::json lazy_to_json(const LazyReport& report);

}  // namespace qnnlab
