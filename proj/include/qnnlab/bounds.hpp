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

// Explicit constants of the Gaussian-approximation and lazy-training bounds.
//
// Every long constant is evaluated twice: once from named sub-terms composed
// as written, once as a single flat expression. Both values are kept so
// callers can cross-check the transcriptions.

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qnnlab/linalg.hpp"

namespace qnnlab {

class Model;

/// C(1, d) = 2^{3/2} ((1 + 2d) / d) Gamma((1 + d) / 2) / Gamma(d / 2). Requires d >= 1.
double stein_constant(double d);

/// omega(d, x) = x (C(1, d) - 2 log x) for x <= 1 and C(1, d) beyond; omega(d, 0) = 0.
double stein_modulus(double d, double x);

/// Integer light-cone summaries and the normalization of a model.
struct CircuitSizes {
    std::size_t m = 1;
    std::size_t L = 1;
    std::size_t maxM = 1;
    std::size_t maxN = 1;
    std::size_t D = 1;
    std::size_t Dtilde = 1;
    double N_m = 1.0;
};

CircuitSizes circuit_sizes(const Model& model);

/// Operator norms of a covariance matrix and of its inverse.
struct CovarianceNorms {
    double norm = 0.0;
    double inverse_norm = 0.0;
    double min_eigenvalue = 0.0;
};

/// Throws AssumptionFailure when the matrix is singular (min eigenvalue <= 1e-10).
CovarianceNorms covariance_norms(const Matrix& k0bar);

struct InitBound {
    double headline = 0.0;
    double headline_flat = 0.0;
    /// Pre-simplification constant built from D, Dtilde and omega.
    double tight = 0.0;
    double tight_flat = 0.0;
    CovarianceNorms norms;
};

InitBound init_bound(const CircuitSizes& sizes, std::size_t nbar, const Matrix& k0bar);

struct LazyInputs {
    std::size_t n = 1;
    double y_norm = 0.0;
    double lambda_min = 0.0;
    double delta = 0.5;
    CircuitSizes sizes;
};

struct LazyConstants {
    LazyInputs inputs;
    double R = 0.0;
    double g = 0.0;
    /// h = h_coefficient * rho.
    double h_coefficient = 0.0;
    double discriminant = 0.0;
    double rho = 0.0;
    double h = 0.0;
    double lambda_tilde = 0.0;
    double lambda_tilde_flat = 0.0;
    /// Upper estimate 4 sqrt(n) R maxM / ((lambda - g) N_m).
    double rho_bound = 0.0;
    /// Two sides of the expressivity hypothesis lambda >= 96 n sqrt(Lm) maxM^2 maxN / N^2 sqrt(log(2n^2/delta)).
    double hypothesis_lhs = 0.0;
    double hypothesis_rhs = 0.0;
    bool hypothesis_holds = false;
    /// lambda - g > 0 and a nonnegative discriminant, so rho is real.
    bool defined = false;
    double grad3 = 0.0;
    double grad3_flat = 0.0;

    /// R^2 / 2 exp(-2 eta lambda_tilde t).
    double grad1(double eta, double t) const;
    /// 2 sqrt(n) R maxM / N (1 / lambda_tilde) (1 - exp(-eta lambda_tilde t)).
    double grad2(double eta, double t) const;
};

LazyConstants lazy_constants(const LazyInputs& inputs);

struct TrainedInputs {
    std::size_t nbar = 1;
    std::size_t n = 1;
    double y_norm = 0.0;
    double lambda_min = 0.0;
    double s = 1.0;
    CircuitSizes sizes;
};

struct TrainedBound {
    double term_truncation = 0.0;
    double term_covariance = 0.0;
    double term_lazy = 0.0;
    double term_labels = 0.0;
    double constant = 0.0;
    double constant_flat = 0.0;
    double prefactor = 0.0;
    double gamma = 0.0;
    double gamma_flat = 0.0;
    CovarianceNorms norms;
};

TrainedBound trained_bound(const TrainedInputs& inputs, const Matrix& k0bar);

enum class BoundStatus { Holds, Violated, HypothesisUnmet, Vacuous };

const char* status_name(BoundStatus s);

/// Precedence: hypothesis-unmet, violated, vacuous, holds.
BoundStatus classify(double observed, double bound, bool hypotheses_met, double vacuous_threshold);

/// Diameter proxy 2 sqrt(Nbar) m / N used as the vacuousness threshold of W1 bounds.
double w1_vacuous_threshold(const CircuitSizes& sizes, std::size_t nbar);

struct BoundCheck {
    std::string name;
    double observed = 0.0;
    double bound = 0.0;
    BoundStatus status = BoundStatus::Holds;
    std::string note;
};

struct AssumptionCheck {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    /// "<=", ">=" or ">".
    std::string relation;
    bool holds = false;
};

struct AuditInputs {
    CircuitSizes sizes;
    std::size_t nbar = 1;
    std::size_t n = 1;
    double lambda_min_k = 0.0;
    double k0bar_min_eigenvalue = 0.0;
    double delta = 0.5;
    /// Optional centering result; unset leaves the check out.
    bool has_centering = false;
    double centering_max_mean = 0.0;
    double centering_tolerance = 0.0;
};

struct AssumptionAudit {
    std::vector<AssumptionCheck> checks;
    bool holds(const std::string& name) const;
    const AssumptionCheck* find(const std::string& name) const;
};

AssumptionAudit assumption_audit(const AuditInputs& inputs);

struct BoundReport {
    nlohmann::json constants = nlohmann::json::object();
    std::vector<BoundCheck> checks;
    AssumptionAudit audit;

    bool any(BoundStatus s) const;
    /// 2 if any non-vacuous bound is violated, else 3 if a hypothesis is unmet, else 0.
    int exit_code() const;
};

nlohmann::json to_json(const BoundCheck& c);
nlohmann::json to_json(const AssumptionAudit& a);
nlohmann::json to_json(const BoundReport& r);
nlohmann::json to_json(const CircuitSizes& s);
nlohmann::json to_json(const InitBound& b);
nlohmann::json to_json(const LazyConstants& c);
nlohmann::json to_json(const TrainedBound& b);

}  // namespace qnnlab
