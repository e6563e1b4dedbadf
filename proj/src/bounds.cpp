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

#include "qnnlab/bounds.hpp"

#include <cmath>
#include <limits>

#include "qnnlab/errors.hpp"
#include "qnnlab/kernel.hpp"
#include "qnnlab/model.hpp"

namespace qnnlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double dbl(std::size_t v) { return static_cast<double>(v); }

}  // namespace

double stein_constant(double d) {
    if (!(d >= 1.0)) {
        throw PreconditionError("stein_constant requires d >= 1");
    }
    const double log_ratio = std::lgamma((1.0 + d) / 2.0) - std::lgamma(d / 2.0);
    return std::pow(2.0, 1.5) * ((1.0 + 2.0 * d) / d) * std::exp(log_ratio);
}

double stein_modulus(double d, double x) {
    if (!(x >= 0.0)) {
        throw PreconditionError("stein_modulus requires x >= 0");
    }
    const double c = stein_constant(d);
    if (x == 0.0) return 0.0;
    if (x <= 1.0) return x * (c - 2.0 * std::log(x));
    return c;
}

CircuitSizes circuit_sizes(const Model& model) {
    const auto& t = model.lightcones();
    CircuitSizes s;
    s.m = t.num_qubits;
    s.L = t.num_layers;
    s.maxM = t.maxM;
    s.maxN = t.maxN;
    s.D = t.D;
    s.Dtilde = t.Dtilde;
    s.N_m = model.normalization();
    return s;
}

CovarianceNorms covariance_norms(const Matrix& k0bar) {
    if (k0bar.rows() == 0 || k0bar.rows() != k0bar.cols()) {
        throw StructuralError("covariance must be a nonempty square matrix");
    }
    const auto eig = jacobi_eigen(k0bar);
    CovarianceNorms out;
    out.min_eigenvalue = eig.values(0);
    if (out.min_eigenvalue <= kSingularEigenvalue) {
        throw AssumptionFailure("covariance is singular (min eigenvalue " + std::to_string(out.min_eigenvalue) + ")");
    }
    out.norm = eig.values(eig.values.size() - 1);
    out.inverse_norm = 1.0 / out.min_eigenvalue;
    return out;
}

InitBound init_bound(const CircuitSizes& s, std::size_t nbar_count, const Matrix& k0bar) {
    InitBound b;
    b.norms = covariance_norms(k0bar);
    const double nbar = dbl(nbar_count);
    const double m = dbl(s.m);
    const double M = dbl(s.maxM);
    const double Nc = dbl(s.maxN);
    const double D = dbl(s.D);
    const double Dt = dbl(s.Dtilde);
    const double N = s.N_m;
    const double kinv = b.norms.inverse_norm;
    const double kn = b.norms.norm;

    // Structured: named factors composed as displayed.
    const double conditioning = 2.0 * kinv * std::sqrt(kn) + 6.0;
    const double width_factor = m * std::pow(M, 3.5) * std::pow(Nc, 3.5) / std::pow(N, 3);
    const double log_factor = 1.0 + std::log(N);
    b.headline = std::pow(nbar, 1.5) * conditioning * width_factor * log_factor;

    const double stein_part = std::sqrt(nbar) * kinv * std::sqrt(kn);
    const double dependency = std::sqrt(Dt * std::pow(2.0 * nbar * D, 2) / std::pow(N, 4));
    const double smoothing = D * m * nbar / (N * N) * stein_modulus(nbar, D / N);
    b.tight = stein_part * dependency + smoothing;

    // Flat transcriptions.
    b.headline_flat = nbar * std::sqrt(nbar) * (2.0 * std::sqrt(kn) / b.norms.min_eigenvalue + 6.0) * m *
                      std::sqrt(std::pow(M * Nc, 7)) / (N * N * N) * (1.0 + std::log(N));
    const double x = D / N;
    const double omega = x > 1.0 ? stein_constant(nbar) : x * (stein_constant(nbar) - 2.0 * std::log(x));
    b.tight_flat = std::sqrt(nbar) * std::sqrt(kn) / b.norms.min_eigenvalue * 2.0 * nbar * D * std::sqrt(Dt) / (N * N) +
                   D * m * nbar * omega / (N * N);
    return b;
}

double LazyConstants::grad1(double eta, double t) const {
    return R * R / 2.0 * std::exp(-2.0 * eta * lambda_tilde * t);
}

double LazyConstants::grad2(double eta, double t) const {
    const double M = dbl(inputs.sizes.maxM);
    return 2.0 * std::sqrt(dbl(inputs.n)) * R * M / inputs.sizes.N_m / lambda_tilde *
           (1.0 - std::exp(-eta * lambda_tilde * t));
}

LazyConstants lazy_constants(const LazyInputs& in) {
    if (!(in.delta > 0.0 && in.delta < 1.0)) {
        throw PreconditionError("delta must lie in (0, 1)");
    }
    if (in.n == 0) {
        throw PreconditionError("lazy constants need n >= 1");
    }
    LazyConstants c;
    c.inputs = in;
    const double n = dbl(in.n);
    const double Lm = dbl(in.sizes.L * in.sizes.m);
    const double L = dbl(in.sizes.L);
    const double m = dbl(in.sizes.m);
    const double M = dbl(in.sizes.maxM);
    const double Nc = dbl(in.sizes.maxN);
    const double N = in.sizes.N_m;
    const double lambda = in.lambda_min;

    c.R = in.y_norm + std::sqrt(2.0 * n / in.delta);
    const double log_term = std::sqrt(std::log(2.0 * n * n / in.delta));
    c.g = 16.0 * n * std::sqrt(Lm) * M * M * Nc / (N * N) * log_term;
    c.hypothesis_lhs = lambda;
    c.hypothesis_rhs = 96.0 * n * std::sqrt(Lm) * M * M * Nc / (N * N) * log_term;
    c.hypothesis_holds = c.hypothesis_lhs >= c.hypothesis_rhs;
    c.h_coefficient = 16.0 * n * Lm * M * M * Nc / (N * N);

    const double gap = lambda - c.g;
    c.discriminant = gap > 0.0 ? 1.0 - 128.0 * n * std::sqrt(n) * c.R / (gap * gap) * Lm * M * M * M * Nc /
                                           (N * N * N)
                               : kNaN;
    c.defined = gap > 0.0 && c.discriminant >= 0.0;
    if (c.defined) {
        c.rho = 0.5 * (N * N) / (16.0 * n * Lm * M * M * Nc) * gap * (1.0 - std::sqrt(c.discriminant));
        c.h = c.h_coefficient * c.rho;
        c.lambda_tilde = lambda - c.g - c.h;
        c.rho_bound = 4.0 * std::sqrt(n) * c.R * M / (gap * N);

        // Flat: the smaller root of rho * (gap - a rho) = 2 sqrt(n) R M / N, then lambda - g - a rho.
        const double a = 16.0 * n * L * m * M * M * Nc / (N * N);
        const double b = 2.0 * std::sqrt(n) * c.R * M / N;
        c.lambda_tilde_flat = lambda - c.g - a * ((gap - std::sqrt(gap * gap - 4.0 * a * b)) / (2.0 * a));
    } else {
        c.rho = c.h = c.lambda_tilde = c.lambda_tilde_flat = c.rho_bound = kNaN;
    }

    const double width = L * L * m * m * std::pow(M, 5) * Nc * Nc / std::pow(N, 5) * (1.0 + std::log(N));
    c.grad3 = 132.0 * n * n * c.R * c.R * (1.0 + std::pow(c.lambda_tilde, -3)) * width;
    c.grad3_flat = 132.0 * n * n * c.R * c.R * (1.0 + 1.0 / (c.lambda_tilde * c.lambda_tilde * c.lambda_tilde)) *
                   (L * m) * (L * m) * M * M * M * M * M * Nc * Nc / (N * N * N * N * N) * (1.0 + std::log(N));
    return c;
}

TrainedBound trained_bound(const TrainedInputs& in, const Matrix& k0bar) {
    if (!(in.lambda_min > 0.0)) {
        throw AssumptionFailure("analytic kernel minimum eigenvalue must be positive");
    }
    if (!(in.s > 0.0)) {
        throw PreconditionError("truncation level s must be positive");
    }
    TrainedBound b;
    b.norms = covariance_norms(k0bar);
    const double nbar = dbl(in.nbar);
    const double n = dbl(in.n);
    const double y = in.y_norm;
    const double lam = in.lambda_min;
    const double kinv = b.norms.inverse_norm;
    const double kn = b.norms.norm;
    const double L = dbl(in.sizes.L);
    const double m = dbl(in.sizes.m);
    const double M = dbl(in.sizes.maxM);
    const double Nc = dbl(in.sizes.maxN);
    const double N = in.sizes.N_m;

    b.term_truncation = 96.0 * in.s * nbar;
    b.term_covariance = 8.0 * std::sqrt(nbar) * kinv * std::sqrt(kn) * (nbar + 4.0 * n * n);
    b.term_lazy = 132.0 * n * n * std::sqrt(nbar) * (2.0 * y * y + 4.0 * n) * (1.0 + 27.0 / std::pow(lam, 3));
    b.term_labels = 2.0 * (std::sqrt(n) + y) * (1.0 / lam + 6.0 / (lam * lam) * std::sqrt(nbar * n));
    b.constant = b.term_truncation + b.term_covariance + b.term_lazy + b.term_labels;
    b.prefactor = L * L * std::pow(m, 2.25) * std::pow(M, 5.5) * std::pow(Nc, 4.5) / std::pow(N, 5) *
                  (1.0 + std::log(N));
    b.gamma = b.constant * b.prefactor;

    b.constant_flat = 96.0 * in.s * nbar + 8.0 * std::sqrt(nbar) * std::sqrt(kn) / b.norms.min_eigenvalue *
                                               (nbar + 4.0 * n * n) +
                      132.0 * n * n * std::sqrt(nbar) * (2.0 * y * y + 4.0 * n) * (1.0 + 27.0 / (lam * lam * lam)) +
                      2.0 * (std::sqrt(n) + y) * (1.0 / lam + 6.0 * std::sqrt(nbar * n) / (lam * lam));
    b.gamma_flat = b.constant_flat * (L * L) * std::sqrt(std::sqrt(std::pow(m, 9))) *
                   std::sqrt(std::pow(M, 11)) * std::sqrt(std::pow(Nc, 9)) / (N * N * N * N * N) *
                   (1.0 + std::log(N));
    return b;
}

const char* status_name(BoundStatus s) {
    switch (s) {
        case BoundStatus::Holds:
            return "holds";
        case BoundStatus::Violated:
            return "violated";
        case BoundStatus::HypothesisUnmet:
            return "hypothesis-unmet";
        case BoundStatus::Vacuous:
            return "vacuous";
    }
    return "unknown";
}

BoundStatus classify(double observed, double bound, bool hypotheses_met, double vacuous_threshold) {
    if (!hypotheses_met || !std::isfinite(bound)) return BoundStatus::HypothesisUnmet;
    if (observed > bound) return BoundStatus::Violated;
    if (bound > vacuous_threshold) return BoundStatus::Vacuous;
    return BoundStatus::Holds;
}

double w1_vacuous_threshold(const CircuitSizes& s, std::size_t nbar) {
    return 2.0 * std::sqrt(dbl(nbar)) * dbl(s.m) / s.N_m;
}

bool AssumptionAudit::holds(const std::string& name) const {
    const auto* c = find(name);
    return c != nullptr && c->holds;
}

const AssumptionCheck* AssumptionAudit::find(const std::string& name) const {
    for (const auto& c : checks) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

AssumptionAudit assumption_audit(const AuditInputs& in) {
    const auto& s = in.sizes;
    const double n = dbl(in.n);
    const double Lm = dbl(s.L * s.m);
    const double M = dbl(s.maxM);
    const double Nc = dbl(s.maxN);
    const double N = s.N_m;
    AssumptionAudit a;
    auto add = [&](std::string name, double lhs, std::string rel, double rhs) {
        bool ok = false;
        if (rel == "<=") ok = lhs <= rhs;
        if (rel == ">=") ok = lhs >= rhs;
        if (rel == ">") ok = lhs > rhs;
        a.checks.push_back({std::move(name), lhs, rhs, std::move(rel), ok});
    };
    if (in.has_centering) {
        add("centering", in.centering_max_mean, "<=", in.centering_tolerance);
    }
    add("normalization_at_least_one", N, ">=", 1.0);
    add("normalization_upper", N, "<=", std::sqrt(dbl(s.m) * M * Nc));
    add("covariance_invertible", in.k0bar_min_eigenvalue, ">", kSingularEigenvalue);
    add("kernel_invertible", in.lambda_min_k, ">", kSingularEigenvalue);
    add("kernel_gap", in.lambda_min_k, ">=",
        96.0 * n * std::sqrt(Lm) * M * M * Nc / (N * N) * std::sqrt(std::log(2.0 * n * n * std::sqrt(N))));
    add("kernel_concentration", Lm * M * M * Nc * Nc / (N * N * N), "<=",
        1.0 / (256.0 * std::log(2.0) * dbl(in.nbar)));
    add("expressivity", in.lambda_min_k, ">=",
        96.0 * n * std::sqrt(Lm) * M * M * Nc / (N * N) * std::sqrt(std::log(2.0 * n * n / in.delta)));
    return a;
}

bool BoundReport::any(BoundStatus s) const {
    for (const auto& c : checks) {
        if (c.status == s) return true;
    }
    return false;
}

int BoundReport::exit_code() const {
    if (any(BoundStatus::Violated)) return 2;
    if (any(BoundStatus::HypothesisUnmet)) return 3;
    return 0;
}

namespace {

nlohmann::json num(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

}  // namespace

nlohmann::json to_json(const BoundCheck& c) {
    nlohmann::json j = {{"name", c.name}, {"observed", num(c.observed)}, {"bound", num(c.bound)},
                        {"status", status_name(c.status)}};
    if (!c.note.empty()) j["note"] = c.note;
    return j;
}

nlohmann::json to_json(const AssumptionAudit& a) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : a.checks) {
        arr.push_back({{"name", c.name}, {"lhs", num(c.lhs)}, {"relation", c.relation}, {"rhs", num(c.rhs)},
                       {"holds", c.holds}});
    }
    return arr;
}

nlohmann::json to_json(const BoundReport& r) {
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& c : r.checks) checks.push_back(to_json(c));
    return {{"constants", r.constants}, {"checks", checks}, {"assumptions", to_json(r.audit)},
            {"exit_code", r.exit_code()}};
}

nlohmann::json to_json(const CircuitSizes& s) {
    return {{"m", s.m},       {"L", s.L}, {"maxM", s.maxM}, {"maxN", s.maxN},
            {"D", s.D},       {"Dtilde", s.Dtilde}, {"N_m", s.N_m}};
}

nlohmann::json to_json(const InitBound& b) {
    return {{"alpha_init", num(b.headline)},
            {"alpha_init_flat", num(b.headline_flat)},
            {"C_m", num(b.tight)},
            {"C_m_flat", num(b.tight_flat)},
            {"K0bar_op_norm", num(b.norms.norm)},
            {"K0bar_inverse_op_norm", num(b.norms.inverse_norm)}};
}

nlohmann::json to_json(const LazyConstants& c) {
    return {{"R_delta", num(c.R)},
            {"g_delta", num(c.g)},
            {"rho_m", num(c.rho)},
            {"rho_m_upper", num(c.rho_bound)},
            {"h_delta", num(c.h)},
            {"lambda_tilde_min", num(c.lambda_tilde)},
            {"lambda_tilde_min_flat", num(c.lambda_tilde_flat)},
            {"discriminant", num(c.discriminant)},
            {"expressivity_lhs", num(c.hypothesis_lhs)},
            {"expressivity_rhs", num(c.hypothesis_rhs)},
            {"expressivity_holds", c.hypothesis_holds},
            {"defined", c.defined},
            {"grad3_rhs", num(c.grad3)},
            {"grad3_rhs_flat", num(c.grad3_flat)},
            {"delta", c.inputs.delta},
            {"lambda_min_K", num(c.inputs.lambda_min)}};
}

nlohmann::json to_json(const TrainedBound& b) {
    return {{"C_gamma", num(b.constant)},
            {"C_gamma_flat", num(b.constant_flat)},
            {"C_gamma_terms",
             {num(b.term_truncation), num(b.term_covariance), num(b.term_lazy), num(b.term_labels)}},
            {"width_prefactor", num(b.prefactor)},
            {"gamma_bound", num(b.gamma)},
            {"gamma_bound_flat", num(b.gamma_flat)}};
}

}  // namespace qnnlab
