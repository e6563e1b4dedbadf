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
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "qnnlab/rng.hpp"

namespace qnnlab {
namespace {

constexpr double kPi = std::numbers::pi;

ArchitectureSpec build(std::size_t m, std::size_t L, const std::string& pattern, std::uint64_t seed = 1) {
    ArchitectureOptions opt;
    opt.num_qubits = m;
    opt.num_layers = L;
    opt.entangler_pattern = pattern;
    opt.encoding_seed = seed;
    return make_architecture(opt);
}

Input scalar(double v) {
    Input x(1);
    x << v;
    return x;
}

TEST(EmpiricalNtk, SingleQubitClosedForm) {
    const Model model(build(1, 1, "none"), {scalar(0.2)});
    for (double t : {0.1, kPi / 4, 1.3}) {
        const auto k = empirical_ntk(model, ParameterVector(Vector::Constant(1, t)), {0});
        EXPECT_NEAR(k.entries(0, 0), 4 * std::pow(std::sin(2 * t), 2), 1e-12);
    }
    const auto k = empirical_ntk(model, ParameterVector(Vector::Constant(1, kPi / 4)), {0});
    EXPECT_NEAR(k.entries(0, 0), 4.0, 1e-12);
    EXPECT_EQ(k.samples, 0u);
}

TEST(EmpiricalNtk, GramOfGradients) {
    const Model model(build(4, 2, "brickwall"), {scalar(0.2), scalar(-0.5), scalar(0.9)}, 1.4);
    const auto theta = sample_init(model, 3);
    const auto k = empirical_ntk(model, theta, {0, 1, 2});
    for (std::size_t i = 0; i < 3; ++i) {
        const Vector gi = model.grad_f(theta, i);
        EXPECT_NEAR(k.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)), gi.squaredNorm(), 1e-12);
        for (std::size_t j = 0; j < 3; ++j) {
            EXPECT_NEAR(k.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)),
                        gi.dot(model.grad_f(theta, j)), 1e-12);
        }
    }
    EXPECT_EQ(k.entries, k.entries.transpose());
    EXPECT_GE(min_eigenvalue(k), -1e-10);
    const auto adj = empirical_ntk(model, theta, {0, 1, 2}, GradientMethod::Adjoint);
    EXPECT_LE((adj.entries - k.entries).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(EmpiricalNtk, EntryAndLipschitzBounds) {
    Rng rng(5);
    for (std::size_t m : {2u, 4u, 6u}) {
        Model model(build(m, 2, "brickwall", m), {scalar(0.3), scalar(-0.8)});
        model.set_normalization(0.9);
        const double entry = ntk_entry_bound(model);
        const double lip = ntk_lipschitz_constant(model);
        const auto& t = model.lightcones();
        const double lm = static_cast<double>(model.num_params());
        EXPECT_DOUBLE_EQ(entry, 4 * lm * t.maxM * t.maxM / 0.81);
        EXPECT_DOUBLE_EQ(lip, 16 * lm * t.maxM * t.maxM * t.maxN / 0.81);
        for (int pair = 0; pair < 40; ++pair) {
            const auto a = sample_init(model, rng.below(1u << 30));
            auto b = a;
            for (std::size_t i = 0; i < b.size(); ++i) b[i] += rng.uniform(-0.05, 0.05);
            const auto ka = empirical_ntk(model, a, {0, 1}).entries;
            const auto kb = empirical_ntk(model, b, {0, 1}).entries;
            const double step = (a.values() - b.values()).cwiseAbs().maxCoeff();
            EXPECT_LE(ka.cwiseAbs().maxCoeff(), entry);
            EXPECT_LE((ka - kb).cwiseAbs().maxCoeff(), lip * step);
        }
    }
}

TEST(AnalyticNtk, SingleQubitMean) {
    const Model model(build(1, 1, "none"), {scalar(0.0)});
    const auto k = analytic_ntk(model, {0}, 2000, 17);
    EXPECT_EQ(k.mean.samples, 2000u);
    EXPECT_NEAR(k.mean.entries(0, 0), 2.0, 3 * k.standard_error(0, 0));
    // Var(4 sin^2 2 theta) = 16 (3/8 - 1/4) = 2.
    EXPECT_NEAR(k.standard_error(0, 0), std::sqrt(2.0 / 2000), 0.1 * std::sqrt(2.0 / 2000));
}

TEST(AnalyticNtk, SingleSampleIsEmpirical) {
    const Model model(build(3, 2, "brickwall"), {scalar(0.1), scalar(0.6)});
    const auto k = analytic_ntk(model, {0, 1}, 1, 23);
    const auto e = empirical_ntk(model, sample_init(model, init_seed(23, 0)), {0, 1});
    EXPECT_LE((k.mean.entries - e.entries).cwiseAbs().maxCoeff(), 1e-14);
}

// Two-layer product circuit: with c_k(x) = cos 2 phi_k(x) for the first-layer
// encoding angle, E f_k(x) f_k(x') = (1 + c c') / 4 and each of the two
// derivative products averages to 1 + c c'.
double factor(const Model& model, std::size_t k, std::size_t a, std::size_t b) {
    const auto& arch = model.arch();
    const double ca = std::cos(2 * arch.encoding_angles(model.feature_space()[a])(static_cast<Eigen::Index>(k)));
    const double cb = std::cos(2 * arch.encoding_angles(model.feature_space()[b])(static_cast<Eigen::Index>(k)));
    return 1.0 + ca * cb;
}

TEST(AnalyticNtk, ProductCircuitFactorizedIntegral) {
    const Model model(build(2, 2, "none", 4), {scalar(0.4), scalar(-1.1)});
    const auto k = analytic_ntk(model, {0, 1}, 3000, 8);
    for (std::size_t a = 0; a < 2; ++a) {
        for (std::size_t b = 0; b < 2; ++b) {
            double expected = 0.0;
            for (std::size_t q = 0; q < 2; ++q) expected += 2.0 * factor(model, q, a, b);
            const auto ia = static_cast<Eigen::Index>(a), ib = static_cast<Eigen::Index>(b);
            EXPECT_NEAR(k.mean.entries(ia, ib), expected, 4 * k.standard_error(ia, ib));
        }
    }
}

TEST(Covariance, ProductCircuitFactorizedIntegral) {
    const Model model(build(2, 2, "none", 4), {scalar(0.4), scalar(-1.1)});
    const auto cov = covariance_init(model, {0, 1}, 4000, 8);
    for (std::size_t a = 0; a < 2; ++a) {
        for (std::size_t b = 0; b < 2; ++b) {
            double expected = 0.0;
            for (std::size_t q = 0; q < 2; ++q) expected += 0.25 * factor(model, q, a, b);
            const auto ia = static_cast<Eigen::Index>(a), ib = static_cast<Eigen::Index>(b);
            EXPECT_NEAR(cov.matrix.entries(ia, ib), expected, 4 * cov.standard_error(ia, ib));
        }
    }
}

TEST(Covariance, CalibratedDiagonalIsOne) {
    Model model(build(1, 1, "none"), {scalar(0.0)});
    calibrate_normalization(model, 2000, 31);
    const auto same = covariance_init(model, {0}, 2000, 31);
    EXPECT_NEAR(same.matrix.entries(0, 0), 1.0, 1e-12);
    const auto fresh = covariance_init(model, {0}, 2000, 32);
    EXPECT_NEAR(fresh.matrix.entries(0, 0), 1.0, 4 * fresh.standard_error(0, 0) + 0.05);
    EXPECT_FALSE(fresh.singular);
}

TEST(Covariance, RepeatedInputIsSingular) {
    const Model model(build(2, 1, "brickwall"), {scalar(0.3)});
    const auto cov = covariance_init(model, {0, 0}, 200, 1);
    EXPECT_TRUE(cov.singular);
    EXPECT_LE(cov.min_eigenvalue, kSingularEigenvalue);
}

TEST(Concentration, RhsFormula) {
    Model model(build(4, 2, "brickwall"), {scalar(0.3)});
    model.set_normalization(1.5);
    const auto& t = model.lightcones();
    const double lm = static_cast<double>(model.num_params());
    const double eps = 0.7;
    const double expected = std::exp(-std::pow(1.5, 4) * eps * eps /
                                     (256 * lm * std::pow(t.maxM, 4) * std::pow(t.maxN, 2)));
    EXPECT_NEAR(concentration_rhs(model, eps), expected, 1e-15);
    EXPECT_DOUBLE_EQ(concentration_rhs(model, 0.0), 1.0);
}

TEST(Concentration, ExtremeEpsilons) {
    Model model(build(3, 2, "brickwall"), {scalar(0.3), scalar(0.8)});
    calibrate_normalization(model, 200, 2);
    const auto analytic = analytic_ntk(model, {0, 1}, 200, 3);
    const double huge = 2 * ntk_entry_bound(model) + 1.0;
    const auto rep = concentration_check(model, analytic.mean, {0.0, huge}, 50, 4);
    ASSERT_EQ(rep.rows.size(), 2u);
    EXPECT_DOUBLE_EQ(rep.rows[0].frequency, 1.0);
    EXPECT_DOUBLE_EQ(rep.rows[0].rhs, 1.0);
    EXPECT_TRUE(rep.rows[0].vacuous);
    EXPECT_TRUE(rep.rows[0].consistent);
    EXPECT_DOUBLE_EQ(rep.rows[1].frequency, 0.0);
    EXPECT_TRUE(rep.rows[1].consistent);
    EXPECT_TRUE(rep.consistent());
    EXPECT_GT(rep.max_deviation, 0.0);
    const auto doc = concentration_to_json(rep);
    EXPECT_EQ(doc["rows"].size(), 2u);
}

TEST(KernelCsv, HeaderAndRows) {
    KernelMatrix k;
    k.entries = Matrix::Identity(2, 2);
    k.inputs = {3, 5};
    std::ostringstream out;
    write_kernel_csv(out, k);
    const std::string text = out.str();
    EXPECT_EQ(text.substr(0, text.find('\n')), "input,x3,x5");
    EXPECT_NE(text.find("x5,0,1"), std::string::npos);
}

}  // namespace
}  // namespace qnnlab
