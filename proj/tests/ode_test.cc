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

#include "qnnlab/ode.hpp"

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "qnnlab/errors.hpp"

namespace qnnlab {
namespace {

TEST(Dopri5, ExponentialDecayAtCheckpoints) {
    Vector y = Vector::Constant(1, 1.0);
    std::vector<double> times;
    std::vector<double> values;
    const std::vector<double> cps{0.0, 0.1, 0.5, 1.0, 3.0, 10.0};
    integrate_dopri5([](double, const Vector& v, Vector& d) { d = -v; }, 0.0, y, cps,
                     [&](std::size_t, double t, const Vector& v) {
                         times.push_back(t);
                         values.push_back(v(0));
                     });
    ASSERT_EQ(times, cps);
    for (std::size_t i = 0; i < cps.size(); ++i) EXPECT_NEAR(values[i], std::exp(-cps[i]), 1e-8);
}

TEST(Dopri5, HarmonicOscillatorConservesPhase) {
    Vector y(2);
    y << 1.0, 0.0;
    OdeOptions opt;
    opt.atol = 1e-12;
    opt.rtol = 1e-10;
    const double T = 4 * std::acos(-1.0);
    const auto stats = integrate_dopri5(
        [](double, const Vector& v, Vector& d) {
            d.resize(2);
            d << v(1), -v(0);
        },
        0.0, y, {T}, [](std::size_t, double, const Vector&) {}, opt);
    EXPECT_NEAR(y(0), 1.0, 1e-8);
    EXPECT_NEAR(y(1), 0.0, 1e-8);
    EXPECT_GT(stats.accepted, 0u);
    EXPECT_GE(stats.rhs_evals, 6 * stats.accepted);
}

TEST(Dopri5, TimeDependentRhs) {
    Vector y = Vector::Zero(1);
    OdeOptions opt;
    opt.atol = 1e-13;
    opt.rtol = 1e-12;
    integrate_dopri5([](double t, const Vector&, Vector& d) { d = Vector::Constant(1, std::cos(t)); }, 0.0, y,
                     {2.0}, [](std::size_t, double, const Vector&) {}, opt);
    EXPECT_NEAR(y(0), std::sin(2.0), 1e-10);
}

TEST(Dopri5, RejectsBadCheckpoints) {
    Vector y = Vector::Zero(1);
    auto rhs = [](double, const Vector& v, Vector& d) { d = v; };
    auto obs = [](std::size_t, double, const Vector&) {};
    EXPECT_THROW(integrate_dopri5(rhs, 0.0, y, {1.0, 0.5}, obs), PreconditionError);
    EXPECT_THROW(integrate_dopri5(rhs, 1.0, y, {0.5}, obs), PreconditionError);
    EXPECT_THROW(integrate_dopri5(rhs, 0.0, y, {std::numeric_limits<double>::infinity()}, obs), PreconditionError);
}

TEST(Dopri5, NonFiniteDerivativeThrows) {
    Vector y = Vector::Constant(1, 1.0);
    auto rhs = [](double t, const Vector&, Vector& d) {
        d = Vector::Constant(1, t > 0.5 ? std::nan("") : 1.0);
    };
    EXPECT_THROW(integrate_dopri5(rhs, 0.0, y, {1.0}, [](std::size_t, double, const Vector&) {}), IntegrationError);
}

TEST(Dopri5, StepBudgetEnforced) {
    Vector y = Vector::Constant(1, 1.0);
    OdeOptions opt;
    opt.max_steps = 3;
    opt.max_step = 1e-3;
    EXPECT_THROW(integrate_dopri5([](double, const Vector& v, Vector& d) { d = -v; }, 0.0, y, {1.0},
                                  [](std::size_t, double, const Vector&) {}, opt),
                 IntegrationError);
}

}  // namespace
}  // namespace qnnlab
