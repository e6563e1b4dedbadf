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

#include <algorithm>
#include <cmath>
#include <string>

#include "qnnlab/errors.hpp"

namespace qnnlab {

namespace {

// Dormand-Prince tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// Difference between the 5th- and embedded 4th-order weights.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

constexpr double kSafety = 0.9;
constexpr double kMinFactor = 0.2;
constexpr double kMaxFactor = 10.0;

void checked_rhs(const OdeRhs& rhs, double t, const Vector& y, Vector& out, OdeStats& stats) {
    rhs(t, y, out);
    ++stats.rhs_evals;
    if (!out.allFinite()) {
        throw IntegrationError("non-finite derivative at t = " + std::to_string(t));
    }
}

double error_norm(const Vector& err, const Vector& y0, const Vector& y1, const OdeOptions& opt) {
    if (err.size() == 0) return 0.0;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < err.size(); ++i) {
        const double scale = opt.atol + opt.rtol * std::max(std::abs(y0(i)), std::abs(y1(i)));
        const double r = err(i) / scale;
        acc += r * r;
    }
    return std::sqrt(acc / static_cast<double>(err.size()));
}

double initial_step(const OdeRhs& rhs, double t0, const Vector& y0, const Vector& f0, const OdeOptions& opt,
                    OdeStats& stats) {
    if (opt.initial_step > 0.0) return opt.initial_step;
    if (y0.size() == 0) return 1.0;
    // Hairer-Norsett-Wanner starting step heuristic.
    Vector scale = (opt.atol + opt.rtol * y0.cwiseAbs().array()).matrix();
    const double d0 = std::sqrt((y0.cwiseQuotient(scale)).squaredNorm() / static_cast<double>(y0.size()));
    const double d1 = std::sqrt((f0.cwiseQuotient(scale)).squaredNorm() / static_cast<double>(y0.size()));
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    Vector y1 = y0 + h0 * f0;
    Vector f1(y0.size());
    checked_rhs(rhs, t0 + h0, y1, f1, stats);
    const double d2 =
        std::sqrt(((f1 - f0).cwiseQuotient(scale)).squaredNorm() / static_cast<double>(y0.size())) / h0;
    const double h1 = std::max(d1, d2) <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                                                 : std::pow(0.01 / std::max(d1, d2), 1.0 / 5.0);
    return std::min(100.0 * h0, h1);
}

}  // namespace

OdeStats integrate_dopri5(const OdeRhs& rhs, double t0, Vector& y, const std::vector<double>& checkpoints,
                          const OdeObserver& observe, const OdeOptions& opt) {
    OdeStats stats;
    for (std::size_t i = 0; i < checkpoints.size(); ++i) {
        if (!std::isfinite(checkpoints[i]) || checkpoints[i] < t0 || (i > 0 && checkpoints[i] < checkpoints[i - 1])) {
            throw PreconditionError("checkpoints must be finite, nondecreasing and not before the start time");
        }
    }
    const Eigen::Index n = y.size();
    Vector k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), y5(n), err(n);
    double t = t0;
    checked_rhs(rhs, t, y, k1, stats);
    double h = std::min(initial_step(rhs, t, y, k1, opt, stats), opt.max_step);

    for (std::size_t c = 0; c < checkpoints.size(); ++c) {
        const double target = checkpoints[c];
        while (t < target) {
            if (stats.accepted + stats.rejected >= opt.max_steps) {
                throw IntegrationError("step budget exhausted at t = " + std::to_string(t));
            }
            bool last = false;
            double step = std::min(h, opt.max_step);
            if (t + step >= target || target - (t + step) < 1e-12 * std::max(1.0, std::abs(target))) {
                step = target - t;
                last = true;
            }
            if (step <= 1e-14 * std::max(1.0, std::abs(t))) {
                if (last) {
                    t = target;
                    break;
                }
                throw IntegrationError("step size underflow at t = " + std::to_string(t));
            }
            tmp = y + step * a21 * k1;
            checked_rhs(rhs, t + c2 * step, tmp, k2, stats);
            tmp = y + step * (a31 * k1 + a32 * k2);
            checked_rhs(rhs, t + c3 * step, tmp, k3, stats);
            tmp = y + step * (a41 * k1 + a42 * k2 + a43 * k3);
            checked_rhs(rhs, t + c4 * step, tmp, k4, stats);
            tmp = y + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
            checked_rhs(rhs, t + c5 * step, tmp, k5, stats);
            tmp = y + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
            checked_rhs(rhs, t + step, tmp, k6, stats);
            y5 = y + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            checked_rhs(rhs, t + step, y5, k7, stats);
            err = step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
            const double en = error_norm(err, y, y5, opt);
            const double factor =
                en == 0.0 ? kMaxFactor : std::clamp(kSafety * std::pow(en, -0.2), kMinFactor, kMaxFactor);
            if (en <= 1.0) {
                t = last ? target : t + step;
                y = y5;
                k1 = k7;  // first-same-as-last
                ++stats.accepted;
                // A step shortened to land on the checkpoint does not shrink the next one.
                h = last ? std::max(h, step * factor) : step * factor;
            } else {
                ++stats.rejected;
                h = step * std::max(kMinFactor, factor);
            }
        }
        if (observe) {
            observe(c, t, y);
        }
    }
    return stats;
}

}  // namespace qnnlab
