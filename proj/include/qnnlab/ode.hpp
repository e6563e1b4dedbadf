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

// Adaptive Dormand-Prince 5(4) integration with exact landing on checkpoints.

#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "qnnlab/linalg.hpp"

namespace qnnlab {

using OdeRhs = std::function<void(double t, const Vector& y, Vector& dydt)>;
using OdeObserver = std::function<void(std::size_t index, double t, const Vector& y)>;

struct OdeOptions {
    double atol = 1e-9;
    double rtol = 1e-7;
    /// 0 selects a starting step from the initial derivative.
    double initial_step = 0.0;
    double max_step = std::numeric_limits<double>::infinity();
    std::size_t max_steps = 2'000'000;
};

struct OdeStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t rhs_evals = 0;
};

/// Advances `y` from t0 through every checkpoint (nondecreasing, all >= t0),
/// calling `observe` with the state at each one. Throws IntegrationError on a
/// non-finite derivative, step-size underflow or step-count exhaustion.
OdeStats integrate_dopri5(const OdeRhs& rhs, double t0, Vector& y, const std::vector<double>& checkpoints,
                          const OdeObserver& observe, const OdeOptions& options = {});

}  // namespace qnnlab
