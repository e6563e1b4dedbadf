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

// Tangent kernels and the initialization covariance.

#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "qnnlab/model.hpp"

namespace qnnlab {

/// Symmetric matrix indexed by a list of feature-space inputs.
struct KernelMatrix {
    Matrix entries;
    /// Feature-space index of each row.
    std::vector<std::size_t> inputs;
    /// Monte-Carlo sample count; 0 for a kernel evaluated at one Theta.
    std::size_t samples = 0;

    std::size_t size() const { return inputs.size(); }
};

/// Singularity threshold for kernels that must be inverted.
inline constexpr double kSingularEigenvalue = 1e-10;

/// Gradient Gram matrix grad f(x) . grad f(x') at one Theta.
KernelMatrix empirical_ntk(const Model& model, const ParameterVector& theta,
                           const std::vector<std::size_t>& inputs,
                           GradientMethod method = GradientMethod::ParameterShift);

/// Gradients of f at every listed input, one column per input.
Matrix gradient_matrix(const Model& model, const ParameterVector& theta, const std::vector<std::size_t>& inputs,
                       GradientMethod method = GradientMethod::ParameterShift);

struct AnalyticNtk {
    KernelMatrix mean;
    Matrix standard_error;
};

/// Entrywise Monte-Carlo mean of the empirical kernel over `samples` initializations.
AnalyticNtk analytic_ntk(const Model& model, const std::vector<std::size_t>& inputs, std::size_t samples,
                         std::uint64_t seed, GradientMethod method = GradientMethod::ParameterShift);

struct CovarianceEstimate {
    KernelMatrix matrix;
    Matrix standard_error;
    double min_eigenvalue = 0.0;
    /// min eigenvalue <= kSingularEigenvalue.
    bool singular = false;
};

/// Monte-Carlo estimate of E f(Theta, x) f(Theta, x'). Uses the same
/// initialization stream as calibrate_normalization for a given seed.
CovarianceEstimate covariance_init(const Model& model, const std::vector<std::size_t>& inputs,
                                   std::size_t samples, std::uint64_t seed);

struct ConcentrationRow {
    double epsilon = 0.0;
    /// Largest exceedance frequency over kernel entries.
    double frequency = 0.0;
    std::size_t worst_row = 0;
    std::size_t worst_col = 0;
    double rhs = 1.0;
    double slack = 0.0;
    bool vacuous = false;
    bool consistent = true;
};

struct ConcentrationReport {
    std::size_t trials = 0;
    std::uint64_t seed = 0;
    /// Largest observed |K_hat - K| over all trials and entries.
    double max_deviation = 0.0;
    std::vector<ConcentrationRow> rows;
    bool consistent() const;
};

/// Right-hand side exp(-N^4 eps^2 / (256 Lm maxM^4 maxN^2)).
double concentration_rhs(const Model& model, double epsilon);

/// For each epsilon, the per-entry frequency of |K_hat - K| >= epsilon over
/// `trials` fresh initializations, beside the tail bound. An entry is
/// consistent when frequency <= rhs + 3 sqrt(rhs (1 - rhs) / trials); rows with
/// rhs + slack >= 1 are flagged vacuous.
ConcentrationReport concentration_check(const Model& model, const KernelMatrix& analytic,
                                        const std::vector<double>& epsilons, std::size_t trials,
                                        std::uint64_t seed);

/// Entry bound 4 Lm maxM^2 / N^2.
double ntk_entry_bound(const Model& model);
/// Lipschitz constant 16 Lm maxM^2 maxN / N^2 with respect to the sup norm.
double ntk_lipschitz_constant(const Model& model);

double min_eigenvalue(const KernelMatrix& k);

/// CSV with a header row of input identifiers "x<index>".
void write_kernel_csv(std::ostream& out, const KernelMatrix& k);

nlohmann::json concentration_to_json(const ConcentrationReport& report);

}  // namespace qnnlab
