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

// The generated function f(Theta, x) = (1/N_m) sum_k <O_k>, its gradients,
// random initialization and normalization calibration.

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "qnnlab/circuit.hpp"
#include "qnnlab/lightcone.hpp"
#include "qnnlab/program.hpp"

namespace qnnlab {

enum class GradientMethod { ParameterShift, Adjoint };

/// Training set: distinct inputs with labels in {-1, +1}.
struct Dataset {
    std::vector<Input> X;
    Vector Y;

    std::size_t size() const { return X.size(); }
    /// Nonempty, one finite label per input, distinct inputs.
    void validate_structure() const;
    /// validate_structure() plus labels in {-1, +1}.
    void validate() const;
};

Dataset dataset_from_json(const nlohmann::json& doc);
nlohmann::json dataset_to_json(const Dataset& data);

/// Circuit plus normalization and the finite feature space X-bar.
class Model {
  public:
    Model(ArchitectureSpec arch, std::vector<Input> feature_space, double normalization = 1.0);

    const ArchitectureSpec& arch() const { return arch_; }
    const LightConeTable& lightcones() const { return table_; }
    const std::vector<Input>& feature_space() const { return inputs_; }
    std::size_t num_params() const { return arch_.num_params(); }
    std::size_t num_qubits() const { return arch_.num_qubits; }

    double normalization() const { return normalization_; }
    void set_normalization(double n_m);
    bool calibrated() const { return calibrated_; }

    /// Position of x in the feature space; throws UnknownInput otherwise.
    std::size_t input_index(const Input& x) const;

    /// True when observables are simulated one light cone at a time.
    bool uses_cones() const { return use_cones_; }
    void set_use_cones(bool enabled) { use_cones_ = enabled; }

    double eval_f(const ParameterVector& theta, const Input& x) const;
    double eval_f(const ParameterVector& theta, std::size_t input) const;
    /// Unnormalized <O_k> for every k.
    Vector eval_local(const ParameterVector& theta, std::size_t input) const;
    /// f over the whole feature space.
    Vector eval_all(const ParameterVector& theta) const;

    Vector grad_f(const ParameterVector& theta, const Input& x,
                  GradientMethod method = GradientMethod::ParameterShift) const;
    Vector grad_f(const ParameterVector& theta, std::size_t input,
                  GradientMethod method = GradientMethod::ParameterShift) const;
    /// Unnormalized d<O_k>/dTheta_i as an m x Lm matrix; each row is computed on
    /// the cone of k, so entries with k outside M[i] are exactly zero.
    Matrix grad_local(const ParameterVector& theta, std::size_t input) const;

  private:
    void check_theta(const ParameterVector& theta) const;

    ArchitectureSpec arch_;
    LightConeTable table_;
    std::vector<Input> inputs_;
    std::vector<Vector> angles_;
    GateProgram full_;
    std::vector<GateProgram> cones_;
    double normalization_ = 1.0;
    bool calibrated_ = false;
    bool use_cones_ = false;
};

/// I.i.d. uniform [0, pi] entries; deterministic per seed.
ParameterVector sample_init(const Model& model, std::uint64_t seed);

/// Seed of the s-th initialization in a Monte-Carlo run with base seed `seed`.
std::uint64_t init_seed(std::uint64_t seed, std::size_t s);

struct CalibrationResult {
    double normalization = 0.0;
    /// Delta-method standard error of the normalization.
    double standard_error = 0.0;
    /// Unnormalized mean of (sum_k f_k)^2 at every input.
    Vector second_moments;
    std::size_t argmax_input = 0;
    std::size_t samples = 0;
    std::uint64_t seed = 0;
};

/// Sets N_m = sqrt(max_x mean_s (sum_k f_k)^2) on the model.
CalibrationResult calibrate_normalization(Model& model, std::size_t samples, std::uint64_t seed);

struct CenteringReport {
    bool passed = true;
    double tolerance = 0.0;
    /// Unnormalized mean of f_k at each input, m rows by N-bar columns.
    Matrix means;
    double max_abs_mean = 0.0;
    std::size_t worst_qubit = 0;
    std::size_t worst_input = 0;
    std::size_t samples = 0;
};

/// |E f_k(x)| <= 4 / sqrt(S) for every k and x.
CenteringReport check_centering(const Model& model, std::size_t samples, std::uint64_t seed);

nlohmann::json calibration_to_json(const CalibrationResult& result);
nlohmann::json centering_to_json(const CenteringReport& report);

}  // namespace qnnlab
