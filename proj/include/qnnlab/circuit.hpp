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

// Dense statevector simulation of layered parameterized circuits.
//
// A layer applies one parametrized rotation exp(-i theta G) to every qubit,
// followed by input-dependent fixed gates: a Z rotation exp(-i <w,x> Z) on every
// qubit and CZ gates on pairwise-disjoint qubit pairs. Amplitude index bit k is
// the computational-basis value of qubit k. All indices are 0-based.

#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "qnnlab/linalg.hpp"

namespace qnnlab {

using Complex = std::complex<double>;
using Input = Vector;

inline constexpr std::size_t kDefaultMaxQubits = 20;
/// Largest register a dense amplitude vector is ever allocated for.
inline constexpr std::size_t kMaxDenseQubits = 30;

/// Pauli axis. Used both for rotation generators (hermitian involutions) and
/// for the traceless single-qubit observables.
enum class Pauli { X, Y, Z };

char pauli_name(Pauli p);
Pauli pauli_from_name(const std::string& name);

/// The 2x2 matrix of a Pauli operator, row-major.
std::array<Complex, 4> pauli_matrix(Pauli p);

struct QubitPair {
    std::size_t a = 0;
    std::size_t b = 0;
    friend bool operator==(const QubitPair&, const QubitPair&) = default;
};

struct LayerSpec {
    /// One generator per qubit.
    std::vector<Pauli> generators;
    /// CZ gates of this layer; pairs must be disjoint.
    std::vector<QubitPair> entanglers;
};

/// Static description of a layered circuit, including the frozen encoding weights.
struct ArchitectureSpec {
    std::size_t num_qubits = 0;
    std::vector<LayerSpec> layers;
    std::vector<Pauli> observables;
    std::size_t input_dim = 1;
    std::uint64_t encoding_seed = 0;
    /// Name of the entangler pattern this spec was built from ("custom" if explicit).
    std::string entangler_pattern = "custom";
    /// Encoding weights w_{l,k}; row index l*m + k, one column per input coordinate.
    Matrix encoding_weights;
    std::size_t max_qubits = kDefaultMaxQubits;

    std::size_t num_layers() const { return layers.size(); }
    std::size_t num_params() const { return layers.size() * num_qubits; }

    /// Checks every structural invariant; throws StructuralError with a reason.
    void validate() const;

    /// Encoding angles <w_{l,k}, x>, laid out like the parameter vector.
    Vector encoding_angles(const Input& x) const;
};

/// Options for the pattern-based constructor.
struct ArchitectureOptions {
    std::size_t num_qubits = 1;
    std::size_t num_layers = 1;
    /// "none", "brickwall" or "ring".
    std::string entangler_pattern = "brickwall";
    /// One axis per layer; a single entry is broadcast to all layers.
    std::vector<Pauli> generator_axes = {Pauli::X};
    Pauli observable = Pauli::Z;
    std::size_t input_dim = 1;
    std::uint64_t encoding_seed = 0;
    std::size_t max_qubits = kDefaultMaxQubits;
};

ArchitectureSpec make_architecture(const ArchitectureOptions& options);

/// Brick-wall CZ pairs for layer `layer`: (0,1),(2,3),... on even layers and
/// (1,2),(3,4),... on odd ones; `periodic` adds the wrap-around pair (m-1,0).
std::vector<QubitPair> brickwall_pairs(std::size_t num_qubits, std::size_t layer, bool periodic);

nlohmann::json architecture_to_json(const ArchitectureSpec& arch);
ArchitectureSpec architecture_from_json(const nlohmann::json& doc);

/// Theta in [0, pi]^{Lm}; entry m*l + k parametrizes the rotation on qubit k in layer l.
class ParameterVector {
  public:
    ParameterVector() = default;
    explicit ParameterVector(Vector values) : values_(std::move(values)) {}

    static std::size_t index(std::size_t layer, std::size_t qubit, std::size_t num_qubits) {
        return num_qubits * layer + qubit;
    }
    static std::pair<std::size_t, std::size_t> layer_qubit(std::size_t i, std::size_t num_qubits) {
        return {i / num_qubits, i % num_qubits};
    }

    std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
    double operator[](std::size_t i) const { return values_(static_cast<Eigen::Index>(i)); }
    double& operator[](std::size_t i) { return values_(static_cast<Eigen::Index>(i)); }
    const Vector& values() const { return values_; }
    Vector& values() { return values_; }

    /// Copy with every entry reduced into [0, pi) modulo pi.
    ParameterVector wrapped() const;

  private:
    Vector values_;
};

class StateVector {
  public:
    /// |0...0> on `num_qubits` qubits.
    explicit StateVector(std::size_t num_qubits);
    StateVector(std::size_t num_qubits, std::vector<Complex> amplitudes);

    std::size_t num_qubits() const { return num_qubits_; }
    std::size_t dim() const { return amps_.size(); }
    std::span<const Complex> amplitudes() const { return amps_; }
    std::span<Complex> amplitudes() { return amps_; }
    Complex operator[](std::size_t i) const { return amps_[i]; }
    double norm() const;

  private:
    std::size_t num_qubits_;
    std::vector<Complex> amps_;
};

// In-place gate kernels on a register of `num_qubits` qubits.
void apply_rotation(std::span<Complex> amps, std::size_t qubit, Pauli generator, double theta);
void apply_rotation_adjoint(std::span<Complex> amps, std::size_t qubit, Pauli generator, double theta);
void apply_pauli(std::span<Complex> amps, std::size_t qubit, Pauli p);
/// diag(e^{-i phi}, e^{i phi}) on `qubit`.
void apply_phase(std::span<Complex> amps, std::size_t qubit, double phi);
void apply_cz(std::span<Complex> amps, std::size_t a, std::size_t b);
/// <psi| P_qubit |psi>.
double expect_pauli(std::span<const Complex> amps, std::size_t qubit, Pauli p);

/// V_l(x) W_l(Theta) |state>. `layer` is 0-based.
StateVector apply_layer(StateVector state, const ArchitectureSpec& arch, std::size_t layer,
                        const ParameterVector& theta, const Input& x);

/// U_L ... U_1 |0^m>.
StateVector run_circuit(const ArchitectureSpec& arch, const ParameterVector& theta, const Input& x);

/// <state| O_k |state> for the Pauli observable O acting on qubit k.
double expect_local(const StateVector& state, Pauli observable, std::size_t qubit);

}  // namespace qnnlab
