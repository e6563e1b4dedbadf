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

// Flat gate programs compiled from an architecture.
//
// A full program simulates all m qubits and measures every observable. A cone
// program for observable k keeps only the qubits of J[k][0] and, in layer l,
// only the gates on J[k][l]; gates outside the backward light cone commute
// with the Heisenberg-evolved observable, so the measured value is identical and
// parameters outside N[k] are absent, giving exactly zero derivatives.

#pragma once

#include <cstddef>
#include <vector>

#include "qnnlab/circuit.hpp"
#include "qnnlab/lightcone.hpp"

namespace qnnlab {

enum class OpKind { Rotation, Phase, CZ };

struct GateOp {
    OpKind kind = OpKind::Rotation;
    /// Local qubit indices; `b` is used by CZ only.
    std::size_t a = 0;
    std::size_t b = 0;
    Pauli axis = Pauli::X;
    /// Parameter index for rotations, encoding-angle index for phases.
    std::size_t slot = 0;
};

struct MeasuredTerm {
    std::size_t local_qubit = 0;
    Pauli observable = Pauli::Z;
    std::size_t global_qubit = 0;
};

struct GateProgram {
    /// Global qubit of each local qubit.
    std::vector<std::size_t> qubits;
    std::vector<GateOp> ops;
    std::vector<MeasuredTerm> terms;

    std::size_t num_qubits() const { return qubits.size(); }
    /// Work estimate: gate count times amplitude count.
    double cost() const;

    std::vector<Complex> simulate(const Vector& theta, const Vector& angles) const;
    /// Expectation value of every measured term.
    std::vector<double> measure(const Vector& theta, const Vector& angles) const;
    double measure_sum(const Vector& theta, const Vector& angles) const;
    /// Gradient of the summed terms, accumulated into `grad` (global parameter layout).
    void adjoint_gradient(const Vector& theta, const Vector& angles, Vector& grad) const;
};

GateProgram compile_full(const ArchitectureSpec& arch);
GateProgram compile_cone(const ArchitectureSpec& arch, const LightConeTable& table, std::size_t k);

}  // namespace qnnlab
