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

#include "qnnlab/program.hpp"

#include <algorithm>
#include <cmath>

#include "qnnlab/errors.hpp"

namespace qnnlab {

namespace {

void apply_op(std::span<Complex> amps, const GateOp& op, const Vector& theta, const Vector& angles,
              bool inverse) {
    const double sign = inverse ? -1.0 : 1.0;
    switch (op.kind) {
        case OpKind::Rotation:
            apply_rotation(amps, op.a, op.axis, sign * theta(static_cast<Eigen::Index>(op.slot)));
            break;
        case OpKind::Phase:
            apply_phase(amps, op.a, sign * angles(static_cast<Eigen::Index>(op.slot)));
            break;
        case OpKind::CZ:
            apply_cz(amps, op.a, op.b);
            break;
    }
}

GateProgram compile_restricted(const ArchitectureSpec& arch, const std::vector<IndexSet>& support,
                               const std::vector<std::size_t>& measured) {
    const std::size_t m = arch.num_qubits;
    GateProgram prog;
    prog.qubits = support.empty() ? IndexSet{} : support.front();
    std::vector<std::size_t> local(m, m);
    for (std::size_t i = 0; i < prog.qubits.size(); ++i) {
        local[prog.qubits[i]] = i;
    }
    for (std::size_t l = 0; l < arch.num_layers(); ++l) {
        std::vector<bool> active(m, false);
        for (std::size_t q : support[l]) active[q] = true;
        const auto& layer = arch.layers[l];
        for (std::size_t q = 0; q < m; ++q) {
            if (!active[q]) continue;
            prog.ops.push_back({OpKind::Rotation, local[q], 0, layer.generators[q],
                                ParameterVector::index(l, q, m)});
        }
        for (std::size_t q = 0; q < m; ++q) {
            if (!active[q]) continue;
            prog.ops.push_back({OpKind::Phase, local[q], 0, Pauli::Z, ParameterVector::index(l, q, m)});
        }
        for (const auto& pair : layer.entanglers) {
            if (active[pair.a] && active[pair.b]) {
                prog.ops.push_back({OpKind::CZ, local[pair.a], local[pair.b], Pauli::Z, 0});
            }
        }
    }
    for (std::size_t k : measured) {
        prog.terms.push_back({local[k], arch.observables[k], k});
    }
    return prog;
}

}  // namespace

double GateProgram::cost() const {
    return static_cast<double>(ops.size() + terms.size()) * std::ldexp(1.0, static_cast<int>(qubits.size()));
}

std::vector<Complex> GateProgram::simulate(const Vector& theta, const Vector& angles) const {
    if (qubits.size() > kMaxDenseQubits) {
        throw StructuralError("gate program spans " + std::to_string(qubits.size()) + " qubits, above the dense limit");
    }
    std::vector<Complex> amps(std::size_t{1} << qubits.size(), Complex{0.0, 0.0});
    amps[0] = 1.0;
    for (const auto& op : ops) {
        apply_op(amps, op, theta, angles, false);
    }
    return amps;
}

std::vector<double> GateProgram::measure(const Vector& theta, const Vector& angles) const {
    const auto amps = simulate(theta, angles);
    std::vector<double> out;
    out.reserve(terms.size());
    for (const auto& term : terms) {
        out.push_back(expect_pauli(amps, term.local_qubit, term.observable));
    }
    return out;
}

double GateProgram::measure_sum(const Vector& theta, const Vector& angles) const {
    double s = 0.0;
    for (double v : measure(theta, angles)) {
        s += v;
    }
    return s;
}

void GateProgram::adjoint_gradient(const Vector& theta, const Vector& angles, Vector& grad) const {
    auto phi = simulate(theta, angles);
    std::vector<Complex> lambda(phi.size(), Complex{0.0, 0.0});
    std::vector<Complex> scratch;
    for (const auto& term : terms) {
        scratch = phi;
        apply_pauli(scratch, term.local_qubit, term.observable);
        for (std::size_t i = 0; i < lambda.size(); ++i) {
            lambda[i] += scratch[i];
        }
    }
    // d/dtheta exp(-i theta G) = -i G exp(-i theta G), so each derivative is
    // 2 Re <lambda| -i G |phi> = 2 Im <lambda| G |phi> with phi taken after the gate.
    for (auto it = ops.rbegin(); it != ops.rend(); ++it) {
        const GateOp& op = *it;
        if (op.kind == OpKind::Rotation) {
            scratch = phi;
            apply_pauli(scratch, op.a, op.axis);
            Complex overlap{0.0, 0.0};
            for (std::size_t i = 0; i < lambda.size(); ++i) {
                overlap += std::conj(lambda[i]) * scratch[i];
            }
            grad(static_cast<Eigen::Index>(op.slot)) += 2.0 * overlap.imag();
        }
        apply_op(phi, op, theta, angles, true);
        apply_op(lambda, op, theta, angles, true);
    }
}

GateProgram compile_full(const ArchitectureSpec& arch) {
    arch.validate();
    IndexSet all(arch.num_qubits);
    for (std::size_t q = 0; q < all.size(); ++q) all[q] = q;
    const std::vector<IndexSet> support(arch.num_layers(), all);
    return compile_restricted(arch, support, all);
}

GateProgram compile_cone(const ArchitectureSpec& arch, const LightConeTable& table, std::size_t k) {
    if (k >= arch.num_qubits || table.J.size() != arch.num_qubits) {
        throw StructuralError("light-cone table does not match the architecture");
    }
    return compile_restricted(arch, table.J[k], {k});
}

}  // namespace qnnlab
