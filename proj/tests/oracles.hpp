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

// Independent reference computations used by the tests. None of these share
// code with the library paths they check.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "qnnlab/circuit.hpp"

namespace qnnlab::oracle {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline CMatrix pauli(Pauli p) {
    CMatrix m(2, 2);
    const std::complex<double> i{0.0, 1.0};
    switch (p) {
        case Pauli::X:
            m << 0, 1, 1, 0;
            break;
        case Pauli::Y:
            m << 0, -i, i, 0;
            break;
        case Pauli::Z:
            m << 1, 0, 0, -1;
            break;
    }
    return m;
}

/// exp(-i theta G) = cos(theta) I - i sin(theta) G for an involution G.
inline CMatrix rotation(Pauli g, double theta) {
    const std::complex<double> i{0.0, 1.0};
    return std::cos(theta) * CMatrix::Identity(2, 2) - i * std::sin(theta) * pauli(g);
}

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
        for (Eigen::Index c = 0; c < a.cols(); ++c) {
            out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
        }
    }
    return out;
}

/// Single-qubit operator on qubit k of m, with qubit 0 as the least significant bit.
inline CMatrix embed(const CMatrix& g, std::size_t k, std::size_t m) {
    CMatrix out = CMatrix::Identity(1, 1);
    for (std::size_t q = m; q-- > 0;) {
        out = kron(out, q == k ? g : CMatrix::Identity(2, 2));
    }
    return out;
}

inline CMatrix cz(std::size_t a, std::size_t b, std::size_t m) {
    const std::size_t dim = std::size_t{1} << m;
    CMatrix out = CMatrix::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; ++i) {
        if (((i >> a) & 1U) && ((i >> b) & 1U)) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = -1.0;
    }
    return out;
}

/// Dense unitary of the whole circuit.
inline CMatrix circuit_unitary(const ArchitectureSpec& arch, const Vector& theta, const Vector& x) {
    const std::size_t m = arch.num_qubits;
    const Vector angles = arch.encoding_weights * x;
    const auto dim = static_cast<Eigen::Index>(std::size_t{1} << m);
    CMatrix u = CMatrix::Identity(dim, dim);
    for (std::size_t l = 0; l < arch.num_layers(); ++l) {
        for (std::size_t k = 0; k < m; ++k) {
            const auto i = static_cast<Eigen::Index>(l * m + k);
            u = embed(rotation(arch.layers[l].generators[k], theta(i)), k, m) * u;
        }
        for (std::size_t k = 0; k < m; ++k) {
            const auto i = static_cast<Eigen::Index>(l * m + k);
            u = embed(rotation(Pauli::Z, angles(i)), k, m) * u;
        }
        for (const auto& p : arch.layers[l].entanglers) {
            u = cz(p.a, p.b, m) * u;
        }
    }
    return u;
}

/// <O_k> for every k from the dense unitary.
inline std::vector<double> local_expectations(const ArchitectureSpec& arch, const Vector& theta, const Vector& x) {
    const CVector psi = circuit_unitary(arch, theta, x).col(0);
    std::vector<double> out;
    for (std::size_t k = 0; k < arch.num_qubits; ++k) {
        const CMatrix o = embed(pauli(arch.observables[k]), k, arch.num_qubits);
        out.push_back((psi.adjoint() * o * psi)(0, 0).real());
    }
    return out;
}

/// Exhaustive minimum over permutations of the mean matched cost.
inline double brute_force_assignment(const Eigen::MatrixXd& cost) {
    const auto n = static_cast<std::size_t>(cost.rows());
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    double best = std::numeric_limits<double>::infinity();
    do {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(perm[i]));
        best = std::min(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best / static_cast<double>(n);
}

/// All-pairs shortest path lengths on an unweighted graph given by adjacency lists.
inline std::vector<std::vector<std::size_t>> floyd_warshall(const std::vector<std::vector<std::size_t>>& adj) {
    const std::size_t n = adj.size();
    const std::size_t inf = std::numeric_limits<std::size_t>::max() / 4;
    std::vector<std::vector<std::size_t>> d(n, std::vector<std::size_t>(n, inf));
    for (std::size_t i = 0; i < n; ++i) {
        d[i][i] = 0;
        for (std::size_t j : adj[i]) d[i][j] = std::min<std::size_t>(d[i][j], i == j ? 0 : 1);
    }
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
    return d;
}

/// Classical fixed-step fourth-order Runge-Kutta.
template <typename F>
Eigen::VectorXd rk4(F&& f, Eigen::VectorXd y, double t0, double t1, std::size_t steps) {
    const double h = (t1 - t0) / static_cast<double>(steps);
    double t = t0;
    for (std::size_t s = 0; s < steps; ++s) {
        const Eigen::VectorXd k1 = f(t, y);
        const Eigen::VectorXd k2 = f(t + h / 2, y + h / 2 * k1);
        const Eigen::VectorXd k3 = f(t + h / 2, y + h / 2 * k2);
        const Eigen::VectorXd k4 = f(t + h, y + h * k3);
        y += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
        t += h;
    }
    return y;
}

/// Composite Simpson rule on [a, b] with n (even) panels.
template <typename F>
double simpson(F&& f, double a, double b, std::size_t n) {
    const double h = (b - a) / static_cast<double>(n);
    double s = f(a) + f(b);
    for (std::size_t i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + h * static_cast<double>(i));
    return s * h / 3.0;
}

/// Gamma(z) for z > 0 by quadrature of t^{z-1} e^{-t} on [0, 60]. Arguments
/// below 4 are shifted with Gamma(z) = Gamma(z + 1) / z so the integrand stays smooth at zero.
inline double gamma_quadrature(double z) {
    if (z < 4.0) return gamma_quadrature(z + 1.0) / z;
    return simpson([z](double t) { return t == 0.0 ? 0.0 : std::pow(t, z - 1.0) * std::exp(-t); },
                   0.0, 60.0, 200000);
}

}  // namespace qnnlab::oracle
