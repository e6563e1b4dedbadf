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

// Small dense symmetric linear algebra. Kernel matrices here are at most a few
// dozen rows, so everything goes through one cyclic Jacobi eigensolve.

#pragma once

#include <functional>

#include <Eigen/Dense>

namespace qnnlab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Eigen-decomposition A = V diag(values) V^T of a symmetric matrix.
/// Eigenvalues are sorted ascending; columns of `vectors` are orthonormal.
struct SymmetricEigen {
    Vector values;
    Matrix vectors;
    int sweeps = 0;
};

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm falls below
/// `tol` times the matrix norm. Throws StructuralError for non-square input and
/// PreconditionError for non-finite entries. Only the lower triangle is read.
SymmetricEigen jacobi_eigen(const Matrix& a, double tol = 1e-15, int max_sweeps = 100);

double min_eigenvalue(const Matrix& a);
double max_eigenvalue(const Matrix& a);

/// Spectral norm of a symmetric matrix (largest |eigenvalue|).
double op_norm_symmetric(const Matrix& a);

/// Spectral norm of a general matrix, via the Gram matrix A^T A.
double op_norm(const Matrix& a);

/// V diag(fn(lambda)) V^T.
Matrix apply_spectral(const SymmetricEigen& eig, const std::function<double(double)>& fn);

/// Symmetric square-root-like factor B with B B^T = A + jitter I, computed from the
/// eigen-decomposition. Eigenvalues below -tolerance are rejected (AssumptionFailure);
/// slightly negative ones are clamped to zero.
Matrix psd_factor(const Matrix& a, double jitter = 1e-10, double tolerance = 1e-8);

/// max |A - A^T|.
double asymmetry(const Matrix& a);

}  // namespace qnnlab
