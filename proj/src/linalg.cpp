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

#include "qnnlab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "qnnlab/errors.hpp"

namespace qnnlab {

SymmetricEigen jacobi_eigen(const Matrix& input, double tol, int max_sweeps) {
    if (input.rows() != input.cols()) {
        throw StructuralError("jacobi_eigen: matrix is not square");
    }
    const Eigen::Index n = input.rows();
    Matrix a(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double v = input(i, j);
            if (!std::isfinite(v)) {
                throw PreconditionError("jacobi_eigen: non-finite matrix entry");
            }
            a(i, j) = v;
            a(j, i) = v;
        }
    }
    Matrix v = Matrix::Identity(n, n);
    SymmetricEigen out;

    const double scale = a.norm();
    auto off_norm = [&]() {
        double s = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = i + 1; j < n; ++j) {
                s += a(i, j) * a(i, j);
            }
        }
        return std::sqrt(2.0 * s);
    };

    int sweep = 0;
    while (sweep < max_sweeps && off_norm() > tol * scale) {
        ++sweep;
        for (Eigen::Index p = 0; p < n - 1; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) {
                    continue;
                }
                // Rotation angle that annihilates a(p,q) (Rutishauser's form).
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    out.sweeps = sweep;

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index x, Eigen::Index y) { return a(x, x) < a(y, y); });
    out.values.resize(n);
    out.vectors.resize(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        out.values(k) = a(order[k], order[k]);
        out.vectors.col(k) = v.col(order[k]);
    }
    return out;
}

double min_eigenvalue(const Matrix& a) {
    if (a.rows() == 0) {
        throw StructuralError("min_eigenvalue: empty matrix");
    }
    return jacobi_eigen(a).values(0);
}

double max_eigenvalue(const Matrix& a) {
    if (a.rows() == 0) {
        throw StructuralError("max_eigenvalue: empty matrix");
    }
    const auto eig = jacobi_eigen(a);
    return eig.values(eig.values.size() - 1);
}

double op_norm_symmetric(const Matrix& a) {
    const auto eig = jacobi_eigen(a);
    return std::max(std::abs(eig.values(0)), std::abs(eig.values(eig.values.size() - 1)));
}

double op_norm(const Matrix& a) {
    if (a.size() == 0) {
        return 0.0;
    }
    const Matrix gram = a.transpose() * a;
    return std::sqrt(std::max(0.0, max_eigenvalue(gram)));
}

Matrix apply_spectral(const SymmetricEigen& eig, const std::function<double(double)>& fn) {
    Vector d(eig.values.size());
    for (Eigen::Index k = 0; k < d.size(); ++k) {
        d(k) = fn(eig.values(k));
    }
    return eig.vectors * d.asDiagonal() * eig.vectors.transpose();
}

Matrix psd_factor(const Matrix& a, double jitter, double tolerance) {
    const auto eig = jacobi_eigen(a);
    Vector root(eig.values.size());
    for (Eigen::Index k = 0; k < root.size(); ++k) {
        const double lambda = eig.values(k);
        if (lambda < -tolerance) {
            throw AssumptionFailure("psd_factor: covariance has eigenvalue " +
                                    std::to_string(lambda) + " below tolerance");
        }
        root(k) = std::sqrt(std::max(lambda, 0.0) + jitter);
    }
    return eig.vectors * root.asDiagonal();
}

double asymmetry(const Matrix& a) {
    if (a.rows() != a.cols()) {
        throw StructuralError("asymmetry: matrix is not square");
    }
    return (a - a.transpose()).cwiseAbs().maxCoeff();
}

}  // namespace qnnlab
