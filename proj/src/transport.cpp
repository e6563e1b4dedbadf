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

#include "qnnlab/transport.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>

#include "qnnlab/errors.hpp"
#include "qnnlab/rng.hpp"

namespace qnnlab {

namespace {

void check_pair(const SampleSet& a, const SampleSet& b) {
    if (a.size() == 0) {
        throw PreconditionError("sample sets must be nonempty");
    }
    if (a.size() != b.size()) {
        throw StructuralError("sample sets have different sizes (" + std::to_string(a.size()) + " vs " +
                              std::to_string(b.size()) + ")");
    }
    if (a.dim() != b.dim()) {
        throw StructuralError("sample sets have different dimensions");
    }
    if (a.size() > kMaxTransportSamples) {
        throw PreconditionError("sample sets above " + std::to_string(kMaxTransportSamples) + " points");
    }
    if (!a.points.allFinite() || !b.points.allFinite()) {
        throw PreconditionError("sample sets contain non-finite coordinates");
    }
}

Matrix distance_matrix(const Matrix& a, const Matrix& b, double cap) {
    const Eigen::Index n = a.rows();
    Matrix cost(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            cost(i, j) = std::min((a.row(i) - b.row(j)).norm(), cap);
        }
    }
    return cost;
}

double matched_mean(const Matrix& a, const Matrix& b, double cap) {
    const Matrix cost = distance_matrix(a, b, cap);
    return solve_assignment(cost).total_cost / static_cast<double>(a.rows());
}

}  // namespace

Assignment solve_assignment(const Matrix& cost) {
    const auto n = static_cast<std::size_t>(cost.rows());
    if (cost.rows() != cost.cols()) {
        throw StructuralError("assignment cost matrix must be square");
    }
    Assignment out;
    if (n == 0) return out;
    constexpr double kInf = std::numeric_limits<double>::infinity();
    // Row-major copy so the inner scan over columns is contiguous.
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> c = cost;
    // 1-based arrays; column 0 is the virtual source of each augmenting search.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);
    for (std::size_t i = 1; i <= n; ++i) {
        match[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), kInf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = match[j0];
            double delta = kInf;
            std::size_t j1 = 0;
            const double* row = c.data() + (i0 - 1) * n;
            const double ui = u[i0];
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = row[j - 1] - ui - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    out.column.assign(n, 0);
    for (std::size_t j = 1; j <= n; ++j) {
        out.column[match[j] - 1] = j - 1;
    }
    for (std::size_t i = 0; i < n; ++i) {
        out.total_cost += cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(out.column[i]));
    }
    return out;
}

double w1_exact(const SampleSet& a, const SampleSet& b) {
    check_pair(a, b);
    return matched_mean(a.points, b.points, std::numeric_limits<double>::infinity());
}

double w1_truncated(const SampleSet& a, const SampleSet& b, double s) {
    if (!(s > 0.0)) {
        throw PreconditionError("truncation level must be positive");
    }
    check_pair(a, b);
    return matched_mean(a.points, b.points, s);
}

double w1_gaussian_1d(double mu1, double sigma1, double mu2, double sigma2) {
    if (sigma1 < 0.0 || sigma2 < 0.0) {
        throw PreconditionError("standard deviations must be nonnegative");
    }
    if (sigma1 != sigma2) {
        throw PreconditionError("closed form requires equal standard deviations");
    }
    return std::abs(mu1 - mu2);
}

W1Estimate w1_bootstrap(const SampleSet& a, const SampleSet& b, std::size_t resamples, std::uint64_t seed,
                        double s) {
    check_pair(a, b);
    if (!(s > 0.0)) {
        throw PreconditionError("truncation level must be positive");
    }
    W1Estimate est;
    est.value = matched_mean(a.points, b.points, s);
    est.resamples = resamples;
    if (resamples < 2) return est;
    const auto n = static_cast<Eigen::Index>(a.size());
    Rng rng(seed);
    Matrix ra(n, a.points.cols());
    Matrix rb(n, b.points.cols());
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t r = 0; r < resamples; ++r) {
        for (Eigen::Index i = 0; i < n; ++i) {
            ra.row(i) = a.points.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n))));
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            rb.row(i) = b.points.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n))));
        }
        const double w = matched_mean(ra, rb, s);
        sum += w;
        sum_sq += w * w;
    }
    const double R = static_cast<double>(resamples);
    const double mean = sum / R;
    est.bootstrap_se = std::sqrt(std::max(0.0, (sum_sq - R * mean * mean) / (R - 1.0)));
    return est;
}

SampleSet read_samples_csv(std::istream& in) {
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
                if (cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                throw StructuralError("sample CSV line " + std::to_string(line_no) + ": bad number '" + cell + "'");
            }
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw StructuralError("sample CSV line " + std::to_string(line_no) + ": inconsistent dimension");
        }
        rows.push_back(std::move(row));
    }
    const std::size_t d = rows.empty() ? 0 : rows.front().size();
    Matrix pts(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            pts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    return SampleSet(std::move(pts));
}

void write_samples_csv(std::ostream& out, const SampleSet& set) {
    char buf[32];
    for (Eigen::Index i = 0; i < set.points.rows(); ++i) {
        for (Eigen::Index j = 0; j < set.points.cols(); ++j) {
            if (j > 0) out << ',';
            std::snprintf(buf, sizeof buf, "%.17g", set.points(i, j));
            out << buf;
        }
        out << '\n';
    }
}

}  // namespace qnnlab
