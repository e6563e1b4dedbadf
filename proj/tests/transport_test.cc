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

#include <algorithm>
#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qnnlab/errors.hpp"
#include "qnnlab/rng.hpp"

namespace qnnlab {
namespace {

SampleSet random_cloud(std::size_t n, std::size_t d, Rng& rng, double shift = 0.0) {
    Matrix p(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < p.rows(); ++i)
        for (Eigen::Index j = 0; j < p.cols(); ++j) p(i, j) = rng.normal() + shift;
    return SampleSet(p);
}

Matrix pairwise(const SampleSet& a, const SampleSet& b, double cap) {
    Matrix c(a.points.rows(), b.points.rows());
    for (Eigen::Index i = 0; i < c.rows(); ++i)
        for (Eigen::Index j = 0; j < c.cols(); ++j) c(i, j) = std::min((a.points.row(i) - b.points.row(j)).norm(), cap);
    return c;
}

SampleSet points_1d(std::initializer_list<double> v) {
    Matrix p(static_cast<Eigen::Index>(v.size()), 1);
    Eigen::Index i = 0;
    for (double x : v) p(i++, 0) = x;
    return SampleSet(p);
}

TEST(Transport, TrivialCases) {
    Rng rng(1);
    const auto a = random_cloud(7, 3, rng);
    EXPECT_DOUBLE_EQ(w1_exact(a, a), 0.0);
    EXPECT_DOUBLE_EQ(w1_exact(points_1d({0.0}), points_1d({3.0})), 3.0);
    EXPECT_DOUBLE_EQ(w1_truncated(points_1d({0.0}), points_1d({3.0}), 1.0), 1.0);
}

TEST(Transport, LargeTruncationEqualsExact) {
    Rng rng(2);
    const auto a = random_cloud(12, 2, rng);
    const auto b = random_cloud(12, 2, rng, 0.5);
    const double diameter = pairwise(a, b, 1e300).maxCoeff();
    EXPECT_NEAR(w1_truncated(a, b, diameter), w1_exact(a, b), 1e-14);
}

TEST(Transport, MatchesPermutationBruteForce) {
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 5 + static_cast<std::size_t>(trial % 2);
        const auto a = random_cloud(n, 2, rng);
        const auto b = random_cloud(n, 2, rng, 0.3);
        const Matrix full = pairwise(a, b, 1e300);
        EXPECT_NEAR(w1_exact(a, b), oracle::brute_force_assignment(full), 1e-12);
        std::vector<double> d(full.data(), full.data() + full.size());
        std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2), d.end());
        const double s = d[d.size() / 2];
        EXPECT_NEAR(w1_truncated(a, b, s), oracle::brute_force_assignment(pairwise(a, b, s)), 1e-12);
    }
}

TEST(Transport, AssignmentIsPermutation) {
    Rng rng(4);
    Matrix c(9, 9);
    for (Eigen::Index i = 0; i < 9; ++i)
        for (Eigen::Index j = 0; j < 9; ++j) c(i, j) = rng.uniform();
    const auto as = solve_assignment(c);
    std::vector<std::size_t> cols = as.column;
    std::sort(cols.begin(), cols.end());
    for (std::size_t i = 0; i < 9; ++i) EXPECT_EQ(cols[i], i);
    EXPECT_NEAR(as.total_cost, 9 * oracle::brute_force_assignment(c), 1e-12);
}

TEST(Transport, OneDimensionalSortedMatching) {
    Rng rng(5);
    const auto a = random_cloud(200, 1, rng);
    const auto b = random_cloud(200, 1, rng, 0.7);
    std::vector<double> x(a.points.data(), a.points.data() + 200), y(b.points.data(), b.points.data() + 200);
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    double sorted = 0.0;
    for (std::size_t i = 0; i < 200; ++i) sorted += std::abs(x[i] - y[i]);
    EXPECT_NEAR(w1_exact(a, b), sorted / 200, 1e-12);
}

TEST(Transport, MetricAxioms) {
    Rng rng(6);
    for (int trial = 0; trial < 20; ++trial) {
        const auto a = random_cloud(6, 2, rng);
        const auto b = random_cloud(6, 2, rng, 0.4);
        const auto c = random_cloud(6, 2, rng, -0.2);
        for (double s : {std::numeric_limits<double>::infinity(), 0.8}) {
            auto w = [s](const SampleSet& p, const SampleSet& q) {
                return std::isinf(s) ? w1_exact(p, q) : w1_truncated(p, q, s);
            };
            EXPECT_GE(w(a, b), 0.0);
            EXPECT_NEAR(w(a, b), w(b, a), 1e-10);
            EXPECT_LE(w(a, c), w(a, b) + w(b, c) + 1e-10);
            EXPECT_NEAR(w(a, a), 0.0, 1e-10);
        }
    }
}

TEST(Transport, GaussianClosedForm) {
    EXPECT_DOUBLE_EQ(w1_gaussian_1d(0, 1, 0, 1), 0.0);
    EXPECT_DOUBLE_EQ(w1_gaussian_1d(0, 1, 2, 1), 2.0);
    EXPECT_THROW(w1_gaussian_1d(0, 1, 0, 2), PreconditionError);
    EXPECT_THROW(w1_gaussian_1d(0, -1, 0, -1), PreconditionError);
    Rng rng(7);
    const auto a = random_cloud(1024, 1, rng);
    const auto b = random_cloud(1024, 1, rng, 2.0);
    // The sample-mean gap alone has standard deviation sqrt(2 / S).
    EXPECT_NEAR(w1_exact(a, b), 2.0, 3 * std::sqrt(2.0 / 1024));
}

TEST(Transport, Bootstrap) {
    Rng rng(8);
    const auto a = random_cloud(40, 2, rng);
    const auto b = random_cloud(40, 2, rng, 0.5);
    const auto est = w1_bootstrap(a, b, 50, 11);
    EXPECT_DOUBLE_EQ(est.value, w1_exact(a, b));
    EXPECT_GT(est.bootstrap_se, 0.0);
    EXPECT_LT(est.bootstrap_se, est.value);
    EXPECT_EQ(est.resamples, 50u);
    const auto again = w1_bootstrap(a, b, 50, 11);
    EXPECT_EQ(again.bootstrap_se, est.bootstrap_se);
    EXPECT_EQ(w1_bootstrap(a, b, 1, 11).bootstrap_se, 0.0);
    EXPECT_DOUBLE_EQ(w1_bootstrap(a, b, 5, 11, 0.3).value, w1_truncated(a, b, 0.3));
}

TEST(Transport, RejectsMismatchedSets) {
    Rng rng(9);
    EXPECT_THROW(w1_exact(random_cloud(3, 2, rng), random_cloud(4, 2, rng)), StructuralError);
    EXPECT_THROW(w1_exact(random_cloud(3, 2, rng), random_cloud(3, 1, rng)), StructuralError);
    EXPECT_THROW(w1_exact(SampleSet(), SampleSet()), PreconditionError);
    EXPECT_THROW(w1_truncated(points_1d({0}), points_1d({1}), 0.0), PreconditionError);
}

TEST(SamplesCsv, RoundTripAndComments) {
    Rng rng(10);
    const auto a = random_cloud(5, 3, rng);
    std::stringstream buf;
    buf << "# header comment\n";
    write_samples_csv(buf, a);
    const auto back = read_samples_csv(buf);
    EXPECT_EQ(back.points, a.points);
    std::stringstream bad("1,2\n3,x\n");
    EXPECT_THROW(read_samples_csv(bad), StructuralError);
    std::stringstream ragged("1,2\n3\n");
    EXPECT_THROW(read_samples_csv(ragged), StructuralError);
}

}  // namespace
}  // namespace qnnlab
