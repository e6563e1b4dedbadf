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

// Exact Wasserstein-1 between equal-size uniform empirical measures.

#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <vector>

#include "qnnlab/linalg.hpp"

namespace qnnlab {

inline constexpr std::size_t kMaxTransportSamples = 4096;

/// S points of dimension d, one per row, each with weight 1/S.
struct SampleSet {
    Matrix points;

    SampleSet() = default;
    explicit SampleSet(Matrix p) : points(std::move(p)) {}
    std::size_t size() const { return static_cast<std::size_t>(points.rows()); }
    std::size_t dim() const { return static_cast<std::size_t>(points.cols()); }
};

struct Assignment {
    /// Column matched to each row.
    std::vector<std::size_t> column;
    double total_cost = 0.0;
};

/// Minimum-cost perfect matching on a square cost matrix by shortest augmenting
/// paths with dual potentials. O(S^3).
Assignment solve_assignment(const Matrix& cost);

/// min over permutations of (1/S) sum_i ||a_i - b_sigma(i)||_2.
double w1_exact(const SampleSet& a, const SampleSet& b);

/// Same with cost min(||a - b||_2, s). Requires s > 0.
double w1_truncated(const SampleSet& a, const SampleSet& b, double s);

/// Closed form |mu1 - mu2| between two normals with a common standard deviation.
double w1_gaussian_1d(double mu1, double sigma1, double mu2, double sigma2);

struct W1Estimate {
    double value = 0.0;
    double bootstrap_se = 0.0;
    std::size_t resamples = 0;
};

/// Plug-in distance plus the standard deviation of `resamples` bootstrap
/// replicates (both sets resampled with replacement). An infinite `s` selects
/// the untruncated cost.
W1Estimate w1_bootstrap(const SampleSet& a, const SampleSet& b, std::size_t resamples, std::uint64_t seed,
                        double s = std::numeric_limits<double>::infinity());

/// One point per row, comma separated; lines starting with '#' are skipped.
SampleSet read_samples_csv(std::istream& in);
void write_samples_csv(std::ostream& out, const SampleSet& set);

}  // namespace qnnlab
