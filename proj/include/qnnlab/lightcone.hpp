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

// Causal dependency sets of a layered circuit.

#pragma once

#include <cstddef>
#include <vector>

#include <nlohmann/json.hpp>

#include "qnnlab/circuit.hpp"

namespace qnnlab {

/// Sorted, duplicate-free list of indices.
using IndexSet = std::vector<std::size_t>;

struct LightConeTable {
    std::size_t num_qubits = 0;
    std::size_t num_layers = 0;
    /// I[l][k]: qubit k together with its entangling partner in layer l.
    std::vector<std::vector<IndexSet>> I;
    /// J[k][l]: qubits whose layer-l gates can reach observable k.
    std::vector<std::vector<IndexSet>> J;
    /// N[k]: parameter indices m*l + k' with k' in J[k][l].
    std::vector<IndexSet> N;
    /// M[i]: observables reachable from parameter i. Dual of N.
    std::vector<IndexSet> M;
    /// P[k]: observables whose first-layer supports overlap that of k.
    std::vector<IndexSet> P;
    /// Ptilde[k]: union of P[j] over j in P[k].
    std::vector<IndexSet> Ptilde;
    std::size_t D = 0;
    std::size_t Dtilde = 0;
    std::size_t maxM = 0;
    std::size_t maxN = 0;
};

/// Fills every set by the backward recursion from the last layer, then the
/// graph-distance summaries.
LightConeTable build_lightcones(const ArchitectureSpec& arch);

struct DistanceSets {
    std::vector<IndexSet> Ptilde;
    /// max_k |{ j : dist(k, j) <= 4 }| on the graph whose edges are the P relation.
    std::size_t Dtilde = 0;
};

DistanceSets graph_distance_sets(const LightConeTable& table);

nlohmann::json lightcones_to_json(const LightConeTable& table);

}  // namespace qnnlab
