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

#include "qnnlab/lightcone.hpp"

#include <algorithm>
#include <deque>
#include <limits>

namespace qnnlab {

namespace {

IndexSet sorted_union(const IndexSet& a, const IndexSet& b) {
    IndexSet out;
    out.reserve(a.size() + b.size());
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

bool intersects(const IndexSet& a, const IndexSet& b) {
    auto i = a.begin();
    auto j = b.begin();
    while (i != a.end() && j != b.end()) {
        if (*i == *j) return true;
        if (*i < *j) {
            ++i;
        } else {
            ++j;
        }
    }
    return false;
}

}  // namespace

LightConeTable build_lightcones(const ArchitectureSpec& arch) {
    arch.validate();
    const std::size_t m = arch.num_qubits;
    const std::size_t L = arch.num_layers();
    LightConeTable t;
    t.num_qubits = m;
    t.num_layers = L;

    t.I.assign(L, std::vector<IndexSet>(m));
    for (std::size_t l = 0; l < L; ++l) {
        for (std::size_t k = 0; k < m; ++k) {
            t.I[l][k] = {k};
        }
        for (const auto& pair : arch.layers[l].entanglers) {
            t.I[l][pair.a] = sorted_union(t.I[l][pair.a], {pair.b});
            t.I[l][pair.b] = sorted_union(t.I[l][pair.b], {pair.a});
        }
    }

    t.J.assign(m, std::vector<IndexSet>(L));
    for (std::size_t k = 0; k < m; ++k) {
        t.J[k][L - 1] = t.I[L - 1][k];
        for (std::size_t l = L - 1; l-- > 0;) {
            IndexSet acc;
            for (std::size_t q : t.J[k][l + 1]) {
                acc = sorted_union(acc, t.I[l][q]);
            }
            t.J[k][l] = std::move(acc);
        }
    }

    t.N.assign(m, {});
    t.M.assign(L * m, {});
    for (std::size_t k = 0; k < m; ++k) {
        for (std::size_t l = 0; l < L; ++l) {
            for (std::size_t q : t.J[k][l]) {
                const std::size_t i = ParameterVector::index(l, q, m);
                t.N[k].push_back(i);
                t.M[i].push_back(k);
            }
        }
        std::sort(t.N[k].begin(), t.N[k].end());
    }

    t.P.assign(m, {});
    for (std::size_t k = 0; k < m; ++k) {
        for (std::size_t j = 0; j < m; ++j) {
            if (intersects(t.J[k][0], t.J[j][0])) {
                t.P[k].push_back(j);
            }
        }
    }

    for (const auto& s : t.M) t.maxM = std::max(t.maxM, s.size());
    for (const auto& s : t.N) t.maxN = std::max(t.maxN, s.size());
    for (const auto& s : t.P) t.D = std::max(t.D, s.size());

    auto dist = graph_distance_sets(t);
    t.Ptilde = std::move(dist.Ptilde);
    t.Dtilde = dist.Dtilde;
    return t;
}

DistanceSets graph_distance_sets(const LightConeTable& table) {
    const std::size_t m = table.P.size();
    DistanceSets out;
    out.Ptilde.assign(m, {});
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j : table.P[i]) {
            out.Ptilde[i] = sorted_union(out.Ptilde[i], table.P[j]);
        }
    }

    constexpr std::size_t kUnreached = std::numeric_limits<std::size_t>::max();
    for (std::size_t src = 0; src < m; ++src) {
        std::vector<std::size_t> dist(m, kUnreached);
        std::deque<std::size_t> queue{src};
        dist[src] = 0;
        while (!queue.empty()) {
            const std::size_t u = queue.front();
            queue.pop_front();
            if (dist[u] == 4) continue;
            for (std::size_t v : table.P[u]) {
                if (dist[v] == kUnreached) {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        const auto reached = static_cast<std::size_t>(
            std::count_if(dist.begin(), dist.end(), [](std::size_t d) { return d != kUnreached; }));
        out.Dtilde = std::max(out.Dtilde, reached);
    }
    return out;
}

nlohmann::json lightcones_to_json(const LightConeTable& table) {
    nlohmann::json doc;
    doc["m"] = table.num_qubits;
    doc["L"] = table.num_layers;
    doc["I"] = table.I;
    doc["J"] = table.J;
    doc["N"] = table.N;
    doc["M"] = table.M;
    doc["P"] = table.P;
    doc["Ptilde"] = table.Ptilde;
    doc["D"] = table.D;
    doc["Dtilde"] = table.Dtilde;
    doc["maxM"] = table.maxM;
    doc["maxN"] = table.maxN;
    return doc;
}

}  // namespace qnnlab
