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

#include "qnnlab/circuit.hpp"

#include <cmath>
#include <numbers>

#include "qnnlab/errors.hpp"
#include "qnnlab/rng.hpp"

namespace qnnlab {

namespace {

constexpr Complex kI{0.0, 1.0};

std::size_t dim_of(std::span<const Complex> amps) { return amps.size(); }

void check_qubit(std::span<const Complex> amps, std::size_t qubit) {
    if ((std::size_t{1} << qubit) >= dim_of(amps)) {
        throw StructuralError("qubit index " + std::to_string(qubit) + " out of range");
    }
}

}  // namespace

char pauli_name(Pauli p) {
    switch (p) {
        case Pauli::X:
            return 'X';
        case Pauli::Y:
            return 'Y';
        case Pauli::Z:
            return 'Z';
    }
    return '?';
}

Pauli pauli_from_name(const std::string& name) {
    if (name == "X" || name == "x") return Pauli::X;
    if (name == "Y" || name == "y") return Pauli::Y;
    if (name == "Z" || name == "z") return Pauli::Z;
    throw StructuralError("unknown Pauli axis '" + name + "'");
}

std::array<Complex, 4> pauli_matrix(Pauli p) {
    switch (p) {
        case Pauli::X:
            return {Complex{0, 0}, Complex{1, 0}, Complex{1, 0}, Complex{0, 0}};
        case Pauli::Y:
            return {Complex{0, 0}, -kI, kI, Complex{0, 0}};
        case Pauli::Z:
            return {Complex{1, 0}, Complex{0, 0}, Complex{0, 0}, Complex{-1, 0}};
    }
    return {};
}

void apply_rotation(std::span<Complex> amps, std::size_t qubit, Pauli generator, double theta) {
    check_qubit(amps, qubit);
    const std::size_t stride = std::size_t{1} << qubit;
    const std::size_t n = amps.size();
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    switch (generator) {
        case Pauli::X: {
            const Complex ms{0.0, -s};
            for (std::size_t base = 0; base < n; base += 2 * stride) {
                for (std::size_t i = base; i < base + stride; ++i) {
                    const Complex a0 = amps[i];
                    const Complex a1 = amps[i + stride];
                    amps[i] = c * a0 + ms * a1;
                    amps[i + stride] = ms * a0 + c * a1;
                }
            }
            break;
        }
        case Pauli::Y: {
            for (std::size_t base = 0; base < n; base += 2 * stride) {
                for (std::size_t i = base; i < base + stride; ++i) {
                    const Complex a0 = amps[i];
                    const Complex a1 = amps[i + stride];
                    amps[i] = c * a0 - s * a1;
                    amps[i + stride] = s * a0 + c * a1;
                }
            }
            break;
        }
        case Pauli::Z:
            apply_phase(amps, qubit, theta);
            break;
    }
}

void apply_rotation_adjoint(std::span<Complex> amps, std::size_t qubit, Pauli generator, double theta) {
    apply_rotation(amps, qubit, generator, -theta);
}

void apply_pauli(std::span<Complex> amps, std::size_t qubit, Pauli p) {
    check_qubit(amps, qubit);
    const std::size_t stride = std::size_t{1} << qubit;
    const std::size_t n = amps.size();
    for (std::size_t base = 0; base < n; base += 2 * stride) {
        for (std::size_t i = base; i < base + stride; ++i) {
            const Complex a0 = amps[i];
            const Complex a1 = amps[i + stride];
            switch (p) {
                case Pauli::X:
                    amps[i] = a1;
                    amps[i + stride] = a0;
                    break;
                case Pauli::Y:
                    amps[i] = -kI * a1;
                    amps[i + stride] = kI * a0;
                    break;
                case Pauli::Z:
                    amps[i + stride] = -a1;
                    break;
            }
        }
    }
}

void apply_phase(std::span<Complex> amps, std::size_t qubit, double phi) {
    check_qubit(amps, qubit);
    const std::size_t stride = std::size_t{1} << qubit;
    const std::size_t n = amps.size();
    const Complex down = std::polar(1.0, -phi);
    const Complex up = std::polar(1.0, phi);
    for (std::size_t base = 0; base < n; base += 2 * stride) {
        for (std::size_t i = base; i < base + stride; ++i) {
            amps[i] *= down;
            amps[i + stride] *= up;
        }
    }
}

void apply_cz(std::span<Complex> amps, std::size_t a, std::size_t b) {
    check_qubit(amps, a);
    check_qubit(amps, b);
    if (a == b) {
        throw StructuralError("CZ on a single qubit");
    }
    const std::size_t mask = (std::size_t{1} << a) | (std::size_t{1} << b);
    for (std::size_t i = 0; i < amps.size(); ++i) {
        if ((i & mask) == mask) {
            amps[i] = -amps[i];
        }
    }
}

double expect_pauli(std::span<const Complex> amps, std::size_t qubit, Pauli p) {
    check_qubit(amps, qubit);
    const std::size_t stride = std::size_t{1} << qubit;
    const std::size_t n = amps.size();
    double acc = 0.0;
    for (std::size_t base = 0; base < n; base += 2 * stride) {
        for (std::size_t i = base; i < base + stride; ++i) {
            const Complex a0 = amps[i];
            const Complex a1 = amps[i + stride];
            switch (p) {
                case Pauli::X:
                    acc += 2.0 * (std::conj(a0) * a1).real();
                    break;
                case Pauli::Y:
                    acc += 2.0 * (std::conj(a0) * a1).imag();
                    break;
                case Pauli::Z:
                    acc += std::norm(a0) - std::norm(a1);
                    break;
            }
        }
    }
    return acc;
}

std::vector<QubitPair> brickwall_pairs(std::size_t num_qubits, std::size_t layer, bool periodic) {
    std::vector<QubitPair> pairs;
    const std::size_t offset = layer % 2;
    for (std::size_t a = offset; a + 1 < num_qubits; a += 2) {
        pairs.push_back({a, a + 1});
    }
    // Wrap-around pair only when it keeps the layer's gates disjoint.
    if (periodic && offset == 1 && num_qubits > 2 && num_qubits % 2 == 0) {
        pairs.push_back({num_qubits - 1, 0});
    }
    return pairs;
}

void ArchitectureSpec::validate() const {
    if (num_qubits == 0) {
        throw StructuralError("architecture needs at least one qubit");
    }
    if (num_qubits > max_qubits) {
        throw StructuralError("architecture has " + std::to_string(num_qubits) +
                              " qubits, above the cap of " + std::to_string(max_qubits));
    }
    if (layers.empty()) {
        throw StructuralError("architecture needs at least one layer (L >= 1)");
    }
    if (observables.size() != num_qubits) {
        throw StructuralError("one observable per qubit is required");
    }
    if (input_dim == 0) {
        throw StructuralError("input_dim must be positive");
    }
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& layer = layers[l];
        if (layer.generators.size() != num_qubits) {
            throw StructuralError("layer " + std::to_string(l) + " must have one generator per qubit");
        }
        std::vector<bool> used(num_qubits, false);
        for (const auto& pair : layer.entanglers) {
            if (pair.a >= num_qubits || pair.b >= num_qubits || pair.a == pair.b) {
                throw StructuralError("layer " + std::to_string(l) + " has an invalid qubit pair");
            }
            if (used[pair.a] || used[pair.b]) {
                throw StructuralError("layer " + std::to_string(l) +
                                      " has entanglers acting on overlapping qubits");
            }
            used[pair.a] = true;
            used[pair.b] = true;
        }
    }
    if (static_cast<std::size_t>(encoding_weights.rows()) != num_params() ||
        static_cast<std::size_t>(encoding_weights.cols()) != input_dim) {
        throw StructuralError("encoding weight matrix has the wrong shape");
    }
}

Vector ArchitectureSpec::encoding_angles(const Input& x) const {
    if (static_cast<std::size_t>(x.size()) != input_dim) {
        throw StructuralError("input has dimension " + std::to_string(x.size()) + ", expected " +
                              std::to_string(input_dim));
    }
    return encoding_weights * x;
}

namespace {

Matrix draw_encoding_weights(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    Rng rng(derive_seed(seed, 0xE1C0DE));
    Matrix w(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
        for (Eigen::Index c = 0; c < w.cols(); ++c) {
            w(r, c) = rng.normal();
        }
    }
    return w;
}

std::vector<QubitPair> pattern_pairs(const std::string& pattern, std::size_t m, std::size_t layer) {
    if (pattern == "none") return {};
    if (pattern == "brickwall") return brickwall_pairs(m, layer, false);
    if (pattern == "ring") return brickwall_pairs(m, layer, true);
    throw StructuralError("unknown entangler pattern '" + pattern + "'");
}

}  // namespace

ArchitectureSpec make_architecture(const ArchitectureOptions& options) {
    ArchitectureSpec arch;
    arch.num_qubits = options.num_qubits;
    arch.input_dim = options.input_dim;
    arch.encoding_seed = options.encoding_seed;
    arch.entangler_pattern = options.entangler_pattern;
    arch.max_qubits = options.max_qubits;
    if (options.generator_axes.empty()) {
        throw StructuralError("at least one generator axis is required");
    }
    if (options.generator_axes.size() != 1 && options.generator_axes.size() != options.num_layers) {
        throw StructuralError("generator axes must be given once or once per layer");
    }
    for (std::size_t l = 0; l < options.num_layers; ++l) {
        const Pauli axis = options.generator_axes.size() == 1 ? options.generator_axes[0]
                                                              : options.generator_axes[l];
        LayerSpec layer;
        layer.generators.assign(options.num_qubits, axis);
        layer.entanglers = pattern_pairs(options.entangler_pattern, options.num_qubits, l);
        arch.layers.push_back(std::move(layer));
    }
    arch.observables.assign(options.num_qubits, options.observable);
    arch.encoding_weights =
        draw_encoding_weights(arch.num_params(), options.input_dim, options.encoding_seed);
    arch.validate();
    return arch;
}

nlohmann::json architecture_to_json(const ArchitectureSpec& arch) {
    nlohmann::json doc;
    doc["m"] = arch.num_qubits;
    doc["L"] = arch.num_layers();
    if (arch.entangler_pattern == "custom") {
        nlohmann::json layers = nlohmann::json::array();
        for (const auto& layer : arch.layers) {
            nlohmann::json pairs = nlohmann::json::array();
            for (const auto& p : layer.entanglers) {
                pairs.push_back({p.a, p.b});
            }
            layers.push_back(pairs);
        }
        doc["entangler"] = layers;
    } else {
        doc["entangler"] = arch.entangler_pattern;
    }
    nlohmann::json gens = nlohmann::json::array();
    for (const auto& layer : arch.layers) {
        bool uniform = true;
        for (auto g : layer.generators) {
            uniform = uniform && g == layer.generators.front();
        }
        if (uniform) {
            gens.push_back(std::string(1, pauli_name(layer.generators.front())));
        } else {
            nlohmann::json per_qubit = nlohmann::json::array();
            for (auto g : layer.generators) {
                per_qubit.push_back(std::string(1, pauli_name(g)));
            }
            gens.push_back(per_qubit);
        }
    }
    doc["generators"] = gens;
    nlohmann::json obs = nlohmann::json::array();
    for (auto o : arch.observables) {
        obs.push_back(std::string(1, pauli_name(o)));
    }
    doc["observables"] = obs;
    doc["input_dim"] = arch.input_dim;
    doc["encoding_seed"] = arch.encoding_seed;
    doc["max_qubits"] = arch.max_qubits;
    return doc;
}

namespace {

template <typename T>
T field(const nlohmann::json& doc, const char* key, const std::string& prefix) {
    if (!doc.contains(key)) {
        throw ConfigError(prefix + key, "missing required field");
    }
    try {
        return doc.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(prefix + key, e.what());
    }
}

}  // namespace

ArchitectureSpec architecture_from_json(const nlohmann::json& doc) {
    const std::string prefix = "architecture.";
    if (!doc.is_object()) {
        throw ConfigError("architecture", "expected an object");
    }
    ArchitectureSpec arch;
    arch.num_qubits = field<std::size_t>(doc, "m", prefix);
    const auto num_layers = field<std::size_t>(doc, "L", prefix);
    arch.input_dim = doc.value("input_dim", std::size_t{1});
    arch.encoding_seed = doc.value("encoding_seed", std::uint64_t{0});
    arch.max_qubits = doc.value("max_qubits", kDefaultMaxQubits);
    if (arch.num_qubits > arch.max_qubits) {
        throw ConfigError(prefix + "m", "exceeds max_qubits (" + std::to_string(arch.max_qubits) + ")");
    }
    if (num_layers == 0) {
        throw ConfigError(prefix + "L", "at least one layer is required");
    }

    arch.layers.resize(num_layers);
    const auto gens = doc.value("generators", nlohmann::json("X"));
    try {
        for (std::size_t l = 0; l < num_layers; ++l) {
            nlohmann::json entry = gens;
            if (gens.is_array()) {
                if (gens.size() != num_layers) {
                    throw ConfigError(prefix + "generators", "expected one entry per layer");
                }
                entry = gens[l];
            }
            auto& layer = arch.layers[l];
            if (entry.is_string()) {
                layer.generators.assign(arch.num_qubits, pauli_from_name(entry.get<std::string>()));
            } else if (entry.is_array() && entry.size() == arch.num_qubits) {
                for (const auto& g : entry) {
                    layer.generators.push_back(pauli_from_name(g.get<std::string>()));
                }
            } else {
                throw ConfigError(prefix + "generators[" + std::to_string(l) + "]",
                                  "expected an axis name or one axis per qubit");
            }
        }
    } catch (const StructuralError& e) {
        throw ConfigError(prefix + "generators", e.what());
    }

    const auto ent = doc.value("entangler", nlohmann::json("brickwall"));
    if (ent.is_string()) {
        arch.entangler_pattern = ent.get<std::string>();
        for (std::size_t l = 0; l < num_layers; ++l) {
            try {
                arch.layers[l].entanglers = pattern_pairs(arch.entangler_pattern, arch.num_qubits, l);
            } catch (const StructuralError& e) {
                throw ConfigError(prefix + "entangler", e.what());
            }
        }
    } else if (ent.is_array() && ent.size() == num_layers) {
        arch.entangler_pattern = "custom";
        for (std::size_t l = 0; l < num_layers; ++l) {
            for (const auto& pair : ent[l]) {
                if (!pair.is_array() || pair.size() != 2) {
                    throw ConfigError(prefix + "entangler[" + std::to_string(l) + "]",
                                      "each entangler is a [a, b] qubit pair");
                }
                arch.layers[l].entanglers.push_back(
                    {pair[0].get<std::size_t>(), pair[1].get<std::size_t>()});
            }
        }
    } else {
        throw ConfigError(prefix + "entangler", "expected a pattern name or one pair list per layer");
    }

    const auto obs = doc.value("observables", doc.value("observable", nlohmann::json("Z")));
    try {
        if (obs.is_string()) {
            arch.observables.assign(arch.num_qubits, pauli_from_name(obs.get<std::string>()));
        } else if (obs.is_array() && obs.size() == arch.num_qubits) {
            for (const auto& o : obs) {
                arch.observables.push_back(pauli_from_name(o.get<std::string>()));
            }
        } else {
            throw ConfigError(prefix + "observables", "expected an axis name or one axis per qubit");
        }
    } catch (const StructuralError& e) {
        throw ConfigError(prefix + "observables", e.what());
    }

    arch.encoding_weights = draw_encoding_weights(arch.num_params(), arch.input_dim, arch.encoding_seed);
    try {
        arch.validate();
    } catch (const StructuralError& e) {
        throw ConfigError("architecture", e.what());
    }
    return arch;
}

ParameterVector ParameterVector::wrapped() const {
    Vector out = values_;
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        double v = std::fmod(out(i), std::numbers::pi);
        if (v < 0.0) {
            v += std::numbers::pi;
        }
        out(i) = v;
    }
    return ParameterVector(std::move(out));
}

namespace {

std::size_t dense_dim(std::size_t num_qubits) {
    if (num_qubits > kMaxDenseQubits) {
        throw StructuralError("dense simulation of " + std::to_string(num_qubits) + " qubits is not supported");
    }
    return std::size_t{1} << num_qubits;
}

}  // namespace

StateVector::StateVector(std::size_t num_qubits)
    : num_qubits_(num_qubits), amps_(dense_dim(num_qubits), Complex{0.0, 0.0}) {
    amps_[0] = Complex{1.0, 0.0};
}

StateVector::StateVector(std::size_t num_qubits, std::vector<Complex> amplitudes)
    : num_qubits_(num_qubits), amps_(std::move(amplitudes)) {
    if (amps_.size() != dense_dim(num_qubits)) {
        throw StructuralError("amplitude count does not match 2^num_qubits");
    }
}

double StateVector::norm() const {
    double s = 0.0;
    for (const auto& a : amps_) {
        s += std::norm(a);
    }
    return std::sqrt(s);
}

StateVector apply_layer(StateVector state, const ArchitectureSpec& arch, std::size_t layer,
                        const ParameterVector& theta, const Input& x) {
    if (state.num_qubits() != arch.num_qubits) {
        throw StructuralError("state has " + std::to_string(state.num_qubits()) +
                              " qubits but the architecture has " + std::to_string(arch.num_qubits));
    }
    if (layer >= arch.num_layers()) {
        throw StructuralError("layer index out of range");
    }
    if (theta.size() != arch.num_params()) {
        throw StructuralError("parameter vector has length " + std::to_string(theta.size()) +
                              ", expected " + std::to_string(arch.num_params()));
    }
    const std::size_t m = arch.num_qubits;
    const Vector angles = arch.encoding_angles(x);
    auto amps = state.amplitudes();
    const auto& spec = arch.layers[layer];
    for (std::size_t k = 0; k < m; ++k) {
        apply_rotation(amps, k, spec.generators[k], theta[ParameterVector::index(layer, k, m)]);
    }
    for (std::size_t k = 0; k < m; ++k) {
        apply_phase(amps, k, angles(static_cast<Eigen::Index>(ParameterVector::index(layer, k, m))));
    }
    for (const auto& pair : spec.entanglers) {
        apply_cz(amps, pair.a, pair.b);
    }
    return state;
}

StateVector run_circuit(const ArchitectureSpec& arch, const ParameterVector& theta, const Input& x) {
    if (theta.size() != arch.num_params()) {
        throw StructuralError("parameter vector has length " + std::to_string(theta.size()) +
                              ", expected " + std::to_string(arch.num_params()));
    }
    StateVector state(arch.num_qubits);
    for (std::size_t l = 0; l < arch.num_layers(); ++l) {
        state = apply_layer(std::move(state), arch, l, theta, x);
    }
    return state;
}

double expect_local(const StateVector& state, Pauli observable, std::size_t qubit) {
    if (qubit >= state.num_qubits()) {
        throw StructuralError("observable qubit " + std::to_string(qubit) + " out of range");
    }
    return expect_pauli(state.amplitudes(), qubit, observable);
}

}  // namespace qnnlab
