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

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <limits>
#include <string>

#include "qnnlab/bounds.hpp"
#include "qnnlab/dynamics.hpp"
#include "qnnlab/errors.hpp"
#include "qnnlab/harness.hpp"
#include "qnnlab/kernel.hpp"
#include "qnnlab/lightcone.hpp"
#include "qnnlab/model.hpp"
#include "qnnlab/transport.hpp"

namespace py = pybind11;

namespace {

using qnnlab::Matrix;
using qnnlab::Model;
using qnnlab::ParameterVector;
using qnnlab::Vector;

// JSON crosses the boundary as text; the Python side decodes it.
std::string run_command_json(const std::string& command, const std::string& config_json, const std::string& out) {
    const auto config = qnnlab::parse_config(nlohmann::json::parse(config_json));
    const auto result = qnnlab::run_command(command, config);
    if (!out.empty()) result.write(out);
    nlohmann::json doc;
    doc["summary"] = result.summary;
    doc["report"] = qnnlab::to_json(result.report);
    doc["exit_code"] = result.exit_code;
    return doc.dump();
}

qnnlab::GradientMethod gradient(const std::string& name) {
    if (name == "adjoint") return qnnlab::GradientMethod::Adjoint;
    if (name == "parameter_shift") return qnnlab::GradientMethod::ParameterShift;
    throw qnnlab::PreconditionError("gradient must be 'parameter_shift' or 'adjoint'");
}

}  // namespace

PYBIND11_MODULE(_qnnlab, m) {
    m.doc() = "Finite-width quantum neural network experiments.";

    py::register_exception<qnnlab::ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<qnnlab::AssumptionFailure>(m, "AssumptionFailure", PyExc_RuntimeError);
    py::register_exception<qnnlab::UnknownInput>(m, "UnknownInput", PyExc_KeyError);

    py::class_<qnnlab::ArchitectureSpec>(m, "Architecture")
        .def_readonly("num_qubits", &qnnlab::ArchitectureSpec::num_qubits)
        .def_property_readonly("num_layers", &qnnlab::ArchitectureSpec::num_layers)
        .def_property_readonly("num_params", &qnnlab::ArchitectureSpec::num_params)
        .def("to_json", [](const qnnlab::ArchitectureSpec& a) { return qnnlab::architecture_to_json(a).dump(); });

    m.def(
        "make_architecture",
        [](std::size_t num_qubits, std::size_t num_layers, const std::string& pattern, std::uint64_t encoding_seed,
           std::size_t input_dim) {
            qnnlab::ArchitectureOptions opt;
            opt.num_qubits = num_qubits;
            opt.num_layers = num_layers;
            opt.entangler_pattern = pattern;
            opt.encoding_seed = encoding_seed;
            opt.input_dim = input_dim;
            return qnnlab::make_architecture(opt);
        },
        py::arg("num_qubits"), py::arg("num_layers"), py::arg("pattern") = "brickwall", py::arg("encoding_seed") = 0,
        py::arg("input_dim") = 1);

    m.def("architecture_from_json",
          [](const std::string& text) { return qnnlab::architecture_from_json(nlohmann::json::parse(text)); });

    m.def("lightcones_json", [](const qnnlab::ArchitectureSpec& a) {
        return qnnlab::lightcones_to_json(qnnlab::build_lightcones(a)).dump();
    });

    py::class_<Model>(m, "Model")
        .def(py::init<qnnlab::ArchitectureSpec, std::vector<Vector>, double>(), py::arg("architecture"),
             py::arg("feature_space"), py::arg("normalization") = 1.0)
        .def_property_readonly("num_params", &Model::num_params)
        .def_property_readonly("num_qubits", &Model::num_qubits)
        .def_property("normalization", &Model::normalization, &Model::set_normalization)
        .def("eval_f", [](const Model& mo, const Vector& theta,
                          std::size_t input) { return mo.eval_f(ParameterVector(theta), input); })
        .def("eval_all", [](const Model& mo, const Vector& theta) { return mo.eval_all(ParameterVector(theta)); })
        .def(
            "grad_f",
            [](const Model& mo, const Vector& theta, std::size_t input, const std::string& method) {
                return mo.grad_f(ParameterVector(theta), input, gradient(method));
            },
            py::arg("theta"), py::arg("input"), py::arg("method") = "parameter_shift")
        .def("sample_init", [](const Model& mo, std::uint64_t seed) { return qnnlab::sample_init(mo, seed).values(); },
             py::arg("seed"))
        .def(
            "calibrate",
            [](Model& mo, std::size_t samples, std::uint64_t seed) {
                const auto r = qnnlab::calibrate_normalization(mo, samples, seed);
                return py::make_tuple(r.normalization, r.standard_error);
            },
            py::arg("samples"), py::arg("seed"));

    m.def(
        "empirical_ntk",
        [](const Model& mo, const Vector& theta, const std::vector<std::size_t>& inputs, const std::string& method) {
            return qnnlab::empirical_ntk(mo, ParameterVector(theta), inputs, gradient(method)).entries;
        },
        py::arg("model"), py::arg("theta"), py::arg("inputs"), py::arg("method") = "parameter_shift");
    m.def(
        "analytic_ntk",
        [](const Model& mo, const std::vector<std::size_t>& inputs, std::size_t samples, std::uint64_t seed) {
            const auto k = qnnlab::analytic_ntk(mo, inputs, samples, seed);
            return py::make_tuple(k.mean.entries, k.standard_error);
        },
        py::arg("model"), py::arg("inputs"), py::arg("samples"), py::arg("seed"));
    m.def(
        "covariance_init",
        [](const Model& mo, const std::vector<std::size_t>& inputs, std::size_t samples, std::uint64_t seed) {
            const auto k = qnnlab::covariance_init(mo, inputs, samples, seed);
            return py::make_tuple(k.matrix.entries, k.standard_error);
        },
        py::arg("model"), py::arg("inputs"), py::arg("samples"), py::arg("seed"));

    m.def(
        "limit_gaussian",
        [](const Matrix& k0bar, const Matrix& k, const std::vector<std::size_t>& train, const Vector& y, double eta,
           double t) {
            const auto g = qnnlab::limit_gaussian(k0bar, k, train, y, eta, t);
            return py::make_tuple(g.mean, g.cov);
        },
        py::arg("k0bar"), py::arg("k"), py::arg("train"), py::arg("y"), py::arg("eta"), py::arg("t"));

    m.def("w1_exact", [](const Matrix& a, const Matrix& b) {
        return qnnlab::w1_exact(qnnlab::SampleSet(a), qnnlab::SampleSet(b));
    });
    m.def("w1_truncated", [](const Matrix& a, const Matrix& b, double s) {
        return qnnlab::w1_truncated(qnnlab::SampleSet(a), qnnlab::SampleSet(b), s);
    });

    m.def("stein_constant", &qnnlab::stein_constant, py::arg("d"));
    m.def("stein_modulus", &qnnlab::stein_modulus, py::arg("d"), py::arg("x"));

    m.def("command_names", &qnnlab::command_names);
    m.def("_run_command", &run_command_json, py::arg("command"), py::arg("config_json"), py::arg("out") = "");
}
