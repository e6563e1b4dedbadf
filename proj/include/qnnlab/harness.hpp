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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qnnlab/bounds.hpp"
#include "qnnlab/circuit.hpp"
#include "qnnlab/model.hpp"

namespace qnnlab {

struct SampleCounts {
    std::size_t calibration = 2000;
    std::size_t covariance = 2000;
    std::size_t kernel = 500;
    std::size_t w1 = 1024;
    std::size_t bootstrap = 200;
    /// 0 skips the centering check.
    std::size_t centering = 0;
};

struct CheckpointSchedule {
    std::size_t count = 8;
    double t_first = 0.01;
    double t_max = 10.0;
    /// Appends a late checkpoint at min(50 / (eta lambda_min(K)), 1e4).
    bool include_infinity = true;
};

enum class SimulationMode { Auto, Dense, Cones };

/// Where training targets come from.
enum class TargetMode { Labels, InitialOutput };

struct ConcentrationSettings {
    std::vector<double> epsilons;
    std::size_t trials = 2000;
};

struct ExperimentConfig {
    ArchitectureSpec architecture;
    /// X-bar; the training inputs are a subset.
    std::vector<Input> feature_space;
    std::optional<Dataset> dataset;
    TargetMode targets = TargetMode::Labels;
    SampleCounts samples;
    std::uint64_t seed = 0;
    double eta = 1.0;
    CheckpointSchedule checkpoints;
    double truncation = 1.0;
    double delta = 0.5;
    std::size_t lazy_seeds = 8;
    GradientMethod gradient = GradientMethod::ParameterShift;
    SimulationMode simulation = SimulationMode::Auto;
    std::optional<ConcentrationSettings> concentration;

    /// Dataset or ConfigError("dataset", ...).
    const Dataset& require_dataset() const;
};

/// Parses a config document; relative file references resolve against `base_dir`.
/// Errors are ConfigError carrying the offending field path.
ExperimentConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);
/// Fully resolved config; parse_config(config_to_json(c)) reproduces c.
nlohmann::json config_to_json(const ExperimentConfig& config);

/// Independent random streams derived from the config seed.
enum class SeedStream : std::uint64_t {
    Calibration = 1,
    Kernel = 2,
    Initialization = 3,
    Gaussian = 4,
    Bootstrap = 5,
    Lazy = 6,
    Centering = 7,
    Concentration = 8,
};

std::uint64_t stream_seed(const ExperimentConfig& config, SeedStream stream);

/// Model over the config's feature space with the configured simulation mode.
Model build_model(const ExperimentConfig& config);

struct CommandResult {
    std::string command;
    nlohmann::json summary = nlohmann::json::object();
    BoundReport report;
    /// Artifact name to contents; written verbatim into the run directory.
    std::map<std::string, std::string> files;
    int exit_code = 0;

    /// Writes every artifact into `dir`, creating it if needed.
    void write(const std::filesystem::path& dir) const;
};

CommandResult cmd_calibrate(const ExperimentConfig& config);
CommandResult cmd_lightcones(const ExperimentConfig& config);
CommandResult cmd_init_gauss(const ExperimentConfig& config);
CommandResult cmd_train(const ExperimentConfig& config);
CommandResult cmd_lazy(const ExperimentConfig& config);
CommandResult cmd_bounds_report(const ExperimentConfig& config);

const std::vector<std::string>& command_names();
/// Dispatches by CLI name ("init-gauss", ...); throws ConfigError("command", ...) if unknown.
CommandResult run_command(const std::string& name, const ExperimentConfig& config);

/// Exit codes beyond the bound-report ones.
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitBoundViolated = 2;
inline constexpr int kExitHypothesisUnmet = 3;
inline constexpr int kExitRuntimeError = 4;

}  // namespace qnnlab
