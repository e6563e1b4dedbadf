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

// Command-line front end: one subcommand per experiment, one run directory per invocation.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qnnlab/errors.hpp"
#include "qnnlab/harness.hpp"

namespace {

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
};

int run(const std::string& command, const Options& opt) {
    qnnlab::ExperimentConfig config = qnnlab::load_config(opt.config);
    if (opt.seed) config.seed = *opt.seed;
    const auto result = qnnlab::run_command(command, config);
    const std::filesystem::path dir =
        opt.out.empty() ? std::filesystem::path("runs") / (command + "-seed" + std::to_string(config.seed))
                        : std::filesystem::path(opt.out);
    result.write(dir);
    std::cout << result.files.at("summary.txt") << "run directory: " << dir.string() << "\n";
    return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qnnlab: finite-width experiments for quantum neural networks"};
    app.require_subcommand(1);
    Options opt;
    for (const auto& name : qnnlab::command_names()) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", opt.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", opt.seed, "override the config seed");
        sub->add_option("--out", opt.out, "run directory (default runs/<command>-seed<seed>)");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : qnnlab::kExitConfigError;
    }
    const std::string command = app.get_subcommands().front()->get_name();
    try {
        return run(command, opt);
    } catch (const qnnlab::ConfigError& e) {
        std::cerr << "config error at " << e.what() << "\n";
        return qnnlab::kExitConfigError;
    } catch (const qnnlab::AssumptionFailure& e) {
        std::cerr << "hypothesis unmet: " << e.what() << "\n";
        return qnnlab::kExitHypothesisUnmet;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return qnnlab::kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return qnnlab::kExitRuntimeError;
    }
}
