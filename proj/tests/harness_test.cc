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

#include "qnnlab/harness.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "qnnlab/errors.hpp"
#include "qnnlab/kernel.hpp"
#include "qnnlab/lightcone.hpp"
#include "qnnlab/transport.hpp"

namespace qnnlab {
namespace {

using nlohmann::json;

json small_config() {
    return json::parse(R"({
        "architecture": {"m": 3, "L": 2, "entangler": "brickwall", "encoding_seed": 5},
        "dataset": {"X": [[0.2], [-0.7]], "Y": [1, -1]},
        "feature_space": [[0.2], [-0.7], [1.1]],
        "samples": {"calibration": 200, "covariance": 200, "kernel": 100, "w1": 48, "bootstrap": 8},
        "seed": 11,
        "eta": 1.0,
        "checkpoints": {"count": 3, "t_first": 0.1, "t_max": 2.0},
        "truncation": 0.5,
        "lazy_seeds": 3,
        "gradient": "adjoint"
    })");
}

std::string config_error_path(const json& doc) {
    try {
        parse_config(doc);
    } catch (const ConfigError& e) {
        return e.path();
    }
    return "<no error>";
}

TEST(Config, ParsesAndRoundTrips) {
    const auto c = parse_config(small_config());
    EXPECT_EQ(c.architecture.num_qubits, 3u);
    EXPECT_EQ(c.feature_space.size(), 3u);
    EXPECT_EQ(c.samples.w1, 48u);
    EXPECT_EQ(c.samples.centering, 0u);
    EXPECT_EQ(c.gradient, GradientMethod::Adjoint);
    EXPECT_TRUE(c.checkpoints.include_infinity);
    const json once = config_to_json(c);
    EXPECT_EQ(config_to_json(parse_config(once)), once);
}

TEST(Config, FeatureSpaceDefaultsToDataset) {
    json doc = small_config();
    doc.erase("feature_space");
    const auto c = parse_config(doc);
    ASSERT_EQ(c.feature_space.size(), 2u);
    EXPECT_EQ(c.feature_space[1](0), -0.7);
}

TEST(Config, RejectsWithFieldPath) {
    auto with = [](const std::string& pointer, json value) {
        json doc = small_config();
        doc[json::json_pointer(pointer)] = std::move(value);
        return doc;
    };
    EXPECT_EQ(config_error_path(with("/samples/w1", 0)), "samples.w1");
    EXPECT_EQ(config_error_path(with("/samples/w1", 5000)), "samples.w1");
    EXPECT_EQ(config_error_path(with("/samples/kernels", 3)), "samples.kernels");
    EXPECT_EQ(config_error_path(with("/delta", 1.5)), "delta");
    EXPECT_EQ(config_error_path(with("/eta", -1.0)), "eta");
    EXPECT_EQ(config_error_path(with("/gradient", "finite")), "gradient");
    EXPECT_EQ(config_error_path(with("/seed", -3)), "seed");
    EXPECT_EQ(config_error_path(with("/bogus", 1)), "bogus");
    EXPECT_EQ(config_error_path(with("/feature_space/0", json::array({0.1, 0.2}))), "feature_space[0]");
    EXPECT_EQ(config_error_path(with("/feature_space/2", 0.2)), "feature_space[2]");
    EXPECT_EQ(config_error_path(with("/feature_space", json::array({0.2, 1.1}))), "dataset.X[1]");
    EXPECT_EQ(config_error_path(with("/checkpoints/t_max", 0.01)), "checkpoints.t_max");
    EXPECT_EQ(config_error_path(with("/concentration", json::object())), "concentration.epsilons");
    json no_m = small_config();
    no_m["architecture"].erase("m");
    EXPECT_EQ(config_error_path(no_m), "architecture.m");
    json no_arch = small_config();
    no_arch.erase("architecture");
    EXPECT_EQ(config_error_path(no_arch), "architecture");
    json bad_labels = small_config();
    bad_labels["dataset"]["Y"] = json::array({1, 0.5});
    EXPECT_EQ(config_error_path(bad_labels), "dataset");
    json nothing = small_config();
    nothing.erase("dataset");
    nothing.erase("feature_space");
    EXPECT_EQ(config_error_path(nothing), "feature_space");
    EXPECT_EQ(config_error_path(json::array()), "$");
}

TEST(Config, LoadsFileReferences) {
    const auto dir = std::filesystem::temp_directory_path() / "qnnlab_config_test";
    std::filesystem::create_directories(dir);
    json doc = small_config();
    std::ofstream(dir / "arch.json") << doc["architecture"].dump();
    doc["architecture"] = "arch.json";
    std::ofstream(dir / "run.json") << doc.dump();
    const auto c = load_config(dir / "run.json");
    EXPECT_EQ(c.architecture.num_qubits, 3u);
    doc["architecture"] = "missing.json";
    std::ofstream(dir / "bad.json") << doc.dump();
    try {
        load_config(dir / "bad.json");
        FAIL() << "missing file accepted";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.path(), "architecture");
    }
    std::filesystem::remove_all(dir);
}

TEST(Harness, CalibrateMatchesModules) {
    const auto c = parse_config(small_config());
    const auto r = cmd_calibrate(c);
    Model model = build_model(c);
    const auto cal = calibrate_normalization(model, 200, stream_seed(c, SeedStream::Calibration));
    const auto table = build_lightcones(c.architecture);
    EXPECT_EQ(r.summary["N_m"].get<double>(), cal.normalization);
    EXPECT_EQ(r.summary["sizes"]["maxM"], table.maxM);
    EXPECT_EQ(r.summary["sizes"]["maxN"], table.maxN);
    EXPECT_EQ(r.summary["sizes"]["D"], table.D);
    EXPECT_EQ(r.summary["sizes"]["Dtilde"], table.Dtilde);
    EXPECT_EQ(r.summary["seed"], 11);
    EXPECT_EQ(r.exit_code, 0);
    for (const char* f : {"config.json", "calibration.json", "lightcones.json", "summary.json", "summary.txt"}) {
        EXPECT_TRUE(r.files.count(f)) << f;
    }
    EXPECT_NE(r.files.at("calibration.json").find("\"config_seed\": 11"), std::string::npos);
}

TEST(Harness, ReRunIsByteIdentical) {
    const auto c = parse_config(small_config());
    for (const auto& name : {"calibrate", "init-gauss", "lazy"}) {
        const auto a = run_command(name, c);
        const auto b = run_command(name, c);
        EXPECT_EQ(a.files, b.files) << name;
    }
    auto other = c;
    other.seed = 12;
    EXPECT_NE(cmd_calibrate(other).files.at("calibration.json"), cmd_calibrate(c).files.at("calibration.json"));
}

TEST(Harness, LightconesCommand) {
    const auto c = parse_config(small_config());
    const auto r = cmd_lightcones(c);
    const auto doc = json::parse(r.files.at("lightcones.json"));
    EXPECT_EQ(doc["D"], build_lightcones(c.architecture).D);
    EXPECT_EQ(r.exit_code, 0);
}

TEST(Harness, InitGaussReportsEveryCheck) {
    const auto c = parse_config(small_config());
    const auto r = cmd_init_gauss(c);
    ASSERT_EQ(r.report.checks.size(), 3u);
    for (const auto& chk : r.report.checks) {
        EXPECT_NE(chk.status, BoundStatus::Violated) << chk.name;
        EXPECT_TRUE(std::isfinite(chk.observed));
        EXPECT_TRUE(std::isfinite(chk.bound));
    }
    EXPECT_LE(r.summary["w1_truncated"].get<double>(), r.summary["w1"].get<double>() + 1e-12);
    EXPECT_LE(r.summary["w1_truncated"].get<double>(), c.truncation);
    const auto report = json::parse(r.files.at("bound_report.json"));
    EXPECT_EQ(report["checks"].size(), 3u);
    EXPECT_TRUE(report["checks"][0].contains("observed"));
    EXPECT_TRUE(report["checks"][0].contains("bound"));
    EXPECT_EQ(report["seed"], 11);
    // Sample clouds round-trip through the CSV reader; a cloud is at distance 0 from itself.
    std::istringstream in(r.files.at("samples_model.csv"));
    const auto cloud = read_samples_csv(in);
    EXPECT_EQ(cloud.size(), 48u);
    EXPECT_EQ(cloud.dim(), 3u);
    EXPECT_EQ(w1_exact(cloud, cloud), 0.0);
    EXPECT_EQ(classify(0.0, r.report.checks[0].bound, true, 1e300), BoundStatus::Holds);
}

TEST(Harness, TrainStartsAtInitAndConvergesToLabels) {
    const auto c = parse_config(small_config());
    const auto r = cmd_train(c);
    const auto grid = r.summary["checkpoints"].get<std::vector<double>>();
    ASSERT_GE(grid.size(), 4u);
    EXPECT_EQ(grid.front(), 0.0);
    EXPECT_EQ(r.report.checks.size(), grid.size());
    for (const auto& chk : r.report.checks) EXPECT_NE(chk.status, BoundStatus::Violated) << chk.name;
    EXPECT_LE(r.summary["max_loss_increase"].get<double>(), 1e-8);
    const double init = cmd_init_gauss(c).summary["w1_truncated"].get<double>();
    const double t0 = r.report.checks.front().observed;
    // Same initial clouds, independent Gaussian draws of the same law.
    EXPECT_NEAR(t0, init, 0.25);
    const auto limits = json::parse(r.files.at("limits.json"));
    const auto first = limits["checkpoints"].front();
    for (double v : first["mean"].get<std::vector<double>>()) EXPECT_EQ(v, 0.0);
    if (r.summary["lambda_min_K"].get<double>() > 1e-3) {
        const auto late = limits["checkpoints"].back()["mean"].get<std::vector<double>>();
        EXPECT_NEAR(late[0], 1.0, 1e-6);
        EXPECT_NEAR(late[1], -1.0, 1e-6);
    }
    EXPECT_TRUE(r.files.count("trajectory_seed0.csv"));
}

TEST(Harness, TrainFlagsUnmetHypothesesButKeepsObservations) {
    const auto c = parse_config(small_config());
    const auto r = cmd_train(c);
    ASSERT_FALSE(r.summary["hypotheses_met"].get<bool>());
    for (const auto& chk : r.report.checks) {
        EXPECT_EQ(chk.status, BoundStatus::HypothesisUnmet);
        EXPECT_GT(chk.observed, 0.0);
    }
    EXPECT_EQ(r.exit_code, kExitHypothesisUnmet);
}

TEST(Harness, LazyZeroSignal) {
    json doc = small_config();
    doc["targets"] = "initial_output";
    const auto r = cmd_lazy(parse_config(doc));
    EXPECT_EQ(r.summary["max_drift"].get<double>(), 0.0);
    EXPECT_EQ(r.summary["mean_max_linear_gap"].get<double>(), 0.0);
    const auto seeds = json::parse(r.files.at("lazy_seeds.json"));
    EXPECT_EQ(seeds["seeds"].size(), 3u);
    for (const auto& s : seeds["seeds"])
        for (const auto& row : s["rows"]) EXPECT_EQ(row["loss"].get<double>(), 0.0);
}

TEST(Harness, LazyHighLambdaProductCircuit) {
    // Product circuit: single-qubit cones, K = 4 and N_m^2 close to m / 2.
    json doc = json::parse(R"({
        "architecture": {"m": 16384, "L": 1, "entangler": "none", "max_qubits": 16384},
        "dataset": {"X": [[0.3]], "Y": [1]},
        "samples": {"calibration": 400, "kernel": 20},
        "seed": 3, "eta": 0.5, "delta": 0.5, "lazy_seeds": 12, "gradient": "adjoint",
        "checkpoints": {"count": 2, "t_first": 0.5, "t_max": 2.0, "include_infinity": false}
    })");
    const auto r = cmd_lazy(parse_config(doc));
    ASSERT_TRUE(r.summary["hypothesis_holds"].get<bool>());
    // A seed may legitimately fail with probability delta; the rate check absorbs it.
    EXPECT_GE(r.summary["fraction_holding"].get<double>(), 0.5);
    EXPECT_EQ(r.report.checks.at(0).status, BoundStatus::Holds);
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_TRUE(r.summary["drift_within_path_length"].get<bool>());
}

TEST(Harness, BoundsReportWithConcentration) {
    json doc = small_config();
    doc["concentration"] = {{"epsilons", {0.0, 1.0, 1e6}}, {"trials", 30}};
    const auto r = cmd_bounds_report(parse_config(doc));
    ASSERT_EQ(r.report.checks.size(), 3u);
    EXPECT_EQ(r.report.checks[0].status, BoundStatus::Vacuous);
    EXPECT_EQ(r.report.checks[2].observed, 0.0);
    const auto report = json::parse(r.files.at("bound_report.json"));
    EXPECT_TRUE(report["constants"].contains("init"));
    EXPECT_TRUE(report["constants"].contains("lazy"));
    EXPECT_TRUE(report["constants"].contains("trained"));
    EXPECT_FALSE(r.summary["assumptions_hold"].get<bool>());
    EXPECT_EQ(r.exit_code, kExitHypothesisUnmet);
}

TEST(Harness, WritesRunDirectory) {
    const auto dir = std::filesystem::temp_directory_path() / "qnnlab_run_test";
    std::filesystem::remove_all(dir);
    const auto r = cmd_lightcones(parse_config(small_config()));
    r.write(dir);
    for (const auto& [name, contents] : r.files) {
        std::ifstream in(dir / name, std::ios::binary);
        std::stringstream buf;
        buf << in.rdbuf();
        EXPECT_EQ(buf.str(), contents) << name;
    }
    std::filesystem::remove_all(dir);
}

TEST(Harness, UnknownCommand) {
    const auto c = parse_config(small_config());
    EXPECT_THROW(run_command("plot", c), ConfigError);
    EXPECT_EQ(command_names().size(), 6u);
    json doc = small_config();
    doc.erase("dataset");
    EXPECT_THROW(cmd_train(parse_config(doc)), ConfigError);
}

}  // namespace
}  // namespace qnnlab
