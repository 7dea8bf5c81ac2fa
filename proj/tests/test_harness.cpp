#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nbspectra/harness.hpp"

#include <cstdlib>
#include <filesystem>

using namespace nbspectra;

namespace {

ExperimentConfig small_bai_yin() {
    ExperimentConfig config;
    config.experiment = ExperimentKind::BaiYin;
    GridPoint point;
    point.n = 60;
    point.m = 15;
    point.p = 0.3;
    config.points = {point};
    config.trials = 6;
    config.seed = 31337;
    return config;
}

std::string render(const ExperimentConfig& config) {
    const ExperimentResult result = run_experiment(config);
    return to_csv(result.trials) + "\n--\n" + to_csv(result.summary);
}

} // namespace

TEST_CASE("a single trial reruns identically") {
    ExperimentConfig config = small_bai_yin();
    config.trials = 1;
    const auto a = run_trials(config);
    const auto b = run_trials(config);
    REQUIRE(a.size() == 1);
    CHECK(a[0].ok);
    CHECK(a[0].seed_used == b[0].seed_used);
    CHECK(a[0].sigma_max == b[0].sigma_max);
    CHECK(a[0].sigma_min == b[0].sigma_min);
}

TEST_CASE("parallelism level does not change emitted bytes") {
    ExperimentConfig config = small_bai_yin();
    config.trials = 8;
    config.parallelism = 1;
    const std::string serial = render(config);
    config.parallelism = 8;
    const std::string parallel = render(config);
    CHECK(serial == parallel);
}

TEST_CASE("NBSPECTRA_THREADS overrides the configured parallelism") {
    ExperimentConfig config = small_bai_yin();
    config.parallelism = 3;
    CHECK(effective_parallelism(config) == 3);
    setenv("NBSPECTRA_THREADS", "2", 1);
    CHECK(effective_parallelism(config) == 2);
    unsetenv("NBSPECTRA_THREADS");
    config.parallelism = 0;
    CHECK(effective_parallelism(config) >= 1);
}

TEST_CASE("config validation fails before any trial") {
    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(
                        R"({"experiment":"bai_yin","trials":2})")),
                    ConfigError);
    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(
                        R"({"experiment":"bai_yin","trials":0,
                            "grid":{"n":[4],"m":[2],"p":[0.5]}})")),
                    ConfigError);
    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(
                        R"({"experiment":"bai_yin","trials":1,
                            "grid":{"n":[4,8],"m":[2],"p":[0.5]}})")),
                    ConfigError);
    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(
                        R"({"experiment":"bai_yin","trials":1,
                            "grid":{"n":[4],"m":[2],"p":[1.5]}})")),
                    ConfigError);
    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(
                        R"({"experiment":"nope","trials":1,
                            "grid":{"n":[4],"m":[2],"p":[0.5]}})")),
                    ConfigError);
    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(
                        R"({"experiment":"trace_growth","trials":1,
                            "grid":{"n":[4],"m":[2],"p":[0.5],"l_min":5,"l_max":2}})")),
                    ConfigError);
}

TEST_CASE("config parsing picks up grids and tolerances") {
    const ExperimentConfig config = config_from_json(nlohmann::json::parse(R"({
        "experiment": "rho_b",
        "trials": 3,
        "seed": 99,
        "grid": {"n": [40, 80], "m": [10, 20], "p": [0.2, 0.1], "epsilon": [0.25, 0.5]},
        "tolerances": {"radius_tol": 0.005, "radius_dense_threshold": 300},
        "out": "scratch",
        "parallelism": 2
    })"));
    CHECK(config.experiment == ExperimentKind::RhoB);
    REQUIRE(config.points.size() == 2);
    CHECK(config.points[1].n == 80);
    CHECK(config.points[1].p == 0.1);
    CHECK(config.epsilons == std::vector<double>{0.25, 0.5});
    CHECK(config.radius.tol == 0.005);
    CHECK(config.radius.dense_threshold == 300);
    CHECK(config.out_dir == "scratch");
    CHECK(config.parallelism == 2);
}

TEST_CASE("per-trial failures are recorded, not fatal") {
    ExperimentConfig config;
    config.experiment = ExperimentKind::TraceGrowth;
    GridPoint point;
    point.n = 30;
    point.m = 10;
    point.p = 0.4;
    config.points = {point};
    config.trials = 4;
    config.seed = 5;
    config.trace.max_flops = 1.0; // guarantees a budget failure per trial
    const auto records = run_trials(config);
    REQUIRE(records.size() == 4);
    for (const auto& rec : records) {
        CHECK_FALSE(rec.ok);
        CHECK(rec.error.find("budget") != std::string::npos);
    }
}

TEST_CASE("saturated profiles give exactly zero statistics") {
    ExperimentConfig config = small_bai_yin();
    config.points[0].p = 1.0; // X = 0 exactly
    config.trials = 3;
    const auto records = run_trials(config);
    for (const auto& rec : records) {
        CHECK(rec.ok);
        CHECK(rec.sigma_max == 0.0);
        CHECK(rec.sigma_min == 0.0);
    }
}

TEST_CASE("rho-b exceedance is monotone in epsilon") {
    ExperimentConfig config;
    config.experiment = ExperimentKind::RhoB;
    GridPoint point;
    point.n = 50;
    point.m = 20;
    point.p = 0.25;
    config.points = {point};
    config.trials = 8;
    config.seed = 2024;
    config.epsilons = {0.05, 0.2, 0.6};
    config.radius.dense_threshold = 0; // force norm growth
    config.radius.tol = 5e-3;
    const ExperimentResult result = run_experiment(config);
    REQUIRE(result.summary.rows.size() == 3);
    const auto exceed_at = [&](std::size_t row) {
        return std::stod(result.summary.rows[row][9]); // exceedances column
    };
    CHECK(exceed_at(0) >= exceed_at(1));
    CHECK(exceed_at(1) >= exceed_at(2));
}

TEST_CASE("emit_report writes deterministic files with the expected schema") {
    namespace fs = std::filesystem;
    ExperimentConfig config = small_bai_yin();
    config.trials = 4;
    config.out_dir = (fs::temp_directory_path() / "nbspectra_emit_test").string();
    const ExperimentResult result = run_experiment(config);

    const auto paths = emit_report(result, config);
    REQUIRE(paths.size() == 2);
    const std::string trials_a = read_file(paths[0]);
    const std::string summary_a = read_file(paths[1]);
    emit_report(result, config);
    CHECK(read_file(paths[0]) == trials_a);
    CHECK(read_file(paths[1]) == summary_a);

    CHECK(summary_a.find("mp_lower") != std::string::npos);
    CHECK(summary_a.find("mp_upper") != std::string::npos);
    CHECK(trials_a.find("sigma_max") != std::string::npos);

    const auto json_paths = emit_report(result, config, ReportFormat::Json);
    CHECK(nlohmann::json::parse(read_file(json_paths[0])).is_array());

    ExperimentResult empty;
    CHECK_THROWS_AS(emit_report(empty, config), std::invalid_argument);
    fs::remove_all(config.out_dir);
}

TEST_CASE("summary statistics are recomputable from trial records") {
    ExperimentConfig config = small_bai_yin();
    const ExperimentResult result = run_experiment(config);
    std::vector<double> smax;
    for (const auto& rec : result.records)
        if (rec.ok) smax.push_back(rec.sigma_max);
    REQUIRE(result.summary.rows.size() == 1);
    const auto& row = result.summary.rows[0];
    CHECK(std::abs(std::stod(row[8]) - mean(smax)) <= 1e-12);
    CHECK(std::abs(std::stod(row[9]) - quantile(smax, 0.5)) <= 1e-12);
}

TEST_CASE("ihara fuzz experiment aggregates violation counts") {
    ExperimentConfig config;
    config.experiment = ExperimentKind::IharaFuzz;
    config.trials = 10;
    config.seed = 451;
    config.fuzz_max_vertices = 8;
    const ExperimentResult result = run_experiment(config);
    REQUIRE(result.records.size() == 10);
    int violations = 0;
    for (const auto& rec : result.records) {
        CHECK(rec.ok);
        violations += rec.violations + rec.probe_failures + rec.block_gap_failures;
    }
    CHECK(violations == 0);
    REQUIRE(result.summary.rows.size() == 1);
}

TEST_CASE("records count always equals grid x trials") {
    ExperimentConfig config = small_bai_yin();
    GridPoint second = config.points[0];
    second.n = 30;
    second.m = 10;
    config.points.push_back(second);
    config.trials = 3;
    const auto records = run_trials(config);
    CHECK(records.size() == 6);
    for (std::size_t k = 0; k < records.size(); ++k)
        CHECK(records[k].trial_id == static_cast<int>(k));
}

TEST_CASE("quantile and mean helpers") {
    CHECK(std::isnan(mean({})));
    CHECK(std::isnan(quantile({}, 0.5)));
    CHECK(mean({1.0, 2.0, 3.0}) == doctest::Approx(2.0));
    CHECK(quantile({3.0, 1.0, 2.0}, 0.5) == doctest::Approx(2.0));
    CHECK(quantile({1.0, 2.0}, 0.25) == doctest::Approx(1.25));
    CHECK(quantile({5.0}, 0.9) == doctest::Approx(5.0));
}
