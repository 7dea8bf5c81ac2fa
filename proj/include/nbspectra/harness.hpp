#pragma once

#include "nbspectra/bounds.hpp"
#include "nbspectra/io.hpp"
#include "nbspectra/nonbacktracking.hpp"
#include "nbspectra/profile.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace nbspectra {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ExperimentKind { BaiYin, RhoB, IharaFuzz, BoundTightness, TraceGrowth };

/// One resolved grid point: a constant-probability profile shape. p is NaN
/// when the point comes from a non-constant base profile.
struct GridPoint {
    Eigen::Index n = 0;
    Eigen::Index m = 0;
    double p = std::numeric_limits<double>::quiet_NaN();
    std::optional<VarianceProfile> profile; // set when not constant
};

struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::BaiYin;
    std::vector<GridPoint> points;
    int trials = 1;
    std::uint64_t seed = 1;
    int parallelism = 0; // 0 = all available threads

    std::vector<double> epsilons = {0.1, 0.3, 0.5}; // RhoB exceedance levels
    int l_min = 2;
    int l_max = 8;           // TraceGrowth power range
    Eigen::Index fuzz_max_vertices = 10; // IharaFuzz: one instance per trial
    double ihara_tol = 1e-8;
    RadiusOptions radius;
    TraceOptions trace;
    std::string out_dir = "out";
};

ExperimentConfig config_from_json(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);
/// Resolves NBSPECTRA_THREADS and the config value; at least 1.
int effective_parallelism(const ExperimentConfig& config);

/// Everything needed to reproduce and summarize one trial. elapsed_ms is
/// diagnostic only and never written to output files, which must be a pure
/// function of (config, seed).
struct TrialRecord {
    int trial_id = -1;
    int grid_id = -1;
    std::uint64_t seed_used = 0;
    bool ok = false;
    std::string error;

    Eigen::Index n = 0, m = 0;
    double p = std::numeric_limits<double>::quiet_NaN();
    double d = 0.0, gamma = 0.0;
    double rho_tilde_min_measured = std::numeric_limits<double>::quiet_NaN();

    double sigma_max = std::numeric_limits<double>::quiet_NaN();
    double sigma_min = std::numeric_limits<double>::quiet_NaN();
    double rho_b = std::numeric_limits<double>::quiet_NaN();
    bool rho_converged = false;
    int rho_iterations = 0;

    std::vector<double> trace_values; // F_l for l = 1..l_max

    std::vector<BoundReport> bound_reports;
    double delta_upper = std::numeric_limits<double>::quiet_NaN();
    double delta_lower = std::numeric_limits<double>::quiet_NaN();

    int checked = 0, skipped = 0, violations = 0, probe_failures = 0, block_gap_failures = 0;
    double worst_indicator = 0.0;
    double worst_probe = std::numeric_limits<double>::quiet_NaN();

    double elapsed_ms = 0.0;
};

/// Runs trials x grid points with per-trial seed split(config.seed, trial_id).
/// Per-trial failures become failed records; the batch never aborts. Records
/// are returned sorted by trial_id and their content is independent of the
/// parallelism level.
std::vector<TrialRecord> run_trials(const ExperimentConfig& config);

struct ExperimentResult {
    std::vector<TrialRecord> records;
    CsvTable trials;
    CsvTable summary;
    CsvTable reports; // bound rows, BoundTightness only
};

ExperimentResult run_experiment(const ExperimentConfig& config);

enum class ReportFormat { Csv, Json };

/// Writes trials/summary (and reports when present) under config.out_dir.
/// Returns the written paths. Byte-deterministic for identical records.
std::vector<std::string> emit_report(const ExperimentResult& result,
                                     const ExperimentConfig& config,
                                     ReportFormat format = ReportFormat::Csv);

double mean(const std::vector<double>& values);
/// Linear-interpolation quantile of an unsorted sample, p in [0, 1].
double quantile(std::vector<double> values, double p);

} // namespace nbspectra
