#include "nbspectra/harness.hpp"
#include "nbspectra/iharabass.hpp"
#include "nbspectra/io.hpp"
#include "nbspectra/profile.hpp"
#include "nbspectra/spectra.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitAssertion = 2;
constexpr int kExitIo = 3;

struct CommonOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    std::optional<std::string> out_dir;
    std::optional<int> parallelism;
    std::string format = "csv";
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("--config", opts.config_path, "JSON config file")->required();
    cmd->add_option("--seed", opts.seed, "override the config seed");
    cmd->add_option("--trials", opts.trials, "override the trial count");
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_option("--parallelism", opts.parallelism, "worker threads (0 = all)");
    cmd->add_option("--format", opts.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
}

nbspectra::ExperimentConfig resolve_config(const CommonOptions& opts,
                                           nbspectra::ExperimentKind kind) {
    nbspectra::ExperimentConfig config = nbspectra::load_config(opts.config_path);
    config.experiment = kind;
    if (opts.seed) config.seed = *opts.seed;
    if (opts.trials) config.trials = *opts.trials;
    if (opts.out_dir) config.out_dir = *opts.out_dir;
    if (opts.parallelism) config.parallelism = *opts.parallelism;
    if (config.trials < 1) throw nbspectra::ConfigError("trials must be at least 1");
    return config;
}

int run_experiment_command(const CommonOptions& opts, nbspectra::ExperimentKind kind) {
    const nbspectra::ExperimentConfig config = resolve_config(opts, kind);
    const nbspectra::ExperimentResult result = nbspectra::run_experiment(config);
    const auto format = opts.format == "json" ? nbspectra::ReportFormat::Json
                                              : nbspectra::ReportFormat::Csv;
    for (const std::string& path : nbspectra::emit_report(result, config, format))
        std::cout << "wrote " << path << "\n";

    int failed = 0, violations = 0;
    for (const auto& rec : result.records) {
        if (!rec.ok) ++failed;
        violations += rec.violations + rec.probe_failures + rec.block_gap_failures;
        for (const auto& rep : rec.bound_reports)
            if (rep.hypotheses_ok && !rep.vacuous &&
                rep.direction != nbspectra::BoundDirection::TailProbability && rep.margin < 0.0)
                ++violations;
    }
    std::cout << result.records.size() << " trials, " << failed << " failed";
    if (kind == nbspectra::ExperimentKind::IharaFuzz ||
        kind == nbspectra::ExperimentKind::BoundTightness)
        std::cout << ", " << violations << " assertion violations";
    std::cout << "\n";
    if ((kind == nbspectra::ExperimentKind::IharaFuzz ||
         kind == nbspectra::ExperimentKind::BoundTightness) &&
        violations > 0)
        return kExitAssertion;
    return kExitOk;
}

int run_sample(const CommonOptions& opts, double q_override) {
    const nbspectra::VarianceProfile profile = nbspectra::load_profile(opts.config_path);
    std::uint64_t seed = 1;
    {
        const nlohmann::json doc = nlohmann::json::parse(nbspectra::read_file(opts.config_path));
        seed = doc.value("seed", doc.contains("profile")
                                     ? doc.at("profile").value("seed", std::uint64_t{1})
                                     : std::uint64_t{1});
    }
    if (opts.seed) seed = *opts.seed;
    nbspectra::SampledMatrix sample;
    if (profile.model_kind == nbspectra::ModelKind::BipartiteBernoulli) {
        sample = nbspectra::sample_centered_adjacency(profile, seed);
    } else {
        const double q = q_override > 0.0 ? q_override : nbspectra::profile_stats(profile).q;
        sample = nbspectra::sample_bounded_model(profile, q, seed);
    }
    const std::string out_dir = opts.out_dir.value_or("out");
    std::filesystem::create_directories(out_dir);
    const std::string path = out_dir + "/sample.csv";
    nbspectra::write_file(path, nbspectra::matrix_to_sparse_csv(sample.entries));
    std::cout << "wrote " << path << " (seed " << seed << ", q_bound "
              << nbspectra::format_double(sample.q_bound) << ")\n";
    return kExitOk;
}

int run_stats(const CommonOptions& opts) {
    const nbspectra::VarianceProfile profile = nbspectra::load_profile(opts.config_path);
    const nbspectra::ProfileStats stats = nbspectra::profile_stats(profile);
    nlohmann::json doc;
    doc["n"] = profile.n;
    doc["m"] = profile.m;
    doc["d"] = stats.d;
    doc["rho_max"] = stats.rho_max;
    doc["rho_tilde_max"] = stats.rho_tilde_max;
    doc["rho_tilde_min"] = stats.rho_tilde_min;
    doc["gamma"] = stats.gamma;
    doc["kappa"] = stats.kappa;
    doc["q"] = stats.q;
    doc["N"] = stats.N;
    doc["y"] = stats.y;
    const auto edges = nbspectra::mp_edges(stats.gamma);
    doc["mp_lower"] = edges.first;
    doc["mp_upper"] = edges.second;
    std::cout << doc.dump(2) << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Non-backtracking spectra of sparse random bipartite matrices"};
    app.require_subcommand(1);

    CommonOptions opts;
    double q_override = 0.0;

    CLI::App* sample = app.add_subcommand("sample", "draw one realization and export it as CSV");
    add_common(sample, opts);
    sample->add_option("--q", q_override, "sup-norm scale for the bounded model");

    CLI::App* stats = app.add_subcommand("stats", "print derived profile scalars as JSON");
    add_common(stats, opts);

    struct Entry {
        const char* name;
        const char* help;
        nbspectra::ExperimentKind kind;
    };
    const Entry entries[] = {
        {"bai-yin", "extreme singular values against the bulk edges",
         nbspectra::ExperimentKind::BaiYin},
        {"rho-b", "spectral radius distribution of the non-backtracking operator",
         nbspectra::ExperimentKind::RhoB},
        {"ihara-check", "determinant identity fuzz suite", nbspectra::ExperimentKind::IharaFuzz},
        {"bounds-check", "deterministic bound dominance on sampled instances",
         nbspectra::ExperimentKind::BoundTightness},
        {"trace-growth", "Frobenius growth of operator powers",
         nbspectra::ExperimentKind::TraceGrowth},
    };
    for (const Entry& entry : entries)
        add_common(app.add_subcommand(entry.name, entry.help), opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (sample->parsed()) return run_sample(opts, q_override);
        if (stats->parsed()) return run_stats(opts);
        for (const Entry& entry : entries)
            if (app.get_subcommand(entry.name)->parsed())
                return run_experiment_command(opts, entry.kind);
        std::cerr << "no subcommand\n";
        return kExitConfig;
    } catch (const nbspectra::IoError& ex) {
        std::cerr << "io error: " << ex.what() << "\n";
        return kExitIo;
    } catch (const nbspectra::ConfigError& ex) {
        std::cerr << "config error: " << ex.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitConfig;
    }
}
