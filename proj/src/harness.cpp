#include "nbspectra/harness.hpp"

#include "nbspectra/iharabass.hpp"
#include "nbspectra/rng.hpp"
#include "nbspectra/spectra.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>

namespace nbspectra {

namespace {

const char* kind_name(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::BaiYin: return "bai_yin";
        case ExperimentKind::RhoB: return "rho_b";
        case ExperimentKind::IharaFuzz: return "ihara_fuzz";
        case ExperimentKind::BoundTightness: return "bound_tightness";
        case ExperimentKind::TraceGrowth: return "trace_growth";
    }
    return "unknown";
}

ExperimentKind kind_from_name(const std::string& name) {
    for (ExperimentKind kind : {ExperimentKind::BaiYin, ExperimentKind::RhoB,
                                ExperimentKind::IharaFuzz, ExperimentKind::BoundTightness,
                                ExperimentKind::TraceGrowth})
        if (name == kind_name(kind)) return kind;
    throw ConfigError("unknown experiment: " + name);
}

VarianceProfile point_profile(const GridPoint& point) {
    if (point.profile) return *point.profile;
    return make_bipartite_profile(point.n, point.m, point.p);
}

std::string fmt(double v) { return format_double(v); }
std::string fmt(bool v) { return v ? "1" : "0"; }
std::string fmt(int v) { return std::to_string(v); }
std::string fmt(Eigen::Index v) { return std::to_string(v); }
std::string fmt(std::uint64_t v) { return std::to_string(v); }

double min_col_sq_sum(const Eigen::MatrixXd& X) {
    return X.size() > 0 ? X.colwise().squaredNorm().minCoeff() : 0.0;
}

Eigen::MatrixXd fuzz_matrix(std::uint64_t seed, Eigen::Index max_vertices) {
    const Eigen::Index budget = std::max<Eigen::Index>(2, max_vertices);
    const Eigen::Index n =
        1 + static_cast<Eigen::Index>(rng::uniform(seed, 0, 0, 1) * static_cast<double>(budget - 1));
    const Eigen::Index m = 1 + static_cast<Eigen::Index>(rng::uniform(seed, 0, 0, 2) *
                                                         static_cast<double>(budget - n));
    // Alternate between dense and increasingly sparse fills.
    const double keep_levels[] = {1.0, 0.8, 0.5, 0.3};
    const double keep = keep_levels[rng::word(seed, 0, 0, 3) % 4];
    Eigen::MatrixXd X(n, m);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < m; ++j) {
            const bool kept = rng::uniform(seed, i, j, 4) < keep;
            X(i, j) = kept ? 2.0 * rng::uniform(seed, i, j, 5) - 1.0 : 0.0;
        }
    return X;
}

void run_bai_yin_trial(const ExperimentConfig&, const VarianceProfile& profile,
                       const ProfileStats&, TrialRecord& rec) {
    const SampledMatrix sample = sample_centered_adjacency(profile, rec.seed_used);
    rec.rho_tilde_min_measured = min_col_sq_sum(sample.entries);
    SvdOptions opts;
    opts.compute_residual = false;
    const SpectralSummary svd = singular_values(sample.entries, opts);
    rec.sigma_max = svd.sigma_max;
    rec.sigma_min = svd.sigma_min.value_or(std::numeric_limits<double>::quiet_NaN());
}

void run_rho_b_trial(const ExperimentConfig& config, const VarianceProfile& profile,
                     const ProfileStats&, TrialRecord& rec) {
    const SampledMatrix sample = sample_centered_adjacency(profile, rec.seed_used);
    rec.rho_tilde_min_measured = min_col_sq_sum(sample.entries);
    const NBOperator B = build_nb_operator(sample.entries);
    const RadiusEstimate est = spectral_radius(B, config.radius);
    rec.rho_b = est.rho;
    rec.rho_converged = est.converged;
    rec.rho_iterations = est.iterations;
}

void run_trace_growth_trial(const ExperimentConfig& config, const VarianceProfile& profile,
                            const ProfileStats&, TrialRecord& rec) {
    const SampledMatrix sample = sample_centered_adjacency(profile, rec.seed_used);
    const NBOperator B = build_nb_operator(sample.entries);
    // Inside the trial-parallel region this runs on one thread per trial;
    // trace_powers parallelizes over columns when trials run serially.
    rec.trace_values = trace_powers(B, config.l_max, config.trace);
}

void run_bound_tightness_trial(const ExperimentConfig& config, const VarianceProfile& profile,
                               const ProfileStats& stats, TrialRecord& rec) {
    const SampledMatrix sample = sample_centered_adjacency(profile, rec.seed_used);
    const Eigen::MatrixXd& X = sample.entries;
    rec.rho_tilde_min_measured = min_col_sq_sum(X);
    const MatrixNorms norms = matrix_norms(X);
    const SpectralSummary svd = singular_values(X);
    rec.sigma_max = svd.sigma_max;
    rec.sigma_min = svd.sigma_min.value_or(std::numeric_limits<double>::quiet_NaN());
    const NBOperator B = build_nb_operator(X);
    const RadiusEstimate est = spectral_radius(B, config.radius);
    rec.rho_b = est.rho;
    rec.rho_converged = est.converged;
    rec.rho_iterations = est.iterations;

    const double gamma = stats.gamma;
    const double gamma_quarter = std::pow(gamma, 0.25);
    const double smax_sq = rec.sigma_max * rec.sigma_max;
    const double smin_sq = rec.sigma_min * rec.sigma_min;
    const std::string id = "t" + std::to_string(rec.trial_id);

    rec.delta_upper = min_delta_upper(X, stats);
    {
        const HypothesisChecks hyp = check_hypotheses(X, stats, rec.delta_upper);
        const bool ok = hyp.upper_ok() && rec.delta_upper <= std::sqrt(gamma) && est.converged;
        double bound = std::numeric_limits<double>::quiet_NaN();
        if (ok) {
            const double lambda =
                std::max(gamma_quarter * (1.0 + std::sqrt(rec.delta_upper)), est.rho);
            bound = sigma_max_sq_bound(lambda, gamma, rec.delta_upper);
        }
        rec.bound_reports.push_back(make_report(
            id, "upper_shift", BoundDirection::UpperOnSigmaMaxSq, bound, smax_sq, ok));
    }
    {
        const double gamma_meas = measured_gamma(norms);
        const bool ok = norms.h_2inf > 0.0 && est.converged;
        double bound = std::numeric_limits<double>::quiet_NaN();
        if (ok)
            bound = rescaled_sigma_max_sq_bound(norms.h_2inf, norms.h_1inf, est.rho, gamma_meas);
        rec.bound_reports.push_back(make_report(
            id, "upper_rescaled", BoundDirection::UpperOnSigmaMaxSq, bound, smax_sq, ok));
    }
    if (profile.n >= profile.m) {
        rec.delta_lower = min_delta_lower(X, stats);
        const HypothesisChecks hyp = check_hypotheses(X, stats, rec.delta_lower);
        const bool ok = hyp.lower_ok() && rec.delta_lower < 1.0 && gamma < 1.0 && est.converged;
        double bound = std::numeric_limits<double>::quiet_NaN();
        if (ok) {
            const double beta =
                std::max(gamma_quarter * (1.0 + std::sqrt(rec.delta_lower)), est.rho);
            bound = sigma_min_sq_bound(beta, gamma, rec.delta_lower, stats.rho_tilde_min,
                                       rec.sigma_max)
                        .value;
        }
        rec.bound_reports.push_back(make_report(
            id, "lower_imag_axis", BoundDirection::LowerOnSigmaMinSq, bound, smin_sq, ok));
    }
    {
        // Display-only tail expressions; their absolute constants default to 1.
        const TailBoundValue tail =
            sigma_max_tail_rhs(stats.q, gamma, static_cast<double>(stats.N), 1.0);
        rec.bound_reports.push_back(make_report(id, "tail_upper_rhs",
                                                BoundDirection::TailProbability, tail.value,
                                                rec.sigma_max, tail.in_regime));
        const double nan = std::numeric_limits<double>::quiet_NaN();
        rec.bound_reports.push_back(make_report(
            id, "tail_upper_prob", BoundDirection::TailProbability,
            sigma_max_success_probability(gamma, static_cast<double>(stats.N), 1.0), nan,
            true));
        if (profile.n >= profile.m && std::isfinite(rec.delta_lower) && rec.delta_lower > 0.0)
            rec.bound_reports.push_back(make_report(
                id, "tail_lower_prob", BoundDirection::TailProbability,
                sigma_min_success_probability(static_cast<double>(profile.n), gamma, stats.q,
                                              rec.delta_lower),
                nan, true));
    }
}

void run_ihara_fuzz_trial(const ExperimentConfig& config, TrialRecord& rec) {
    const Eigen::MatrixXd X = fuzz_matrix(rec.seed_used, config.fuzz_max_vertices);
    rec.n = X.rows();
    rec.m = X.cols();
    const SpectrumCheckReport report =
        verify_ib_on_spectrum(X, config.ihara_tol, config.radius.dense_threshold);
    rec.checked = report.eigenvalues_checked;
    rec.skipped = report.eigenvalues_skipped;
    rec.violations = report.violations;
    rec.probe_failures = report.probe_failures;
    rec.block_gap_failures = report.block_gap_failures;
    rec.worst_indicator = report.worst_indicator;
    rec.worst_probe = report.worst_probe;
}

} // namespace

int effective_parallelism(const ExperimentConfig& config) {
    if (const char* env = std::getenv("NBSPECTRA_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    if (config.parallelism > 0) return config.parallelism;
    return std::max(1, omp_get_max_threads());
}

std::vector<TrialRecord> run_trials(const ExperimentConfig& config) {
    const bool fuzz = config.experiment == ExperimentKind::IharaFuzz;
    const int points = fuzz ? 1 : static_cast<int>(config.points.size());
    if (config.trials < 1) throw ConfigError("trials must be at least 1");
    if (!fuzz && points == 0) throw ConfigError("empty grid");

    struct PointData {
        VarianceProfile profile;
        ProfileStats stats;
    };
    std::vector<PointData> data;
    if (!fuzz) {
        data.reserve(static_cast<std::size_t>(points));
        for (const GridPoint& point : config.points) {
            PointData pd{point_profile(point), {}};
            pd.stats = profile_stats(pd.profile);
            data.push_back(std::move(pd));
        }
    }

    const int total = points * config.trials;
    std::vector<TrialRecord> records(static_cast<std::size_t>(total));
    const int threads = effective_parallelism(config);
#pragma omp parallel for num_threads(threads) schedule(dynamic)
    for (int t = 0; t < total; ++t) {
        TrialRecord& rec = records[static_cast<std::size_t>(t)];
        rec.trial_id = t;
        rec.grid_id = t / config.trials;
        rec.seed_used = rng::split(config.seed, static_cast<std::uint64_t>(t));
        const auto start = std::chrono::steady_clock::now();
        try {
            if (fuzz) {
                run_ihara_fuzz_trial(config, rec);
            } else {
                const PointData& pd = data[static_cast<std::size_t>(rec.grid_id)];
                rec.n = pd.profile.n;
                rec.m = pd.profile.m;
                rec.p = config.points[static_cast<std::size_t>(rec.grid_id)].p;
                rec.d = pd.stats.d;
                rec.gamma = pd.stats.gamma;
                switch (config.experiment) {
                    case ExperimentKind::BaiYin:
                        run_bai_yin_trial(config, pd.profile, pd.stats, rec);
                        break;
                    case ExperimentKind::RhoB:
                        run_rho_b_trial(config, pd.profile, pd.stats, rec);
                        break;
                    case ExperimentKind::TraceGrowth:
                        run_trace_growth_trial(config, pd.profile, pd.stats, rec);
                        break;
                    case ExperimentKind::BoundTightness:
                        run_bound_tightness_trial(config, pd.profile, pd.stats, rec);
                        break;
                    case ExperimentKind::IharaFuzz:
                        break;
                }
            }
            rec.ok = true;
        } catch (const std::exception& ex) {
            rec.ok = false;
            rec.error = ex.what();
        }
        rec.elapsed_ms = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - start)
                             .count();
    }
    return records;
}

namespace {

std::vector<double> collect(const std::vector<TrialRecord>& records, int grid_id,
                            double TrialRecord::* field) {
    std::vector<double> out;
    for (const TrialRecord& rec : records)
        if (rec.ok && rec.grid_id == grid_id && std::isfinite(rec.*field))
            out.push_back(rec.*field);
    return out;
}

CsvTable build_trials_table(const ExperimentConfig& config,
                            const std::vector<TrialRecord>& records) {
    CsvTable table;
    table.header = {"trial_id", "grid_id", "seed", "ok", "error"};
    switch (config.experiment) {
        case ExperimentKind::BaiYin:
            table.header.insert(table.header.end(),
                                {"n", "m", "p", "d", "gamma", "rho_tilde_min_measured",
                                 "sigma_max", "sigma_min"});
            break;
        case ExperimentKind::RhoB:
            table.header.insert(table.header.end(), {"n", "m", "p", "d", "gamma", "rho_b",
                                                     "rho_converged", "rho_iterations"});
            break;
        case ExperimentKind::TraceGrowth: {
            table.header.insert(table.header.end(), {"n", "m", "p", "d", "gamma"});
            for (int l = 1; l <= config.l_max; ++l)
                table.header.push_back("f_" + std::to_string(l));
            break;
        }
        case ExperimentKind::BoundTightness:
            table.header.insert(table.header.end(),
                                {"n", "m", "p", "d", "gamma", "sigma_max", "sigma_min", "rho_b",
                                 "rho_converged", "delta_upper", "delta_lower"});
            break;
        case ExperimentKind::IharaFuzz:
            table.header.insert(table.header.end(),
                                {"n", "m", "checked", "skipped", "violations", "probe_failures",
                                 "block_gap_failures", "worst_indicator", "worst_probe"});
            break;
    }
    for (const TrialRecord& rec : records) {
        std::vector<std::string> row = {fmt(rec.trial_id), fmt(rec.grid_id), fmt(rec.seed_used),
                                        fmt(rec.ok), rec.error};
        switch (config.experiment) {
            case ExperimentKind::BaiYin:
                for (double v : {static_cast<double>(rec.n), static_cast<double>(rec.m), rec.p,
                                 rec.d, rec.gamma, rec.rho_tilde_min_measured, rec.sigma_max,
                                 rec.sigma_min})
                    row.push_back(fmt(v));
                break;
            case ExperimentKind::RhoB:
                row.insert(row.end(), {fmt(rec.n), fmt(rec.m), fmt(rec.p), fmt(rec.d),
                                       fmt(rec.gamma), fmt(rec.rho_b), fmt(rec.rho_converged),
                                       fmt(rec.rho_iterations)});
                break;
            case ExperimentKind::TraceGrowth: {
                row.insert(row.end(),
                           {fmt(rec.n), fmt(rec.m), fmt(rec.p), fmt(rec.d), fmt(rec.gamma)});
                for (int l = 1; l <= config.l_max; ++l) {
                    const std::size_t idx = static_cast<std::size_t>(l - 1);
                    row.push_back(idx < rec.trace_values.size() ? fmt(rec.trace_values[idx])
                                                                : std::string("nan"));
                }
                break;
            }
            case ExperimentKind::BoundTightness:
                row.insert(row.end(),
                           {fmt(rec.n), fmt(rec.m), fmt(rec.p), fmt(rec.d), fmt(rec.gamma),
                            fmt(rec.sigma_max), fmt(rec.sigma_min), fmt(rec.rho_b),
                            fmt(rec.rho_converged), fmt(rec.delta_upper), fmt(rec.delta_lower)});
                break;
            case ExperimentKind::IharaFuzz:
                row.insert(row.end(),
                           {fmt(rec.n), fmt(rec.m), fmt(rec.checked), fmt(rec.skipped),
                            fmt(rec.violations), fmt(rec.probe_failures),
                            fmt(rec.block_gap_failures), fmt(rec.worst_indicator),
                            fmt(rec.worst_probe)});
                break;
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

CsvTable build_summary_table(const ExperimentConfig& config,
                             const std::vector<TrialRecord>& records) {
    CsvTable table;
    const int points = config.experiment == ExperimentKind::IharaFuzz
                           ? 1
                           : static_cast<int>(config.points.size());
    auto ok_count = [&](int g) {
        int c = 0;
        for (const TrialRecord& rec : records)
            if (rec.grid_id == g && rec.ok) ++c;
        return c;
    };
    switch (config.experiment) {
        case ExperimentKind::BaiYin: {
            table.header = {"grid_id", "n", "m", "p", "d", "gamma", "trials", "ok",
                            "mean_sigma_max", "median_sigma_max", "q10_sigma_max",
                            "q90_sigma_max", "mean_sigma_min", "median_sigma_min",
                            "q10_sigma_min", "q90_sigma_min", "mp_lower", "mp_upper"};
            for (int g = 0; g < points; ++g) {
                const GridPoint& pt = config.points[static_cast<std::size_t>(g)];
                const ProfileStats stats = profile_stats(point_profile(pt));
                const auto smax = collect(records, g, &TrialRecord::sigma_max);
                const auto smin = collect(records, g, &TrialRecord::sigma_min);
                const auto edges = mp_edges(stats.gamma);
                table.rows.push_back({fmt(g), fmt(pt.n), fmt(pt.m), fmt(pt.p), fmt(stats.d),
                                      fmt(stats.gamma), fmt(config.trials), fmt(ok_count(g)),
                                      fmt(mean(smax)), fmt(quantile(smax, 0.5)),
                                      fmt(quantile(smax, 0.1)), fmt(quantile(smax, 0.9)),
                                      fmt(mean(smin)), fmt(quantile(smin, 0.5)),
                                      fmt(quantile(smin, 0.1)), fmt(quantile(smin, 0.9)),
                                      fmt(edges.first), fmt(edges.second)});
            }
            break;
        }
        case ExperimentKind::RhoB: {
            table.header = {"grid_id", "n", "m", "p", "gamma_quarter", "epsilon", "threshold",
                            "converged", "nonconverged", "exceedances", "frequency",
                            "median_rho", "median_abs_dev"};
            for (int g = 0; g < points; ++g) {
                const GridPoint& pt = config.points[static_cast<std::size_t>(g)];
                const ProfileStats stats = profile_stats(point_profile(pt));
                const double gq = std::pow(stats.gamma, 0.25);
                std::vector<double> rhos, devs;
                int nonconverged = 0;
                for (const TrialRecord& rec : records) {
                    if (rec.grid_id != g || !rec.ok) continue;
                    if (!rec.rho_converged) {
                        ++nonconverged;
                        continue;
                    }
                    rhos.push_back(rec.rho_b);
                    devs.push_back(std::abs(rec.rho_b - gq));
                }
                for (double eps : config.epsilons) {
                    const double threshold = gq * (1.0 + eps);
                    int exceed = 0;
                    for (double r : rhos)
                        if (r > threshold) ++exceed;
                    const double freq =
                        rhos.empty() ? 0.0 : static_cast<double>(exceed) / rhos.size();
                    table.rows.push_back({fmt(g), fmt(pt.n), fmt(pt.m), fmt(pt.p), fmt(gq),
                                          fmt(eps), fmt(threshold),
                                          fmt(static_cast<int>(rhos.size())), fmt(nonconverged),
                                          fmt(exceed), fmt(freq), fmt(quantile(rhos, 0.5)),
                                          fmt(quantile(devs, 0.5))});
                }
            }
            break;
        }
        case ExperimentKind::TraceGrowth: {
            table.header = {"grid_id", "n", "m", "p", "l", "mean_trace", "normalized_ratio",
                            "median_growth_ratio"};
            for (int g = 0; g < points; ++g) {
                const GridPoint& pt = config.points[static_cast<std::size_t>(g)];
                const ProfileStats stats = profile_stats(point_profile(pt));
                const double q2 = stats.q * stats.q;
                const double mn =
                    static_cast<double>(pt.n) * static_cast<double>(pt.m);
                for (int l = std::max(1, config.l_min); l <= config.l_max; ++l) {
                    std::vector<double> traces, ratios;
                    for (const TrialRecord& rec : records) {
                        if (rec.grid_id != g || !rec.ok) continue;
                        const std::size_t idx = static_cast<std::size_t>(l - 1);
                        if (idx >= rec.trace_values.size()) continue;
                        traces.push_back(rec.trace_values[idx]);
                        if (l >= 2 && rec.trace_values[idx - 1] > 0.0)
                            ratios.push_back(
                                std::sqrt(rec.trace_values[idx] / rec.trace_values[idx - 1]));
                    }
                    const double envelope = std::pow(static_cast<double>(l), 4.0) * q2 * mn *
                                            std::pow(stats.gamma, (l - 1) / 2.0);
                    table.rows.push_back({fmt(g), fmt(pt.n), fmt(pt.m), fmt(pt.p), fmt(l),
                                          fmt(mean(traces)), fmt(mean(traces) / envelope),
                                          fmt(quantile(ratios, 0.5))});
                }
            }
            break;
        }
        case ExperimentKind::BoundTightness: {
            table.header = {"grid_id", "label", "instances", "hypotheses_passed",
                            "positive_bounds", "violations", "min_margin"};
            for (int g = 0; g < points; ++g) {
                for (const std::string label :
                     {"upper_shift", "upper_rescaled", "lower_imag_axis", "tail_upper_rhs",
                      "tail_upper_prob", "tail_lower_prob"}) {
                    int instances = 0, hyp = 0, positive = 0, violations = 0;
                    double min_margin = std::numeric_limits<double>::infinity();
                    for (const TrialRecord& rec : records) {
                        if (rec.grid_id != g || !rec.ok) continue;
                        for (const BoundReport& rep : rec.bound_reports) {
                            if (rep.label != label) continue;
                            ++instances;
                            if (!rep.hypotheses_ok) continue;
                            ++hyp;
                            if (rep.direction == BoundDirection::TailProbability) continue;
                            if (rep.bound_value > 0.0) ++positive;
                            if (rep.direction == BoundDirection::LowerOnSigmaMinSq &&
                                rep.vacuous)
                                continue;
                            min_margin = std::min(min_margin, rep.margin);
                            if (rep.margin < 0.0) ++violations;
                        }
                    }
                    table.rows.push_back({fmt(g), label, fmt(instances), fmt(hyp),
                                          fmt(positive), fmt(violations),
                                          fmt(std::isfinite(min_margin)
                                                  ? min_margin
                                                  : std::numeric_limits<double>::quiet_NaN())});
                }
            }
            break;
        }
        case ExperimentKind::IharaFuzz: {
            table.header = {"instances", "ok", "checked", "skipped", "violations",
                            "probe_failures", "block_gap_failures", "worst_indicator",
                            "worst_probe"};
            int checked = 0, skipped = 0, violations = 0, probe_failures = 0, gap_failures = 0;
            double worst_indicator = 0.0;
            double worst_probe = std::numeric_limits<double>::infinity();
            for (const TrialRecord& rec : records) {
                if (!rec.ok) continue;
                checked += rec.checked;
                skipped += rec.skipped;
                violations += rec.violations;
                probe_failures += rec.probe_failures;
                gap_failures += rec.block_gap_failures;
                worst_indicator = std::max(worst_indicator, rec.worst_indicator);
                if (std::isfinite(rec.worst_probe))
                    worst_probe = std::min(worst_probe, rec.worst_probe);
            }
            table.rows.push_back({fmt(static_cast<int>(records.size())), fmt(ok_count(0)),
                                  fmt(checked), fmt(skipped), fmt(violations),
                                  fmt(probe_failures), fmt(gap_failures), fmt(worst_indicator),
                                  fmt(worst_probe)});
            break;
        }
    }
    return table;
}

CsvTable build_reports_table(const std::vector<TrialRecord>& records) {
    CsvTable table;
    table.header = {"instance_id", "direction", "bound", "observed", "margin", "hypotheses_ok"};
    for (const TrialRecord& rec : records)
        for (const BoundReport& rep : rec.bound_reports)
            table.rows.push_back({rep.instance_id, rep.label, fmt(rep.bound_value),
                                  fmt(rep.observed_value), fmt(rep.margin),
                                  fmt(rep.hypotheses_ok)});
    return table;
}

nlohmann::json table_to_json(const CsvTable& table) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : table.rows) {
        nlohmann::json obj;
        for (std::size_t c = 0; c < table.header.size() && c < row.size(); ++c) {
            const std::string& cell = row[c];
            const bool integral =
                !cell.empty() &&
                cell.find_first_not_of("-0123456789") == std::string::npos &&
                cell.size() <= 18;
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (integral)
                obj[table.header[c]] = std::strtoll(cell.c_str(), nullptr, 10);
            else if (!cell.empty() && end == cell.c_str() + cell.size() &&
                     format_double(v) == cell)
                obj[table.header[c]] = v;
            else
                obj[table.header[c]] = cell;
        }
        rows.push_back(std::move(obj));
    }
    return rows;
}

} // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
    ExperimentResult result;
    result.records = run_trials(config);
    result.trials = build_trials_table(config, result.records);
    result.summary = build_summary_table(config, result.records);
    if (config.experiment == ExperimentKind::BoundTightness)
        result.reports = build_reports_table(result.records);
    return result;
}

std::vector<std::string> emit_report(const ExperimentResult& result,
                                     const ExperimentConfig& config, ReportFormat format) {
    if (result.records.empty()) throw std::invalid_argument("no records to emit");
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(config.out_dir, ec);
    if (ec) throw IoError("cannot create output directory: " + config.out_dir);

    std::vector<std::string> written;
    auto emit_table = [&](const CsvTable& table, const std::string& stem) {
        const std::string path = config.out_dir + "/" + stem +
                                 (format == ReportFormat::Csv ? ".csv" : ".json");
        if (format == ReportFormat::Csv)
            write_file(path, to_csv(table));
        else
            write_file(path, table_to_json(table).dump(2) + "\n");
        written.push_back(path);
    };

    emit_table(result.trials, "trials");
    emit_table(result.summary, "summary");
    if (!result.reports.header.empty() && !result.reports.rows.empty())
        emit_table(result.reports, "reports");

    // One summary slice per grid point for direct plotting.
    const int points = config.experiment == ExperimentKind::IharaFuzz
                           ? 1
                           : static_cast<int>(config.points.size());
    if (points > 1) {
        for (int g = 0; g < points; ++g) {
            CsvTable slice;
            slice.header = result.summary.header;
            for (const auto& row : result.summary.rows)
                if (!row.empty() && row.front() == std::to_string(g)) slice.rows.push_back(row);
            emit_table(slice, "summary_g" + std::to_string(g));
        }
    }
    return written;
}

ExperimentConfig config_from_json(const nlohmann::json& doc) {
    ExperimentConfig config;
    config.experiment = kind_from_name(doc.value("experiment", std::string("bai_yin")));
    config.trials = doc.value("trials", 1);
    if (config.trials < 1) throw ConfigError("trials must be at least 1");
    config.seed = doc.value("seed", std::uint64_t{1});
    config.parallelism = doc.value("parallelism", 0);
    config.out_dir = doc.value("out", std::string("out"));

    if (doc.contains("grid")) {
        const auto& grid = doc.at("grid");
        if (grid.contains("n") || grid.contains("m") || grid.contains("p")) {
            if (!(grid.contains("n") && grid.contains("m") && grid.contains("p")))
                throw ConfigError("grid needs n, m and p lists of equal length");
            const auto& ns = grid.at("n");
            const auto& ms = grid.at("m");
            const auto& ps = grid.at("p");
            if (ns.size() != ms.size() || ns.size() != ps.size() || ns.empty())
                throw ConfigError("grid needs n, m and p lists of equal length");
            for (std::size_t k = 0; k < ns.size(); ++k) {
                GridPoint point;
                point.n = ns.at(k).get<Eigen::Index>();
                point.m = ms.at(k).get<Eigen::Index>();
                point.p = ps.at(k).get<double>();
                if (point.n < 1 || point.m < 1)
                    throw ConfigError("grid dimensions must be positive");
                if (point.p < 0.0 || point.p > 1.0)
                    throw ConfigError("grid probabilities must lie in [0, 1]");
                config.points.push_back(std::move(point));
            }
        }
        if (grid.contains("epsilon")) {
            config.epsilons.clear();
            for (const auto& v : grid.at("epsilon")) {
                const double eps = v.get<double>();
                if (!(eps > 0.0)) throw ConfigError("epsilon values must be positive");
                config.epsilons.push_back(eps);
            }
            if (config.epsilons.empty()) throw ConfigError("empty epsilon grid");
        }
        config.l_min = grid.value("l_min", config.l_min);
        config.l_max = grid.value("l_max", config.l_max);
        if (config.l_min < 1 || config.l_max < config.l_min)
            throw ConfigError("l range must satisfy 1 <= l_min <= l_max");
        config.fuzz_max_vertices = grid.value("max_vertices", config.fuzz_max_vertices);
        if (config.fuzz_max_vertices < 2) throw ConfigError("max_vertices must be at least 2");
    }

    if (config.points.empty() && doc.contains("profile")) {
        const VarianceProfile profile = profile_from_json(doc.at("profile"));
        GridPoint point;
        point.n = profile.n;
        point.m = profile.m;
        const double first = profile.s(0, 0);
        point.p = (profile.s.array() == first).all()
                      ? first
                      : std::numeric_limits<double>::quiet_NaN();
        point.profile = profile;
        config.points.push_back(std::move(point));
    }
    if (config.points.empty() && config.experiment != ExperimentKind::IharaFuzz)
        throw ConfigError("no grid points: provide a profile or a grid");

    if (doc.contains("tolerances")) {
        const auto& tol = doc.at("tolerances");
        config.radius.tol = tol.value("radius_tol", config.radius.tol);
        config.radius.dense_threshold =
            tol.value("radius_dense_threshold", config.radius.dense_threshold);
        config.radius.max_power_steps =
            tol.value("radius_max_steps", config.radius.max_power_steps);
        config.ihara_tol = tol.value("ihara_tol", config.ihara_tol);
        config.trace.max_flops = tol.value("trace_max_flops", config.trace.max_flops);
    }
    return config;
}

ExperimentConfig load_config(const std::string& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_file(path));
    } catch (const IoError&) {
        throw;
    } catch (const std::exception& ex) {
        throw ConfigError(std::string("config parse failure: ") + ex.what());
    }
    try {
        return config_from_json(doc);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& ex) {
        throw ConfigError(std::string("bad config: ") + ex.what());
    }
}

double mean(const std::vector<double>& values) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc / static_cast<double>(values.size());
}

double quantile(std::vector<double> values, double p) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(values.begin(), values.end());
    const double pos = p * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] * (1.0 - frac) + values[hi] * frac;
}

} // namespace nbspectra
