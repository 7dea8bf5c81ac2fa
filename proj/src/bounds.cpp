#include "nbspectra/bounds.hpp"

#include <cmath>
#include <stdexcept>

namespace nbspectra {

MatrixNorms matrix_norms(const Eigen::MatrixXd& X) {
    MatrixNorms norms;
    if (X.size() == 0) return norms;
    norms.sup_abs = X.cwiseAbs().maxCoeff();
    norms.row_l2_max = X.rowwise().norm().maxCoeff();
    norms.col_l2_max = X.colwise().norm().maxCoeff();
    norms.col_l2_min = X.colwise().norm().minCoeff();
    norms.h_1inf = norms.sup_abs;
    norms.h_2inf = std::max(norms.row_l2_max, norms.col_l2_max);
    return norms;
}

double measured_gamma(const MatrixNorms& norms) {
    if (norms.h_2inf == 0.0) return 1.0;
    const double r = std::min(norms.row_l2_max, norms.col_l2_max) / norms.h_2inf;
    return std::min(1.0, r * r);
}

double sigma_max_sq_bound(double lambda, double gamma, double delta) {
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    if (!(gamma > 0.0) || gamma > 1.0) throw std::invalid_argument("gamma must lie in (0, 1]");
    if (delta < 0.0 || delta > std::sqrt(gamma))
        throw std::invalid_argument("delta must lie in [0, sqrt(gamma)]");
    const double main = (lambda + 1.0 / lambda) * (lambda + gamma / lambda);
    const double cross = 6.0 * delta / gamma * (2.0 * lambda + (1.0 + gamma) / lambda);
    const double tail = 36.0 * delta * delta / (gamma * gamma);
    return main + cross + tail;
}

EnvelopeFactors envelope_factors(double x, double gamma) {
    if (x < 0.0) throw std::invalid_argument("x must be nonnegative");
    if (!(gamma > 0.0) || gamma > 1.0) throw std::invalid_argument("gamma must lie in (0, 1]");
    const double knee = std::pow(gamma, 0.25);
    EnvelopeFactors env;
    if (x >= knee) {
        env.f = (x + 1.0 / x) * (x + gamma / x);
        env.g = 2.0 * (x + 1.0 / x);
    } else {
        const double r = std::sqrt(gamma);
        env.f = (r + 1.0) * (r + 1.0);
        env.g = 4.0;
    }
    return env;
}

double rescaled_sigma_max_sq_bound(double h2inf, double h1inf, double rho_b, double gamma) {
    if (!(h2inf > 0.0)) throw std::invalid_argument("h2inf must be positive");
    if (h1inf < 0.0 || rho_b < 0.0) throw std::invalid_argument("norms must be nonnegative");
    const EnvelopeFactors env = envelope_factors(rho_b / h2inf, gamma);
    return h2inf * h2inf * env.f +
           12.0 * std::pow(gamma, -1.25) * env.g * h2inf * h1inf +
           36.0 * std::pow(gamma, -2.0) * h1inf * h1inf;
}

LowerBoundValue sigma_min_sq_bound(double beta, double gamma, double delta,
                                   double rho_tilde_min, double c1) {
    if (!(gamma > 0.0) || gamma > 1.0) throw std::invalid_argument("gamma must lie in (0, 1]");
    if (delta < 0.0 || delta >= 1.0) throw std::invalid_argument("delta must lie in [0, 1)");
    LowerBoundValue out;
    if (gamma == 1.0) {
        out.degenerate_square = true; // sqrt(gamma) - gamma vanishes
        return out;
    }
    const double beta_floor = std::pow(gamma, 0.25) * (1.0 + std::sqrt(delta));
    if (beta < beta_floor * (1.0 - 1e-12))
        throw std::invalid_argument("beta must be at least gamma^(1/4)(1 + sqrt(delta))");
    const double root = std::sqrt(gamma);
    const double lead = (root - gamma) / (root + delta);
    const double c_gamma = 4.0 / root * (c1 + delta / gamma) * (root + delta) / (root - gamma);
    const double b2 = beta * beta;
    out.unclamped = lead * (b2 / (b2 + delta * delta) * rho_tilde_min - b2 -
                            c_gamma * delta * delta - delta);
    out.value = std::max(0.0, out.unclamped);
    return out;
}

TailBoundValue sigma_max_tail_rhs(double q, double gamma, double N, double K,
                                  const ConstantsMap& constants) {
    if (!(q > 0.0) || !(N > 1.0)) throw std::invalid_argument("q > 0 and N > 1 required");
    TailBoundValue out;
    const double eta = std::sqrt(std::log(N)) / q;
    const double damp = std::sqrt(std::max(1.0, std::log(eta)));
    const double c1 = constants.get("C1");
    out.value = std::sqrt(gamma) + 1.0 +
                c1 * (K + std::pow(gamma, -1.5)) * eta / damp;
    const double kappa = constants.get("kappa");
    const double q_hi = std::pow(N, 0.1) * std::pow(kappa, -1.0 / 9.0) * std::pow(gamma, -1.0 / 18.0);
    out.in_regime = q >= std::pow(gamma, -0.25) && q <= q_hi;
    return out;
}

double sigma_min_tail_rhs(double gamma, double delta, double rho_tilde_min,
                          const ConstantsMap& constants) {
    if (!(gamma > 0.0) || gamma >= 1.0) throw std::invalid_argument("gamma must lie in (0, 1)");
    if (!(delta > 0.0) || delta >= 1.0) throw std::invalid_argument("delta must lie in (0, 1)");
    const double root = std::sqrt(gamma);
    const double inner = rho_tilde_min - root - constants.get("Cprime") * std::sqrt(delta);
    return (root - gamma) / (root + delta) * std::max(0.0, inner);
}

double bennett_h(double delta) {
    if (delta < 0.0) throw std::invalid_argument("delta must be nonnegative");
    return (1.0 + delta) * std::log1p(delta) - delta;
}

double bennett_tail(double q, double rho, double delta) {
    if (q < 0.0 || rho < 0.0) throw std::invalid_argument("q and rho must be nonnegative");
    return std::exp(-q * q * rho * bennett_h(delta));
}

double sigma_max_success_probability(double gamma, double N, double K,
                                     const ConstantsMap& constants) {
    const double c = constants.get("C");
    const double c1 = constants.get("c1");
    const double c2 = constants.get("c2");
    const double c3 = constants.get("c3");
    return 1.0 - c * (std::pow(gamma, -5.0 / 6.0) *
                          std::pow(N, 3.0 - c1 * std::log1p(c2 * K)) +
                      std::pow(N, 1.0 - c3 * gamma * K * K));
}

double sigma_min_success_probability(double n, double gamma, double q, double delta,
                                     const ConstantsMap& constants) {
    const double c = constants.get("C");
    return 1.0 - 3.0 * n * std::exp(-0.3 * gamma * q * q * delta * delta) -
           2.0 * std::exp(-q * q) -
           c * std::pow(gamma, -5.0 / 6.0) *
               std::pow(n, 3.0 - 0.5 * q * std::sqrt(delta));
}

HypothesisChecks check_hypotheses(const Eigen::MatrixXd& X, const ProfileStats& stats,
                                  double delta) {
    const MatrixNorms norms = matrix_norms(X);
    HypothesisChecks checks;
    checks.entry_bound_delta = norms.sup_abs <= delta;
    checks.entry_bound_q = stats.q > 0.0 && norms.sup_abs <= 1.0 / stats.q;
    const double row_sq = norms.row_l2_max * norms.row_l2_max;
    const double col_sq = norms.col_l2_max * norms.col_l2_max;
    const double col_sq_min = norms.col_l2_min * norms.col_l2_min;
    checks.row_envelope = row_sq <= stats.rho_tilde_max * (1.0 + delta);
    checks.row_envelope_gamma = row_sq <= stats.gamma * (1.0 + delta);
    checks.col_envelope = col_sq <= stats.rho_max * (1.0 + delta);
    checks.col_floor = col_sq_min >= stats.rho_tilde_min * (1.0 - delta);
    checks.col_ceiling = col_sq <= 1.0 + delta;
    checks.xx_star = std::min(norms.row_l2_max, norms.col_l2_max) <=
                     std::sqrt(stats.gamma) * norms.h_2inf + 1e-15;
    return checks;
}

// Nudged one ulp-scale up so the envelope checks pass at the boundary.
double min_delta_upper(const Eigen::MatrixXd& X, const ProfileStats& stats) {
    const MatrixNorms norms = matrix_norms(X);
    double delta = norms.sup_abs;
    if (stats.rho_tilde_max > 0.0)
        delta = std::max(delta, norms.row_l2_max * norms.row_l2_max / stats.rho_tilde_max - 1.0);
    if (stats.rho_max > 0.0)
        delta = std::max(delta, norms.col_l2_max * norms.col_l2_max / stats.rho_max - 1.0);
    return std::max(0.0, delta) * (1.0 + 1e-12);
}

double min_delta_lower(const Eigen::MatrixXd& X, const ProfileStats& stats) {
    const MatrixNorms norms = matrix_norms(X);
    double delta = norms.sup_abs;
    if (stats.gamma > 0.0)
        delta = std::max(delta, norms.row_l2_max * norms.row_l2_max / stats.gamma - 1.0);
    delta = std::max(delta, norms.col_l2_max * norms.col_l2_max - 1.0);
    if (stats.rho_tilde_min > 0.0)
        delta = std::max(delta, 1.0 - norms.col_l2_min * norms.col_l2_min / stats.rho_tilde_min);
    return std::max(0.0, delta) * (1.0 + 1e-12);
}

BoundReport make_report(std::string instance_id, std::string label, BoundDirection direction,
                        double bound, double observed, bool hypotheses_ok) {
    BoundReport report;
    report.instance_id = std::move(instance_id);
    report.label = std::move(label);
    report.direction = direction;
    report.bound_value = bound;
    report.observed_value = observed;
    report.margin = direction == BoundDirection::LowerOnSigmaMinSq ? observed - bound
                                                                   : bound - observed;
    report.hypotheses_ok = hypotheses_ok;
    report.vacuous = direction == BoundDirection::LowerOnSigmaMinSq && bound == 0.0;
    return report;
}

} // namespace nbspectra
