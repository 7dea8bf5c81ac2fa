#pragma once

#include "nbspectra/profile.hpp"

#include <Eigen/Dense>

#include <map>
#include <string>

namespace nbspectra {

/// The closed-form tail expressions carry unspecified absolute constants.
/// They live here explicitly, all defaulting to 1, and are surfaced in every
/// report instead of being baked into the formulas.
struct ConstantsMap {
    std::map<std::string, double> values;
    double get(const std::string& name) const {
        auto it = values.find(name);
        return it == values.end() ? 1.0 : it->second;
    }
};

/// Row/column norms of X and of its dilation H = [0 X; X^T 0]:
/// sup |X_ij|, max row/column l2 norms, and their H counterparts
/// ||H||_{1,inf} = max |H_ij| and ||H||_{2,inf} = max row l2 norm of H.
struct MatrixNorms {
    double sup_abs = 0.0;
    double row_l2_max = 0.0;   // max_i (sum_j X_ij^2)^(1/2)
    double col_l2_max = 0.0;   // max_j (sum_i X_ij^2)^(1/2)
    double col_l2_min = 0.0;
    double h_1inf = 0.0;       // = sup_abs
    double h_2inf = 0.0;       // = max(row_l2_max, col_l2_max)
};

MatrixNorms matrix_norms(const Eigen::MatrixXd& X);

/// Tightest gamma satisfying min(||X||_{2,inf}, ||X^*||_{2,inf})
/// <= sqrt(gamma) ||H||_{2,inf}, measured from the instance.
double measured_gamma(const MatrixNorms& norms);

/// Upper bound on sigma_max(X)^2 at a shift lambda >= the operator radius:
/// (lambda + 1/lambda)(lambda + gamma/lambda)
///   + 6 delta/gamma (2 lambda + (1+gamma)/lambda) + 36 delta^2/gamma^2.
/// Requires lambda > 0 and delta in [0, sqrt(gamma)].
double sigma_max_sq_bound(double lambda, double gamma, double delta);

/// Piecewise envelope factors of the rescaled bound. Both use the growing
/// branch at x = gamma^(1/4) exactly; f is continuous there, g jumps to the
/// larger value, which keeps the upper bound valid.
struct EnvelopeFactors {
    double f = 0.0;  // (x + 1/x)(x + gamma/x), flat (1+sqrt(gamma))^2 below
    double g = 0.0;  // 2(x + 1/x), flat 4 below
};
EnvelopeFactors envelope_factors(double x, double gamma);

/// Scale-free upper bound on sigma_max(X)^2 from measured norms and the
/// non-backtracking radius:
///   h2^2 f(rho/h2) + 12 gamma^(-5/4) g(rho/h2) h2 h1 + 36 gamma^(-2) h1^2.
double rescaled_sigma_max_sq_bound(double h2inf, double h1inf, double rho_b, double gamma);

struct LowerBoundValue {
    double value = 0.0;        // clamped at zero
    double unclamped = 0.0;
    bool degenerate_square = false;  // gamma = 1 collapses the leading factor
    bool vacuous() const { return value == 0.0; }
};

/// Lower bound on sigma_min(X)^2 along the imaginary axis at beta:
///   (sqrt(g)-g)/(sqrt(g)+delta) *
///     (beta^2/(beta^2+delta^2) rho_tilde_min - beta^2 - C_g delta^2 - delta)_+
/// with C_g = 4 (C1 + delta/gamma)(sqrt(g)+delta) / (sqrt(g)(sqrt(g)-g)).
/// Requires beta >= gamma^(1/4)(1 + sqrt(delta)).
LowerBoundValue sigma_min_sq_bound(double beta, double gamma, double delta,
                                   double rho_tilde_min, double c1);

/// Probabilistic right-hand sides, evaluated for display with explicit
/// constants; the regime flag reports gamma^(-1/4) <= q <= N^(1/10) k^(-1/9)
/// g^(-1/18) without enforcing it.
struct TailBoundValue {
    double value = 0.0;
    bool in_regime = true;
};
TailBoundValue sigma_max_tail_rhs(double q, double gamma, double N, double K,
                                  const ConstantsMap& constants = {});
double sigma_min_tail_rhs(double gamma, double delta, double rho_tilde_min,
                          const ConstantsMap& constants = {});

double bennett_h(double delta);
/// exp(-q^2 rho h(delta)).
double bennett_tail(double q, double rho, double delta);

/// Success-probability expressions attached to the tail bounds. Their
/// absolute constants are unknowable, so these are display-only values
/// (possibly negative at desk scale) and are never asserted.
double sigma_max_success_probability(double gamma, double N, double K,
                                     const ConstantsMap& constants = {});
double sigma_min_success_probability(double n, double gamma, double q, double delta,
                                     const ConstantsMap& constants = {});

/// Named hypothesis booleans for one realization against its profile stats
/// at a given delta.
struct HypothesisChecks {
    bool entry_bound_delta = false;   // sup |X_ij| <= delta
    bool entry_bound_q = false;       // sup |X_ij| <= 1/q
    bool row_envelope = false;        // max row sum of squares <= rho_tilde_max (1+delta)
    bool row_envelope_gamma = false;  // max row sum of squares <= gamma (1+delta)
    bool col_envelope = false;        // max col sum of squares <= rho_max (1+delta)
    bool col_floor = false;           // min col sum of squares >= rho_tilde_min (1-delta)
    bool col_ceiling = false;         // max col sum of squares <= 1+delta
    bool xx_star = false;             // min row/col l2 norm <= sqrt(gamma) ||H||_{2,inf}

    bool upper_ok() const { return entry_bound_delta && row_envelope && col_envelope; }
    bool lower_ok() const {
        return entry_bound_delta && row_envelope_gamma && col_floor && col_ceiling;
    }
};

HypothesisChecks check_hypotheses(const Eigen::MatrixXd& X, const ProfileStats& stats,
                                  double delta);

/// Smallest delta for which the named envelope set passes, 0 floored.
double min_delta_upper(const Eigen::MatrixXd& X, const ProfileStats& stats);
double min_delta_lower(const Eigen::MatrixXd& X, const ProfileStats& stats);

enum class BoundDirection { UpperOnSigmaMaxSq, LowerOnSigmaMinSq, TailProbability };

struct BoundReport {
    std::string instance_id;
    std::string label;         // which formula produced the bound
    BoundDirection direction = BoundDirection::UpperOnSigmaMaxSq;
    double bound_value = 0.0;
    double observed_value = 0.0;
    double margin = 0.0;       // slack in the bound's favor
    bool hypotheses_ok = false;
    bool vacuous = false;
};

BoundReport make_report(std::string instance_id, std::string label, BoundDirection direction,
                        double bound, double observed, bool hypotheses_ok);

} // namespace nbspectra
