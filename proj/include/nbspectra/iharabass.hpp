#pragma once

#include <Eigen/Dense>

#include <complex>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

namespace nbspectra {

/// The deformation is undefined where lambda^2 equals H_ij H_ji for some
/// pair; since the dilation always has zero entries this excludes lambda = 0
/// as well as lambda^2 = |X_ij|^2 over the support.
struct SingularLambdaError : std::domain_error {
    using std::domain_error::domain_error;
};

using Complex = std::complex<double>;

/// Distance from lambda^2 to the excluded set {0} U {|X_ij|^2 : X_ij != 0}.
double singular_guard(const Eigen::MatrixXd& X, Complex lambda);

double default_guard_tol(const Eigen::MatrixXd& X);

/// Lambda-deformed matrices of the dilation of a real X:
///   X(lambda)_ij = lambda X_ij / (lambda^2 - X_ij^2)
///   m1_i = 1 + sum_k X_ik^2 / (lambda^2 - X_ik^2)   (rows)
///   m2_j = 1 + sum_k X_kj^2 / (lambda^2 - X_kj^2)   (columns)
/// The full forms are M(lambda) = diag(m1, m2) and H(lambda) with X(lambda)
/// and its transpose in the off-diagonal blocks.
struct DeformedSystem {
    Complex lambda;
    Eigen::VectorXcd m1;         // size n
    Eigen::VectorXcd m2;         // size m
    Eigen::MatrixXcd X_lambda;   // n x m
    double guard = 0.0;

    Eigen::MatrixXcd system() const;    // M(lambda) - H(lambda), (n+m) square
    Eigen::MatrixXcd H_lambda() const;
    Eigen::VectorXcd M_diagonal() const;
};

DeformedSystem deform(const Eigen::MatrixXd& X, Complex lambda, double guard_tol = -1.0);

struct IharaBassEvaluation {
    Complex lambda;
    double log_abs_det = 0.0;                 // log |det(M - H(lambda))|
    double smallest_singular_of_system = 0.0; // robust root indicator
    std::optional<double> block_log_abs_det;  // via the Schur-complement form
    double consistency_gap = 0.0;             // |full - block| when available
};

/// Root test for the spectrum of B: lambda is an eigenvalue of B exactly
/// when det(M(lambda) - H(lambda)) vanishes, equivalently when
/// det(M2 - X(lambda)^T M1^{-1} X(lambda)) det(M1) does. The block form is
/// skipped (not an error) when some |m1_i| < 1e-12.
IharaBassEvaluation ib_discriminant(const Eigen::MatrixXd& X, Complex lambda,
                                    double guard_tol = -1.0);

struct SpectrumCheckReport {
    int eigenvalues_total = 0;
    int eigenvalues_checked = 0;
    int eigenvalues_skipped = 0;   // excluded by the singular guard
    int violations = 0;            // on-spectrum indicator too large
    int probe_count = 0;
    int probe_failures = 0;        // off-spectrum indicator too small
    int block_checked = 0;
    int block_gap_failures = 0;
    double worst_indicator = 0.0;  // max scaled indicator over eigenvalues
    double worst_probe = std::numeric_limits<double>::infinity();
    double worst_block_gap = 0.0;

    bool ok() const { return violations == 0 && probe_failures == 0 && block_gap_failures == 0; }
};

/// Checks every eigenvalue of the dense operator against the determinant
/// criterion, probes two off-spectrum points on the real axis, and compares
/// the full and block log-determinants away from the numerical zero set.
SpectrumCheckReport verify_ib_on_spectrum(const Eigen::MatrixXd& X, double tol = 1e-8,
                                          Eigen::Index dense_threshold = 2000);

struct AxisScanRow {
    double beta = 0.0;
    double min_m1 = 0.0;           // min over i of m1_i(i beta), real here
    double smallest_eig = 0.0;     // of M2 - X(i beta)^* M1^{-1} X(i beta)
    bool psd = false;
    bool valid = false;            // false when some m1_i <= 0
};

/// Purely imaginary sweep lambda = i beta using real arithmetic throughout:
/// m1_i(i beta) = 1 - sum_k X_ik^2/(beta^2 + X_ik^2) and the scan matrix
/// M2 + R^T diag(1/m1) R with R_ij = beta X_ij/(beta^2 + X_ij^2) is real
/// symmetric. Requires the n >= m orientation; transposes internally and
/// reports it when given n < m.
struct AxisScan {
    std::vector<AxisScanRow> rows;
    bool transposed = false;
};

AxisScan imaginary_axis_scan(const Eigen::MatrixXd& X, const std::vector<double>& beta_grid);

} // namespace nbspectra
