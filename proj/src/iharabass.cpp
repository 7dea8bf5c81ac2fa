#include "nbspectra/iharabass.hpp"

#include "nbspectra/nonbacktracking.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>

namespace nbspectra {

double singular_guard(const Eigen::MatrixXd& X, Complex lambda) {
    const Complex l2 = lambda * lambda;
    double guard = std::abs(l2); // the dilation always has zero entries
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        for (Eigen::Index j = 0; j < X.cols(); ++j) {
            const double x = X(i, j);
            if (x == 0.0) continue;
            guard = std::min(guard, std::abs(l2 - Complex(x * x, 0.0)));
        }
    return guard;
}

double default_guard_tol(const Eigen::MatrixXd& X) {
    const double peak = X.size() > 0 ? X.cwiseAbs().maxCoeff() : 0.0;
    return std::max(1e-6 * peak * peak, 1e-30);
}

Eigen::MatrixXcd DeformedSystem::H_lambda() const {
    const Eigen::Index n = m1.size(), m = m2.size();
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(n + m, n + m);
    H.topRightCorner(n, m) = X_lambda;
    H.bottomLeftCorner(m, n) = X_lambda.transpose();
    return H;
}

Eigen::VectorXcd DeformedSystem::M_diagonal() const {
    Eigen::VectorXcd d(m1.size() + m2.size());
    d << m1, m2;
    return d;
}

Eigen::MatrixXcd DeformedSystem::system() const {
    Eigen::MatrixXcd S = -H_lambda();
    S.diagonal() += M_diagonal();
    return S;
}

DeformedSystem deform(const Eigen::MatrixXd& X, Complex lambda, double guard_tol) {
    if (guard_tol < 0.0) guard_tol = default_guard_tol(X);
    DeformedSystem sys;
    sys.lambda = lambda;
    sys.guard = singular_guard(X, lambda);
    if (sys.guard < guard_tol)
        throw SingularLambdaError("lambda^2 too close to an entry of the excluded set");
    const Eigen::Index n = X.rows(), m = X.cols();
    const Complex l2 = lambda * lambda;
    sys.m1 = Eigen::VectorXcd::Ones(n);
    sys.m2 = Eigen::VectorXcd::Ones(m);
    sys.X_lambda.resize(n, m);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            const double x = X(i, j);
            if (x == 0.0) {
                sys.X_lambda(i, j) = Complex(0.0, 0.0);
                continue;
            }
            const Complex denom = l2 - Complex(x * x, 0.0);
            sys.X_lambda(i, j) = lambda * x / denom;
            const Complex term = Complex(x * x, 0.0) / denom;
            sys.m1(i) += term;
            sys.m2(j) += term;
        }
    }
    return sys;
}

namespace {

double log_abs_det_lu(const Eigen::MatrixXcd& A) {
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        const double u = std::abs(lu.matrixLU()(i, i));
        if (u == 0.0) return -std::numeric_limits<double>::infinity();
        acc += std::log(u);
    }
    return acc;
}

} // namespace

IharaBassEvaluation ib_discriminant(const Eigen::MatrixXd& X, Complex lambda, double guard_tol) {
    const DeformedSystem sys = deform(X, lambda, guard_tol);
    IharaBassEvaluation eval;
    eval.lambda = lambda;
    const Eigen::MatrixXcd S = sys.system();
    eval.log_abs_det = log_abs_det_lu(S);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(S);
    eval.smallest_singular_of_system = svd.singularValues().minCoeff();
    if (sys.m1.cwiseAbs().minCoeff() >= 1e-12) {
        // det(M - H) = det(M2 - X(l)^T M1^{-1} X(l)) det(M1) for real X.
        Eigen::MatrixXcd schur = sys.m2.asDiagonal();
        schur.noalias() -= sys.X_lambda.transpose() *
                           sys.m1.cwiseInverse().asDiagonal() * sys.X_lambda;
        double block = log_abs_det_lu(schur);
        for (Eigen::Index i = 0; i < sys.m1.size(); ++i)
            block += std::log(std::abs(sys.m1(i)));
        eval.block_log_abs_det = block;
        eval.consistency_gap = std::abs(eval.log_abs_det - block);
    }
    return eval;
}

SpectrumCheckReport verify_ib_on_spectrum(const Eigen::MatrixXd& X, double tol,
                                          Eigen::Index dense_threshold) {
    const NBOperator B = build_nb_operator(X);
    if (B.dimension() > dense_threshold)
        throw std::invalid_argument("operator too large for an exact spectrum check");
    SpectrumCheckReport report;
    const double guard_tol = default_guard_tol(X);

    Eigen::VectorXcd spectrum;
    double rho = 0.0;
    if (B.dimension() > 0) {
        Eigen::EigenSolver<Eigen::MatrixXd> solver(B.dense(dense_threshold), false);
        spectrum = solver.eigenvalues();
        rho = spectrum.cwiseAbs().maxCoeff();
    }
    report.eigenvalues_total = static_cast<int>(spectrum.size());

    auto evaluate = [&](Complex lambda, double& indicator, double& scale,
                        IharaBassEvaluation& eval) {
        eval = ib_discriminant(X, lambda, guard_tol);
        const DeformedSystem sys = deform(X, lambda, guard_tol);
        const double m_norm = sys.M_diagonal().cwiseAbs().maxCoeff();
        double h_norm = 0.0;
        if (sys.X_lambda.size() > 0) {
            Eigen::JacobiSVD<Eigen::MatrixXcd> svd(sys.X_lambda);
            h_norm = svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
        }
        indicator = eval.smallest_singular_of_system;
        scale = 1.0 + m_norm + h_norm;
    };

    for (Eigen::Index k = 0; k < spectrum.size(); ++k) {
        const Complex lambda = spectrum(k);
        if (singular_guard(X, lambda) < guard_tol) {
            ++report.eigenvalues_skipped;
            continue;
        }
        double indicator = 0.0, scale = 1.0;
        IharaBassEvaluation eval;
        evaluate(lambda, indicator, scale, eval);
        ++report.eigenvalues_checked;
        report.worst_indicator = std::max(report.worst_indicator, indicator / scale);
        if (indicator > tol * scale) ++report.violations;
    }

    for (double offset : {0.5, 1.0}) {
        const Complex lambda(rho + offset, 0.0);
        if (singular_guard(X, lambda) < guard_tol) continue;
        double indicator = 0.0, scale = 1.0;
        IharaBassEvaluation eval;
        evaluate(lambda, indicator, scale, eval);
        ++report.probe_count;
        report.worst_probe = std::min(report.worst_probe, indicator);
        if (indicator < 1e-4) {
            ++report.probe_failures;
            continue;
        }
        // Determinant agreement is only meaningful away from the zero set,
        // where both log-magnitudes are well defined.
        if (eval.block_log_abs_det) {
            ++report.block_checked;
            report.worst_block_gap = std::max(report.worst_block_gap, eval.consistency_gap);
            if (eval.consistency_gap > 1e-8 + 1e-8 * std::abs(eval.log_abs_det))
                ++report.block_gap_failures;
        }
    }
    return report;
}

AxisScan imaginary_axis_scan(const Eigen::MatrixXd& X_in, const std::vector<double>& beta_grid) {
    AxisScan scan;
    Eigen::MatrixXd X = X_in;
    if (X.rows() < X.cols()) {
        X = X_in.transpose().eval();
        scan.transposed = true;
    }
    for (double beta : beta_grid)
        if (!(beta > 0.0)) throw std::invalid_argument("beta grid must be positive");
    scan.rows.resize(beta_grid.size());
    const Eigen::Index n = X.rows(), m = X.cols();
    const Eigen::ArrayXXd Xsq = X.array().square();
#pragma omp parallel for schedule(dynamic)
    for (std::size_t g = 0; g < beta_grid.size(); ++g) {
        const double beta = beta_grid[g];
        AxisScanRow row;
        row.beta = beta;
        const Eigen::ArrayXXd frac = Xsq / (beta * beta + Xsq); // X^2/(b^2+X^2)
        const Eigen::VectorXd m1 = (1.0 - frac.rowwise().sum()).matrix();
        const Eigen::VectorXd m2 = (1.0 - frac.colwise().sum().transpose()).matrix();
        row.min_m1 = n > 0 ? m1.minCoeff() : 1.0;
        if (row.min_m1 <= 0.0) {
            scan.rows[g] = row; // outside the positive-definite regime
            continue;
        }
        row.valid = true;
        const Eigen::MatrixXd R = (beta * X.array() / (beta * beta + Xsq)).matrix();
        Eigen::MatrixXd scan_matrix = m2.asDiagonal();
        scan_matrix.noalias() += R.transpose() * m1.cwiseInverse().asDiagonal() * R;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(scan_matrix, Eigen::EigenvaluesOnly);
        row.smallest_eig = m > 0 ? es.eigenvalues().minCoeff() : 1.0;
        const double top = m > 0 ? es.eigenvalues().maxCoeff() : 1.0;
        row.psd = row.smallest_eig >= -1e-10 * std::max(1.0, std::abs(top));
        scan.rows[g] = row;
    }
    return scan;
}

} // namespace nbspectra
