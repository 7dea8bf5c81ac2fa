#include "nbspectra/spectra.hpp"

#include "nbspectra/rng.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nbspectra {

namespace {

// Gram-side backward-error proxy: compare sigma_k^2 against the eigenvalues
// of the smaller Gram matrix, computed by an unrelated factorization.
double gram_residual(const Eigen::MatrixXd& X, const std::vector<double>& sigma) {
    Eigen::MatrixXd gram;
    if (X.cols() <= X.rows())
        gram.noalias() = X.transpose() * X;
    else
        gram.noalias() = X * X.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd ev = es.eigenvalues(); // ascending
    const Eigen::Index k = ev.size();
    double worst = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) {
        const double lam = std::max(0.0, ev(k - 1 - i));
        worst = std::max(worst, std::abs(sigma[static_cast<std::size_t>(i)] * sigma[static_cast<std::size_t>(i)] - lam));
    }
    return worst;
}

SpectralSummary top_singular_power(const Eigen::MatrixXd& X, const SvdOptions& opts) {
    SpectralSummary out;
    out.method = SvdMethod::Iterative;
    const Eigen::Index m = X.cols();
    Eigen::VectorXd v(m);
    for (Eigen::Index j = 0; j < m; ++j)
        v(j) = rng::uniform(0x5EED5EEDull, static_cast<std::uint64_t>(j), 0) - 0.5;
    v.normalize();
    double lambda = 0.0, prev = -1.0;
    int it = 0;
    for (; it < opts.iterative_max_steps; ++it) {
        Eigen::VectorXd w = X.transpose() * (X * v);
        const double norm = w.norm();
        if (norm == 0.0) { lambda = 0.0; break; }
        lambda = v.dot(w);
        v = w / norm;
        if (prev >= 0.0 && std::abs(lambda - prev) <= opts.iterative_tol * std::max(1.0, lambda))
            break;
        prev = lambda;
    }
    out.sigma_max = std::sqrt(std::max(0.0, lambda));
    out.iterations = it;
    out.residual = (X.transpose() * (X * v) - lambda * v).norm();
    return out;
}

} // namespace

SpectralSummary singular_values(const Eigen::MatrixXd& X, const SvdOptions& opts) {
    if (!X.allFinite()) throw std::invalid_argument("matrix has non-finite entries");
    const Eigen::Index k = std::min(X.rows(), X.cols());
    if (k > opts.dense_threshold) {
        if (!opts.allow_iterative)
            throw std::invalid_argument("matrix exceeds the dense SVD threshold; "
                                        "request the iterative path explicitly");
        return top_singular_power(X, opts);
    }
    SpectralSummary out;
    out.method = SvdMethod::DenseFull;
    Eigen::VectorXd sv;
    if (k <= 16) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(X);
        sv = svd.singularValues();
    } else {
        Eigen::BDCSVD<Eigen::MatrixXd> svd(X);
        sv = svd.singularValues();
    }
    out.singular_values.assign(sv.data(), sv.data() + sv.size());
    out.sigma_max = out.singular_values.front();
    out.sigma_min = out.singular_values.back();
    if (opts.compute_residual)
        out.residual = gram_residual(X, out.singular_values);
    return out;
}

SpectralSummary singular_values(const SampledMatrix& X, const SvdOptions& opts) {
    return singular_values(X.entries, opts);
}

std::vector<double> dilation_eigenvalues(const Eigen::MatrixXd& X, Eigen::Index dense_threshold) {
    if (!X.allFinite()) throw std::invalid_argument("matrix has non-finite entries");
    const Eigen::Index n = X.rows(), m = X.cols();
    if (n + m > dense_threshold)
        throw std::invalid_argument("dilation exceeds the dense eigensolver threshold");
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n + m, n + m);
    H.topRightCorner(n, m) = X;
    H.bottomLeftCorner(m, n) = X.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd ev = es.eigenvalues();
    return std::vector<double>(ev.data(), ev.data() + ev.size());
}

std::pair<double, double> mp_edges(double gamma) {
    if (!(gamma > 0.0) || gamma > 1.0)
        throw std::invalid_argument("gamma must lie in (0, 1]");
    const double r = std::sqrt(gamma);
    return {1.0 - r, 1.0 + r};
}

} // namespace nbspectra
