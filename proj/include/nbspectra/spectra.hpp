#pragma once

#include "nbspectra/profile.hpp"

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace nbspectra {

enum class SvdMethod { DenseFull, Iterative };

struct SpectralSummary {
    double sigma_max = 0.0;
    std::optional<double> sigma_min;            // absent on the iterative path
    std::vector<double> singular_values;        // descending; empty when iterative
    SvdMethod method = SvdMethod::DenseFull;
    double residual = 0.0;                      // max_k |sigma_k^2 - eig_k(X^T X)|
    int iterations = 0;
};

struct SvdOptions {
    Eigen::Index dense_threshold = 3000;  // on min(n, m)
    bool allow_iterative = false;         // above the threshold, top value only
    bool compute_residual = true;
    double iterative_tol = 1e-10;
    int iterative_max_steps = 10000;
};

/// All min(n,m) singular values on the dense path; only sigma_max on the
/// iterative path (power iteration on the Gram operator). Throws
/// std::invalid_argument above the dense threshold unless allow_iterative.
SpectralSummary singular_values(const Eigen::MatrixXd& X, const SvdOptions& opts = {});
SpectralSummary singular_values(const SampledMatrix& X, const SvdOptions& opts = {});

/// Eigenvalues of [0 X; X^T 0], ascending. Multiset equals {+/- sigma_k} plus
/// |n - m| zeros.
std::vector<double> dilation_eigenvalues(const Eigen::MatrixXd& X,
                                         Eigen::Index dense_threshold = 6000);

/// Bulk edges (1 - sqrt(gamma), 1 + sqrt(gamma)) for gamma in (0, 1].
std::pair<double, double> mp_edges(double gamma);

} // namespace nbspectra
