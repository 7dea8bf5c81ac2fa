#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace nbspectra {

enum class ModelKind { BipartiteBernoulli, BoundedGeneral };

/// Entrywise second-moment profile of an n x m random matrix. For the
/// Bernoulli graph model the entries are edge probabilities p_ij; for the
/// bounded general model they are the target second moments E|X_ij|^2.
struct VarianceProfile {
    Eigen::Index n = 0;
    Eigen::Index m = 0;
    Eigen::MatrixXd s;
    ModelKind model_kind = ModelKind::BipartiteBernoulli;
    std::string name;
};

/// Scalars derived from a profile.
///
///   d              maximal expected degree: largest row or column sum of s
///   rho_max        largest column sum of s, divided by d
///   rho_tilde_max  largest row sum of s, divided by d
///   rho_tilde_min  smallest column sum of the per-entry variances, over d
///                  (p_ij(1-p_ij) for the graph model, s_ij otherwise)
///   gamma          min(rho_max, rho_tilde_max); the max of the two is 1
///   kappa          N * max_ij s_ij / d
///   q              sup-norm normalization, sqrt(d) for the graph model
struct ProfileStats {
    double d = 0.0;
    double rho_max = 0.0;
    double rho_tilde_max = 0.0;
    double rho_tilde_min = 0.0;
    double gamma = 0.0;
    double kappa = 0.0;
    double q = 0.0;
    Eigen::Index N = 0;
    double y = 0.0; // aspect ratio m/n
};

/// One realization. Entries satisfy max_ij |X_ij| <= 1/q_bound exactly and
/// are mean zero in distribution; (profile, seed) determines the matrix.
struct SampledMatrix {
    Eigen::MatrixXd entries;
    double q_bound = 0.0;
    std::uint64_t seed = 0;
    std::string profile_ref;
};

/// Probability/moment specification: a constant, a full n x m matrix, or a
/// block-constant description (row/column block sizes plus a value per block).
struct BlockSpec {
    std::vector<Eigen::Index> row_sizes;
    std::vector<Eigen::Index> col_sizes;
    Eigen::MatrixXd values;
};
using PSpec = std::variant<double, Eigen::MatrixXd, BlockSpec>;

VarianceProfile make_bipartite_profile(Eigen::Index n, Eigen::Index m, const PSpec& p_spec);
VarianceProfile make_bounded_profile(Eigen::Index n, Eigen::Index m, const PSpec& s_spec);

/// Throws std::invalid_argument when every s_ij is zero (d = 0).
ProfileStats profile_stats(const VarianceProfile& profile);

/// Entries (Bernoulli(p_ij) - p_ij)/sqrt(d), independent across entries.
SampledMatrix sample_centered_adjacency(const VarianceProfile& profile, std::uint64_t seed);

/// Symmetric three-point entries on {-1/q, 0, +1/q} with E|X_ij|^2 = s_ij.
/// Requires s_ij <= 1/q^2 entrywise.
SampledMatrix sample_bounded_model(const VarianceProfile& profile, double q, std::uint64_t seed);

} // namespace nbspectra
