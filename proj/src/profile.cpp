#include "nbspectra/profile.hpp"

#include "nbspectra/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace nbspectra {

namespace {

Eigen::MatrixXd expand_spec(Eigen::Index n, Eigen::Index m, const PSpec& spec) {
    if (n < 1 || m < 1) throw std::invalid_argument("profile dimensions must be positive");
    if (const double* c = std::get_if<double>(&spec)) {
        return Eigen::MatrixXd::Constant(n, m, *c);
    }
    if (const Eigen::MatrixXd* full = std::get_if<Eigen::MatrixXd>(&spec)) {
        if (full->rows() != n || full->cols() != m)
            throw std::invalid_argument("profile matrix shape mismatch");
        return *full;
    }
    const BlockSpec& blocks = std::get<BlockSpec>(spec);
    Eigen::Index rb = static_cast<Eigen::Index>(blocks.row_sizes.size());
    Eigen::Index cb = static_cast<Eigen::Index>(blocks.col_sizes.size());
    if (blocks.values.rows() != rb || blocks.values.cols() != cb)
        throw std::invalid_argument("block value matrix shape mismatch");
    Eigen::Index rtot = 0, ctot = 0;
    for (auto r : blocks.row_sizes) rtot += r;
    for (auto c : blocks.col_sizes) ctot += c;
    if (rtot != n || ctot != m)
        throw std::invalid_argument("block sizes do not sum to profile dimensions");
    Eigen::MatrixXd s(n, m);
    Eigen::Index r0 = 0;
    for (Eigen::Index bi = 0; bi < rb; ++bi) {
        Eigen::Index c0 = 0;
        for (Eigen::Index bj = 0; bj < cb; ++bj) {
            s.block(r0, c0, blocks.row_sizes[bi], blocks.col_sizes[bj])
                .setConstant(blocks.values(bi, bj));
            c0 += blocks.col_sizes[bj];
        }
        r0 += blocks.row_sizes[bi];
    }
    return s;
}

} // namespace

VarianceProfile make_bipartite_profile(Eigen::Index n, Eigen::Index m, const PSpec& p_spec) {
    VarianceProfile profile;
    profile.n = n;
    profile.m = m;
    profile.s = expand_spec(n, m, p_spec);
    profile.model_kind = ModelKind::BipartiteBernoulli;
    if ((profile.s.array() < 0.0).any() || (profile.s.array() > 1.0).any())
        throw std::invalid_argument("edge probabilities must lie in [0, 1]");
    return profile;
}

VarianceProfile make_bounded_profile(Eigen::Index n, Eigen::Index m, const PSpec& s_spec) {
    VarianceProfile profile;
    profile.n = n;
    profile.m = m;
    profile.s = expand_spec(n, m, s_spec);
    profile.model_kind = ModelKind::BoundedGeneral;
    if ((profile.s.array() < 0.0).any())
        throw std::invalid_argument("second moments must be nonnegative");
    return profile;
}

ProfileStats profile_stats(const VarianceProfile& profile) {
    const Eigen::MatrixXd& s = profile.s;
    ProfileStats st;
    const double max_row = s.rowwise().sum().maxCoeff();
    const double max_col = s.colwise().sum().maxCoeff();
    st.d = std::max(max_row, max_col);
    if (st.d <= 0.0)
        throw std::invalid_argument("degenerate profile: all second moments are zero");
    st.rho_max = max_col / st.d;
    st.rho_tilde_max = max_row / st.d;
    st.gamma = std::min(st.rho_max, st.rho_tilde_max);
    if (profile.model_kind == ModelKind::BipartiteBernoulli) {
        Eigen::ArrayXXd var = s.array() * (1.0 - s.array());
        st.rho_tilde_min = var.colwise().sum().minCoeff() / st.d;
        st.q = std::sqrt(st.d);
    } else {
        st.rho_tilde_min = s.colwise().sum().minCoeff() / st.d;
        // Largest q compatible with the entrywise support constraint
        // s_ij <= 1/q^2.
        st.q = 1.0 / std::sqrt(s.maxCoeff());
    }
    st.N = std::max(profile.n, profile.m);
    st.kappa = static_cast<double>(st.N) * s.maxCoeff() / st.d;
    st.y = static_cast<double>(profile.m) / static_cast<double>(profile.n);
    return st;
}

SampledMatrix sample_centered_adjacency(const VarianceProfile& profile, std::uint64_t seed) {
    if (profile.model_kind != ModelKind::BipartiteBernoulli)
        throw std::invalid_argument("centered adjacency sampling requires the Bernoulli model");
    const ProfileStats st = profile_stats(profile);
    const double inv_sqrt_d = 1.0 / std::sqrt(st.d);
    SampledMatrix sample;
    sample.entries.resize(profile.n, profile.m);
    sample.q_bound = std::sqrt(st.d);
    sample.seed = seed;
    sample.profile_ref = profile.name;
    const Eigen::MatrixXd& p = profile.s;
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < profile.n; ++i) {
        for (Eigen::Index j = 0; j < profile.m; ++j) {
            const double pij = p(i, j);
            double a;
            if (pij <= 0.0)      a = 0.0;
            else if (pij >= 1.0) a = 1.0;
            else                 a = rng::uniform(seed, i, j) < pij ? 1.0 : 0.0;
            sample.entries(i, j) = (a - pij) * inv_sqrt_d;
        }
    }
    return sample;
}

SampledMatrix sample_bounded_model(const VarianceProfile& profile, double q, std::uint64_t seed) {
    if (profile.model_kind != ModelKind::BoundedGeneral)
        throw std::invalid_argument("three-point sampling requires the bounded general model");
    if (!(q > 0.0)) throw std::invalid_argument("q must be positive");
    const double cap = 1.0 / (q * q);
    if (profile.s.maxCoeff() > cap * (1.0 + 1e-15))
        throw std::invalid_argument("infeasible profile: some s_ij exceeds 1/q^2");
    SampledMatrix sample;
    sample.entries.resize(profile.n, profile.m);
    sample.q_bound = q;
    sample.seed = seed;
    sample.profile_ref = profile.name;
    const Eigen::MatrixXd& s = profile.s;
    const double step = 1.0 / q;
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < profile.n; ++i) {
        for (Eigen::Index j = 0; j < profile.m; ++j) {
            const double w = q * q * s(i, j); // P(|X_ij| = 1/q)
            const double u = rng::uniform(seed, i, j);
            double x = 0.0;
            if (u < 0.5 * w)      x = step;
            else if (u < w)       x = -step;
            sample.entries(i, j) = x;
        }
    }
    return sample;
}

} // namespace nbspectra
