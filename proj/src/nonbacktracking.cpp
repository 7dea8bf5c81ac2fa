#include "nbspectra/nonbacktracking.hpp"

#include "nbspectra/rng.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <numeric>

namespace nbspectra {

DirectedEdgeSet build_edge_index(const Eigen::MatrixXd& X) {
    if (!X.allFinite()) throw std::invalid_argument("matrix has non-finite entries");
    DirectedEdgeSet es;
    es.n = X.rows();
    es.m = X.cols();
    for (Eigen::Index i = 0; i < es.n; ++i) {
        for (Eigen::Index j = 0; j < es.m; ++j) {
            const double x = X(i, j);
            if (x == 0.0) continue;
            const Eigen::Index e = es.edge_count();
            es.tail.push_back(i);
            es.head.push_back(es.n + j);
            es.weight.push_back(x);
            es.reverse.push_back(e + 1);
            es.tail.push_back(es.n + j);
            es.head.push_back(i);
            es.weight.push_back(x);
            es.reverse.push_back(e);
        }
    }
    return es;
}

NBOperator::NBOperator(DirectedEdgeSet edges) : edges_(std::move(edges)) {
    const Eigen::Index nv = edges_.n + edges_.m;
    const Eigen::Index ne = edges_.edge_count();
    out_ptr_.assign(nv + 1, 0);
    for (Eigen::Index e = 0; e < ne; ++e) ++out_ptr_[edges_.tail[e] + 1];
    std::partial_sum(out_ptr_.begin(), out_ptr_.end(), out_ptr_.begin());
    out_edge_.resize(ne);
    std::vector<Eigen::Index> cursor(out_ptr_.begin(), out_ptr_.end() - 1);
    for (Eigen::Index e = 0; e < ne; ++e) out_edge_[cursor[edges_.tail[e]]++] = e;
}

NBOperator build_nb_operator(const Eigen::MatrixXd& X) {
    return NBOperator(build_edge_index(X));
}

std::span<const Eigen::Index> NBOperator::out_edges(Eigen::Index vertex) const {
    return {out_edge_.data() + out_ptr_[vertex],
            static_cast<std::size_t>(out_ptr_[vertex + 1] - out_ptr_[vertex])};
}

void NBOperator::apply(std::span<const double> v, std::span<double> y) const {
    const Eigen::Index nv = vertex_count();
    const Eigen::Index ne = edges_.edge_count();
    if (static_cast<Eigen::Index>(v.size()) != ne || static_cast<Eigen::Index>(y.size()) != ne)
        throw std::invalid_argument("vector length does not match the edge count");
    // Below the cutoff the parallel region costs more than the O(E) work.
    // Both paths compute element-for-element identical results.
    if (ne < 65536) {
        thread_local std::vector<double> scratch;
        if (static_cast<Eigen::Index>(scratch.size()) < nv)
            scratch.resize(static_cast<std::size_t>(nv));
        apply_factored(v, y, scratch);
        return;
    }
    std::vector<double> t(static_cast<std::size_t>(nv));
#pragma omp parallel for schedule(static)
    for (Eigen::Index w = 0; w < nv; ++w) {
        double acc = 0.0;
        for (Eigen::Index p = out_ptr_[w]; p < out_ptr_[w + 1]; ++p) {
            const Eigen::Index f = out_edge_[p];
            acc += edges_.weight[f] * v[f];
        }
        t[static_cast<std::size_t>(w)] = acc;
    }
#pragma omp parallel for schedule(static)
    for (Eigen::Index e = 0; e < ne; ++e) {
        const Eigen::Index r = edges_.reverse[e];
        y[e] = t[static_cast<std::size_t>(edges_.head[e])] - edges_.weight[r] * v[r];
    }
}

void NBOperator::apply_factored(std::span<const double> v, std::span<double> y,
                                std::span<double> vertex_scratch) const {
    const Eigen::Index nv = vertex_count();
    const Eigen::Index ne = edges_.edge_count();
    if (static_cast<Eigen::Index>(v.size()) != ne || static_cast<Eigen::Index>(y.size()) != ne)
        throw std::invalid_argument("vector length does not match the edge count");
    if (static_cast<Eigen::Index>(vertex_scratch.size()) < nv)
        throw std::invalid_argument("vertex scratch too small");
    for (Eigen::Index w = 0; w < nv; ++w) {
        double acc = 0.0;
        for (Eigen::Index p = out_ptr_[w]; p < out_ptr_[w + 1]; ++p) {
            const Eigen::Index f = out_edge_[p];
            acc += edges_.weight[f] * v[f];
        }
        vertex_scratch[static_cast<std::size_t>(w)] = acc;
    }
    for (Eigen::Index e = 0; e < ne; ++e) {
        const Eigen::Index r = edges_.reverse[e];
        y[e] = vertex_scratch[static_cast<std::size_t>(edges_.head[e])] - edges_.weight[r] * v[r];
    }
}

void NBOperator::apply_serial(std::span<const double> v, std::span<double> y) const {
    const Eigen::Index ne = edges_.edge_count();
    if (static_cast<Eigen::Index>(v.size()) != ne || static_cast<Eigen::Index>(y.size()) != ne)
        throw std::invalid_argument("vector length does not match the edge count");
    for (Eigen::Index e = 0; e < ne; ++e) {
        const Eigen::Index from = edges_.tail[e];
        double acc = 0.0;
        for (Eigen::Index p = out_ptr_[edges_.head[e]]; p < out_ptr_[edges_.head[e] + 1]; ++p) {
            const Eigen::Index f = out_edge_[p];
            if (edges_.head[f] == from) continue;
            acc += edges_.weight[f] * v[f];
        }
        y[e] = acc;
    }
}

Eigen::VectorXd NBOperator::apply(const Eigen::VectorXd& v) const {
    Eigen::VectorXd y(v.size());
    apply({v.data(), static_cast<std::size_t>(v.size())},
          {y.data(), static_cast<std::size_t>(y.size())});
    return y;
}

Eigen::MatrixXd NBOperator::dense(Eigen::Index max_dimension) const {
    const Eigen::Index ne = edges_.edge_count();
    if (ne > max_dimension)
        throw BudgetExceededError("dense reconstruction refused above the size cap");
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(ne, ne);
    for (Eigen::Index e = 0; e < ne; ++e) {
        for (Eigen::Index p = out_ptr_[edges_.head[e]]; p < out_ptr_[edges_.head[e] + 1]; ++p) {
            const Eigen::Index f = out_edge_[p];
            if (edges_.head[f] == edges_.tail[e]) continue;
            B(e, f) = edges_.weight[f];
        }
    }
    return B;
}

RadiusEstimate spectral_radius(const NBOperator& B, const RadiusOptions& opts) {
    RadiusEstimate est;
    est.tolerance = opts.tol;
    const Eigen::Index ne = B.dimension();
    if (ne == 0) {
        est.converged = true;
        return est;
    }
    if (ne <= opts.dense_threshold) {
        est.method = RadiusMethod::DenseEig;
        Eigen::EigenSolver<Eigen::MatrixXd> solver(B.dense(ne), false);
        est.rho = solver.eigenvalues().cwiseAbs().maxCoeff();
        est.converged = true;
        return est;
    }

    est.method = RadiusMethod::NormGrowth;
    Eigen::VectorXd v(ne);
    for (Eigen::Index e = 0; e < ne; ++e)
        v(e) = rng::uniform(opts.start_seed, static_cast<std::uint64_t>(e), 0) - 0.5;
    v.normalize();

    // Accumulated log ||B^l v||; the slope between successive ladder points
    // estimates log rho without the polynomial prefactor.
    double log_scale = 0.0;
    int l = 0;
    int next_ladder = 8;
    double prev_log_scale = 0.0;
    int prev_l = 0;
    double prev_slope = std::numeric_limits<double>::quiet_NaN();
    Eigen::VectorXd y(ne);
    while (l < opts.max_power_steps) {
        B.apply({v.data(), static_cast<std::size_t>(ne)},
                {y.data(), static_cast<std::size_t>(ne)});
        ++l;
        const double norm = y.norm();
        if (norm == 0.0) {
            // Nilpotent (forest) case: the power hit zero exactly.
            est.rho = 0.0;
            est.iterations = l;
            est.converged = true;
            return est;
        }
        log_scale += std::log(norm);
        v = y / norm;
        if (l == next_ladder) {
            const double slope = (log_scale - prev_log_scale) / (l - prev_l);
            if (!std::isnan(prev_slope) &&
                std::abs(slope - prev_slope) < opts.tol * std::max(1.0, std::abs(slope))) {
                est.rho = std::exp(slope);
                est.iterations = l;
                est.converged = true;
                return est;
            }
            prev_slope = slope;
            prev_log_scale = log_scale;
            prev_l = l;
            next_ladder = static_cast<int>(std::ceil(next_ladder * 1.5));
        }
    }
    est.rho = std::isnan(prev_slope) ? std::exp(log_scale / std::max(l, 1)) : std::exp(prev_slope);
    est.iterations = l;
    est.converged = false;
    return est;
}

namespace {

void check_trace_budget(Eigen::Index ne, int l_max, const TraceOptions& opts) {
    const double flops = static_cast<double>(ne) * static_cast<double>(ne) * l_max;
    if (flops > opts.max_flops)
        throw BudgetExceededError("trace power budget exceeded: E^2 * l = " +
                                  std::to_string(flops));
}

} // namespace

std::vector<double> trace_powers_serial(const NBOperator& B, int l_max, const TraceOptions& opts) {
    if (l_max < 1) throw std::invalid_argument("l must be at least 1");
    const Eigen::Index ne = B.dimension();
    check_trace_budget(ne, l_max, opts);
    std::vector<double> sums(static_cast<std::size_t>(l_max), 0.0);
    if (ne == 0) return sums;
    Eigen::VectorXd col(ne), next(ne);
    std::vector<double> scratch(static_cast<std::size_t>(B.vertex_count()));
    for (Eigen::Index c = 0; c < ne; ++c) {
        col.setZero();
        col(c) = 1.0;
        for (int l = 1; l <= l_max; ++l) {
            B.apply_factored({col.data(), static_cast<std::size_t>(ne)},
                             {next.data(), static_cast<std::size_t>(ne)}, scratch);
            sums[static_cast<std::size_t>(l - 1)] += next.squaredNorm();
            col.swap(next);
        }
    }
    return sums;
}

std::vector<double> trace_powers(const NBOperator& B, int l_max, const TraceOptions& opts) {
    if (l_max < 1) throw std::invalid_argument("l must be at least 1");
    const Eigen::Index ne = B.dimension();
    check_trace_budget(ne, l_max, opts);
    std::vector<double> sums(static_cast<std::size_t>(l_max), 0.0);
    if (ne == 0) return sums;
    // Per-column contributions land in a private slab and are reduced in a
    // fixed column order afterwards, so the result does not depend on the
    // thread count.
    std::vector<double> slab(static_cast<std::size_t>(ne) * l_max);
#pragma omp parallel
    {
        Eigen::VectorXd col(ne), next(ne);
        std::vector<double> scratch(static_cast<std::size_t>(B.vertex_count()));
#pragma omp for schedule(dynamic, 16)
        for (Eigen::Index c = 0; c < ne; ++c) {
            col.setZero();
            col(c) = 1.0;
            double* out = slab.data() + static_cast<std::size_t>(c) * l_max;
            for (int l = 1; l <= l_max; ++l) {
                B.apply_factored({col.data(), static_cast<std::size_t>(ne)},
                                 {next.data(), static_cast<std::size_t>(ne)}, scratch);
                out[l - 1] = next.squaredNorm();
                col.swap(next);
            }
        }
    }
    for (Eigen::Index c = 0; c < ne; ++c)
        for (int l = 0; l < l_max; ++l)
            sums[static_cast<std::size_t>(l)] += slab[static_cast<std::size_t>(c) * l_max + l];
    return sums;
}

double trace_power(const NBOperator& B, int l, const TraceOptions& opts) {
    return trace_powers(B, l, opts).back();
}

} // namespace nbspectra
