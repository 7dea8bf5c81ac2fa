#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace nbspectra {

struct BudgetExceededError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Oriented support edges of the dilation [0 X; X^T 0]. Vertices 0..n-1 are
/// rows of X, vertices n..n+m-1 are columns. Every nonzero X_ij contributes
/// the pair i -> n+j (forward) and n+j -> i (reverse), enumerated row-major
/// over (i, j) with the forward edge first, so E = 2 nnz(X).
struct DirectedEdgeSet {
    Eigen::Index n = 0;
    Eigen::Index m = 0;
    std::vector<Eigen::Index> tail;     // size E
    std::vector<Eigen::Index> head;     // size E
    std::vector<double> weight;         // H_{tail,head}
    std::vector<Eigen::Index> reverse;  // index of the opposite edge

    Eigen::Index edge_count() const { return static_cast<Eigen::Index>(tail.size()); }
};

/// Edge-to-edge operator: entry (e=(i,j), f=(k,l)) equals the weight of f
/// when f continues e (j = k) without reversing it (i != l).
///
/// Immutable after construction; all apply paths are pure and safe to call
/// concurrently. The fast action uses the factored form
///   (Bv)_e = t_{head(e)} - weight(rev(e)) * v_{rev(e)},
///   t_w    = sum of weight(f) * v_f over edges f leaving w,
/// which costs O(E) per apply instead of the quadratic row-by-row sum.
class NBOperator {
public:
    explicit NBOperator(DirectedEdgeSet edges);

    const DirectedEdgeSet& edges() const { return edges_; }
    Eigen::Index dimension() const { return edges_.edge_count(); }
    Eigen::Index vertex_count() const { return edges_.n + edges_.m; }

    /// y = Bv, parallel over vertices and edges. Bitwise identical to
    /// apply_factored at any thread count (no cross-thread reductions).
    void apply(std::span<const double> v, std::span<double> y) const;
    Eigen::VectorXd apply(const Eigen::VectorXd& v) const;

    /// Serial O(E) action with caller-provided scratch of size vertex_count().
    void apply_factored(std::span<const double> v, std::span<double> y,
                        std::span<double> vertex_scratch) const;

    /// Reference implementation: explicit sum over continuations per edge row.
    void apply_serial(std::span<const double> v, std::span<double> y) const;

    /// Dense E x E form for small operators (test and diagnostic use).
    Eigen::MatrixXd dense(Eigen::Index max_dimension = 2048) const;

    /// Out-edge index range of a vertex, in deterministic edge order.
    std::span<const Eigen::Index> out_edges(Eigen::Index vertex) const;

private:
    DirectedEdgeSet edges_;
    std::vector<Eigen::Index> out_ptr_;   // size n+m+1
    std::vector<Eigen::Index> out_edge_;  // edge indices grouped by tail
};

DirectedEdgeSet build_edge_index(const Eigen::MatrixXd& X);
NBOperator build_nb_operator(const Eigen::MatrixXd& X);

enum class RadiusMethod { DenseEig, NormGrowth };

struct RadiusEstimate {
    double rho = 0.0;
    RadiusMethod method = RadiusMethod::DenseEig;
    double tolerance = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct RadiusOptions {
    Eigen::Index dense_threshold = 2000;
    double tol = 1e-3;
    int max_power_steps = 4096;
    std::uint64_t start_seed = 0x9E3779B9ull;
};

/// Spectral radius of B. Below the dense threshold this is the exact maximum
/// modulus over the full complex spectrum; above it the growth rate of
/// log ||B^l v|| is tracked along a geometric ladder of l until two
/// consecutive slope estimates agree to tol. A non-converged estimate is
/// returned with converged = false, never silently.
RadiusEstimate spectral_radius(const NBOperator& B, const RadiusOptions& opts = {});

struct TraceOptions {
    double max_flops = 2e10;  // roughly E^2 * l
};

/// Exact Tr[B^l (B^l)^*] = ||B^l||_F^2, accumulated column by column.
double trace_power(const NBOperator& B, int l, const TraceOptions& opts = {});

/// All of ||B^l||_F^2 for l = 1..l_max in one sweep (index l-1 in the result).
std::vector<double> trace_powers(const NBOperator& B, int l_max, const TraceOptions& opts = {});
std::vector<double> trace_powers_serial(const NBOperator& B, int l_max, const TraceOptions& opts = {});

} // namespace nbspectra
