#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

// The OpenMP kernels must be bitwise interchangeable with their serial
// reference implementations at any thread count: parallel loops write
// disjoint slots and every reduction runs in a fixed order.

#include "nbspectra/iharabass.hpp"
#include "nbspectra/nonbacktracking.hpp"
#include "nbspectra/profile.hpp"
#include "oracles.hpp"

#include <omp.h>

namespace {

struct ThreadCountGuard {
    int saved;
    explicit ThreadCountGuard(int n) : saved(omp_get_max_threads()) { omp_set_num_threads(n); }
    ~ThreadCountGuard() { omp_set_num_threads(saved); }
};

} // namespace

using namespace nbspectra;

TEST_CASE("sampling is independent of the thread count") {
    const VarianceProfile profile = make_bipartite_profile(64, 48, 0.23);
    Eigen::MatrixXd one_thread, many_threads;
    {
        ThreadCountGuard guard(1);
        one_thread = sample_centered_adjacency(profile, 42).entries;
    }
    {
        ThreadCountGuard guard(4);
        many_threads = sample_centered_adjacency(profile, 42).entries;
    }
    CHECK(one_thread == many_threads);
}

TEST_CASE("operator action is independent of the thread count") {
    const Eigen::MatrixXd X = oracles::random_matrix(40, 25, 7, 0.4);
    const NBOperator B = build_nb_operator(X);
    const Eigen::Index ne = B.dimension();
    std::uint64_t state = 11;
    Eigen::VectorXd v(ne);
    for (Eigen::Index e = 0; e < ne; ++e) v(e) = 2.0 * oracles::test_uniform(state) - 1.0;

    Eigen::VectorXd serial(ne), factored(ne), omp1(ne), omp4(ne);
    B.apply_serial({v.data(), static_cast<std::size_t>(ne)},
                   {serial.data(), static_cast<std::size_t>(ne)});
    std::vector<double> scratch(static_cast<std::size_t>(B.vertex_count()));
    B.apply_factored({v.data(), static_cast<std::size_t>(ne)},
                     {factored.data(), static_cast<std::size_t>(ne)}, scratch);
    {
        ThreadCountGuard guard(1);
        B.apply({v.data(), static_cast<std::size_t>(ne)},
                {omp1.data(), static_cast<std::size_t>(ne)});
    }
    {
        ThreadCountGuard guard(4);
        B.apply({v.data(), static_cast<std::size_t>(ne)},
                {omp4.data(), static_cast<std::size_t>(ne)});
    }
    CHECK(factored == omp1);
    CHECK(factored == omp4);
    // The row-sum reference takes a different summation route; roundoff only.
    CHECK((serial - factored).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("trace sweeps are independent of the thread count") {
    const Eigen::MatrixXd X = oracles::random_matrix(20, 12, 3, 0.5);
    const NBOperator B = build_nb_operator(X);
    const std::vector<double> serial = trace_powers_serial(B, 6);
    std::vector<double> omp1, omp4;
    {
        ThreadCountGuard guard(1);
        omp1 = trace_powers(B, 6);
    }
    {
        ThreadCountGuard guard(4);
        omp4 = trace_powers(B, 6);
    }
    CHECK(serial == omp1);
    CHECK(serial == omp4);
}

TEST_CASE("norm growth radius is independent of the thread count") {
    const Eigen::MatrixXd X = oracles::random_matrix(24, 15, 9, 0.5);
    const NBOperator B = build_nb_operator(X);
    RadiusOptions opts;
    opts.dense_threshold = 0;
    double rho1, rho4;
    int iters1, iters4;
    {
        ThreadCountGuard guard(1);
        const RadiusEstimate est = spectral_radius(B, opts);
        rho1 = est.rho;
        iters1 = est.iterations;
    }
    {
        ThreadCountGuard guard(4);
        const RadiusEstimate est = spectral_radius(B, opts);
        rho4 = est.rho;
        iters4 = est.iterations;
    }
    CHECK(rho1 == rho4);
    CHECK(iters1 == iters4);
}

TEST_CASE("axis scans are independent of the thread count") {
    const Eigen::MatrixXd X = oracles::random_matrix(30, 12, 21, 0.6);
    const std::vector<double> grid = {0.8, 1.0, 1.3, 1.9, 2.8, 4.1};
    AxisScan one, four;
    {
        ThreadCountGuard guard(1);
        one = imaginary_axis_scan(X, grid);
    }
    {
        ThreadCountGuard guard(4);
        four = imaginary_axis_scan(X, grid);
    }
    REQUIRE(one.rows.size() == four.rows.size());
    for (std::size_t g = 0; g < one.rows.size(); ++g) {
        CHECK(one.rows[g].min_m1 == four.rows[g].min_m1);
        CHECK(one.rows[g].smallest_eig == four.rows[g].smallest_eig);
        CHECK(one.rows[g].psd == four.rows[g].psd);
    }
}
