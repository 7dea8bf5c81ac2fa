#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nbspectra/io.hpp"
#include "nbspectra/nonbacktracking.hpp"
#include "oracles.hpp"

#include <cmath>
#include <sstream>

using namespace nbspectra;

namespace {

Eigen::MatrixXd four_cycle() { return Eigen::MatrixXd::Ones(2, 2); }

Eigen::VectorXd to_vec(std::initializer_list<double> values) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index k = 0;
    for (double x : values) v(k++) = x;
    return v;
}

} // namespace

TEST_CASE("edge index enumerates two directions per support entry") {
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(3, 3);
    X(0, 1) = 0.5;
    X(1, 0) = -0.25;
    X(2, 2) = 1.0;
    const DirectedEdgeSet es = build_edge_index(X);
    CHECK(es.edge_count() == 6);
    // Row-major over (i, j), forward before reverse.
    CHECK(es.tail[0] == 0);
    CHECK(es.head[0] == 3 + 1);
    CHECK(es.tail[1] == 3 + 1);
    CHECK(es.head[1] == 0);
    CHECK(es.weight[0] == 0.5);
    CHECK(es.reverse[0] == 1);
    CHECK(es.reverse[1] == 0);
    CHECK(es.tail[2] == 1);

    CHECK(build_edge_index(Eigen::MatrixXd::Zero(4, 2)).edge_count() == 0);
    CHECK(build_edge_index(four_cycle()).edge_count() == 8);
}

TEST_CASE("dense form equals the definition on random instances") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull}) {
        const Eigen::MatrixXd X = oracles::random_matrix(5, 4, seed, 0.7);
        const NBOperator B = build_nb_operator(X);
        const Eigen::MatrixXd expected = oracles::nb_dense_support(X);
        CHECK(B.dense() == expected);
    }
}

TEST_CASE("single entry admits no continuation") {
    Eigen::MatrixXd X(1, 1);
    X << 0.5;
    const NBOperator B = build_nb_operator(X);
    REQUIRE(B.dimension() == 2);
    CHECK(B.dense().norm() == 0.0);
}

TEST_CASE("a path is nilpotent") {
    Eigen::MatrixXd X(2, 1);
    X << 1.0, 1.0;
    const NBOperator B = build_nb_operator(X);
    REQUIRE(B.dimension() == 4);
    const Eigen::MatrixXd D = B.dense();
    CHECK((D.array() != 0.0).count() == 2);
    CHECK((D * D).norm() == 0.0);

    // Applying E times kills any vector on a tree.
    Eigen::VectorXd v = to_vec({1.0, -2.0, 0.5, 3.0});
    for (int k = 0; k < 4; ++k) v = B.apply(v);
    CHECK(v.norm() == 0.0);
}

TEST_CASE("the 4-cycle operator is a permutation with unit continuations") {
    const NBOperator B = build_nb_operator(four_cycle());
    REQUIRE(B.dimension() == 8);
    const Eigen::MatrixXd D = B.dense();
    CHECK((D.array() != 0.0).count() == 8);
    CHECK(D.rowwise().sum() == Eigen::VectorXd::Ones(8));
    CHECK(D.colwise().sum().transpose() == Eigen::VectorXd::Ones(8));

    // An indicator moves to the indicator of its unique continuation.
    for (Eigen::Index e = 0; e < 8; ++e) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(8);
        v(e) = 1.0;
        const Eigen::VectorXd w = B.apply(v);
        CHECK(w.sum() == 1.0);
        CHECK(w.maxCoeff() == 1.0);
    }
}

TEST_CASE("apply agrees with the dense multiply") {
    const Eigen::MatrixXd X = oracles::random_matrix(6, 5, 9, 0.6);
    const NBOperator B = build_nb_operator(X);
    const Eigen::MatrixXd D = B.dense();
    std::uint64_t state = 4242;
    Eigen::VectorXd v(B.dimension());
    for (Eigen::Index e = 0; e < v.size(); ++e) v(e) = 2.0 * oracles::test_uniform(state) - 1.0;
    const Eigen::VectorXd fast = B.apply(v);
    const Eigen::VectorXd slow = D * v;
    CHECK((fast - slow).cwiseAbs().maxCoeff() <= 1e-14);

    CHECK(B.apply(Eigen::VectorXd::Zero(B.dimension())).norm() == 0.0);
    CHECK_THROWS_AS(B.apply(Eigen::VectorXd::Zero(3)), std::invalid_argument);
}

TEST_CASE("factored apply paths produce identical bits; the row-sum reference agrees") {
    const Eigen::MatrixXd X = oracles::random_matrix(12, 7, 13, 0.5);
    const NBOperator B = build_nb_operator(X);
    const Eigen::Index ne = B.dimension();
    std::uint64_t state = 99;
    Eigen::VectorXd v(ne);
    for (Eigen::Index e = 0; e < ne; ++e) v(e) = 2.0 * oracles::test_uniform(state) - 1.0;
    Eigen::VectorXd a(ne), b(ne), c(ne);
    std::vector<double> scratch(static_cast<std::size_t>(B.vertex_count()));
    B.apply({v.data(), static_cast<std::size_t>(ne)}, {a.data(), static_cast<std::size_t>(ne)});
    B.apply_serial({v.data(), static_cast<std::size_t>(ne)},
                   {b.data(), static_cast<std::size_t>(ne)});
    B.apply_factored({v.data(), static_cast<std::size_t>(ne)},
                     {c.data(), static_cast<std::size_t>(ne)}, scratch);
    CHECK(a == c); // same arithmetic, thread layout must not matter
    // apply_serial sums the continuations directly instead of subtracting the
    // backtrack term, so it agrees to roundoff rather than bitwise.
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("spectral radius of canonical graphs") {
    Eigen::MatrixXd path(2, 1);
    path << 1.0, 1.0;
    CHECK(spectral_radius(build_nb_operator(path)).rho == doctest::Approx(0.0));

    const RadiusEstimate cycle = spectral_radius(build_nb_operator(four_cycle()));
    CHECK(cycle.method == RadiusMethod::DenseEig);
    CHECK(cycle.rho == doctest::Approx(1.0).epsilon(1e-12));

    const RadiusEstimate k33 = spectral_radius(build_nb_operator(Eigen::MatrixXd::Ones(3, 3)));
    CHECK(k33.rho == doctest::Approx(2.0).epsilon(1e-10));

    CHECK(spectral_radius(build_nb_operator(Eigen::MatrixXd::Zero(3, 3))).rho == 0.0);
}

TEST_CASE("norm growth tracks the dense radius") {
    const Eigen::MatrixXd X = 0.7 * oracles::random_matrix(9, 6, 31);
    const NBOperator B = build_nb_operator(X);
    const double exact = spectral_radius(B).rho;
    RadiusOptions opts;
    opts.dense_threshold = 4; // force the iterative path
    opts.tol = 1e-4;
    opts.max_power_steps = 20000;
    const RadiusEstimate est = spectral_radius(B, opts);
    CHECK(est.method == RadiusMethod::NormGrowth);
    CHECK(est.converged);
    CHECK(est.rho == doctest::Approx(exact).epsilon(0.02));
}

TEST_CASE("norm growth reports non-convergence instead of guessing") {
    const Eigen::MatrixXd X = oracles::random_matrix(8, 5, 17);
    RadiusOptions opts;
    opts.dense_threshold = 4;
    opts.max_power_steps = 6; // far too few
    opts.tol = 1e-12;
    const RadiusEstimate est = spectral_radius(build_nb_operator(X), opts);
    CHECK_FALSE(est.converged);
    CHECK(est.rho >= 0.0);
}

TEST_CASE("trace powers of canonical graphs") {
    Eigen::MatrixXd path(2, 1);
    path << 1.0, 1.0;
    const NBOperator tree = build_nb_operator(path);
    CHECK(trace_power(tree, 4) == 0.0);
    CHECK(trace_power(tree, 9) == 0.0);

    const NBOperator cycle = build_nb_operator(four_cycle());
    for (int l : {1, 2, 5, 11}) CHECK(trace_power(cycle, l) == doctest::Approx(8.0));

    const NBOperator empty = build_nb_operator(Eigen::MatrixXd::Zero(4, 4));
    CHECK(trace_power(empty, 3) == 0.0);
}

TEST_CASE("trace powers equal dense Frobenius norms") {
    const Eigen::MatrixXd X = oracles::random_matrix(6, 4, 23, 0.7);
    const NBOperator B = build_nb_operator(X);
    const Eigen::MatrixXd D = B.dense();
    Eigen::MatrixXd P = D;
    const std::vector<double> traces = trace_powers(B, 6);
    for (int l = 1; l <= 6; ++l) {
        const double expected = P.squaredNorm();
        CHECK(traces[static_cast<std::size_t>(l - 1)] ==
              doctest::Approx(expected).epsilon(1e-10));
        CHECK(traces[static_cast<std::size_t>(l - 1)] >= 0.0);
        P = D * P;
    }
}

TEST_CASE("trace budget is enforced") {
    const NBOperator B = build_nb_operator(oracles::random_matrix(10, 10, 3));
    TraceOptions opts;
    opts.max_flops = 10.0;
    CHECK_THROWS_AS(trace_power(B, 4, opts), BudgetExceededError);
    CHECK_THROWS_AS(trace_power(B, 0), std::invalid_argument);
}

TEST_CASE("support restriction preserves the nonzero spectrum") {
    // Zero is a defective eigenvalue of both operators, so the eigensolver
    // smears it by O(eps^(1/k)); at these sizes the smear stays below 1e-4
    // while genuine eigenvalues sit well above it.
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        const Eigen::Index n = 1 + static_cast<Eigen::Index>(seed % 4);
        const Eigen::Index m = 1 + static_cast<Eigen::Index>((seed / 4) % 3);
        if (n + m > 8) continue;
        const Eigen::MatrixXd X = oracles::random_matrix(n, m, 100 + seed, 0.6);
        const std::vector<double> full = oracles::eigen_moduli(oracles::nb_dense_full(X), 1e-4);
        const std::vector<double> restricted =
            oracles::eigen_moduli(build_nb_operator(X).dense(), 1e-4);
        CAPTURE(seed);
        REQUIRE(full.size() == restricted.size());
        for (std::size_t k = 0; k < full.size(); ++k)
            CHECK(full[k] == doctest::Approx(restricted[k]).epsilon(1e-8).scale(1.0));
    }
}

TEST_CASE("radius is dominated by normalized trace powers") {
    const Eigen::MatrixXd X = oracles::random_matrix(7, 5, 41, 0.8);
    const NBOperator B = build_nb_operator(X);
    const double rho = spectral_radius(B).rho;
    const std::vector<double> traces = trace_powers(B, 8);
    for (int l = 1; l <= 8; ++l) {
        const double bound = std::pow(traces[static_cast<std::size_t>(l - 1)], 1.0 / (2.0 * l));
        CHECK(rho <= bound + 1e-9);
    }
}

TEST_CASE("triplet CSV export lists every operator entry") {
    const NBOperator B = build_nb_operator(four_cycle());
    const std::string csv = nb_operator_to_csv(B);
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);
    CHECK(line == "e_from_i,e_from_j,e_to_k,e_to_l,weight");
    int rows = 0;
    while (std::getline(lines, line)) ++rows;
    CHECK(rows == 8); // one continuation per edge on the 4-cycle
    // Edge 0 is 0 -> 2; its unique continuation is 2 -> 1 with weight 1.
    CHECK(csv.find("0,2,2,1,1\n") != std::string::npos);

    CHECK(nb_operator_to_csv(build_nb_operator(Eigen::MatrixXd::Zero(2, 2))) ==
          "e_from_i,e_from_j,e_to_k,e_to_l,weight\n");
}

TEST_CASE("scaling covariance") {
    const Eigen::MatrixXd X = oracles::random_matrix(6, 4, 57, 0.7);
    const double c = 1.7;
    const NBOperator B = build_nb_operator(X);
    const NBOperator Bc = build_nb_operator(Eigen::MatrixXd(c * X));
    CHECK(spectral_radius(Bc).rho ==
          doctest::Approx(c * spectral_radius(B).rho).epsilon(1e-9));
    for (int l : {1, 3, 5}) {
        CHECK(trace_power(Bc, l) ==
              doctest::Approx(std::pow(c, 2.0 * l) * trace_power(B, l)).epsilon(1e-9));
    }
}
