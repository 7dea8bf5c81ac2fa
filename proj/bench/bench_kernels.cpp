// Compares the OpenMP kernels against their serial reference implementations
// on a realistic sampled instance and reports throughput side by side.
//
//   nbspectra_bench [n m p trials]     (default 400 100 0.15 5)

#include "nbspectra/iharabass.hpp"
#include "nbspectra/nonbacktracking.hpp"
#include "nbspectra/profile.hpp"
#include "nbspectra/rng.hpp"

#include <omp.h>

#include <chrono>
#include <cstdlib>
#include <iomanip>
#include <iostream>

using namespace nbspectra;

namespace {

double time_of(int repeats, const std::function<void()>& body) {
    const auto start = std::chrono::steady_clock::now();
    for (int r = 0; r < repeats; ++r) body();
    const auto stop = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(stop - start).count() / repeats;
}

void report(const std::string& name, double serial_ms, double parallel_ms) {
    std::cout << std::left << std::setw(26) << name << std::right << std::fixed
              << std::setprecision(3) << std::setw(12) << serial_ms << " ms" << std::setw(12)
              << parallel_ms << " ms" << std::setw(10) << std::setprecision(2)
              << serial_ms / parallel_ms << "x\n";
}

} // namespace

int main(int argc, char** argv) {
    Eigen::Index n = 400, m = 100;
    double p = 0.15;
    int trials = 5;
    if (argc >= 4) {
        n = std::atol(argv[1]);
        m = std::atol(argv[2]);
        p = std::atof(argv[3]);
    }
    if (argc >= 5) trials = std::atoi(argv[4]);

    const VarianceProfile profile = make_bipartite_profile(n, m, p);
    const SampledMatrix sample = sample_centered_adjacency(profile, 1);
    const NBOperator B = build_nb_operator(sample.entries);
    const Eigen::Index ne = B.dimension();
    std::cout << "instance: " << n << " x " << m << " at p = " << p << ", E = " << ne
              << ", threads = " << omp_get_max_threads() << "\n\n";
    std::cout << std::left << std::setw(26) << "kernel" << std::right << std::setw(15)
              << "serial" << std::setw(15) << "openmp" << std::setw(11) << "speedup\n";

    {
        const double parallel = time_of(trials, [&] {
            volatile double sink = sample_centered_adjacency(profile, 2).entries.sum();
            (void)sink;
        });
        omp_set_num_threads(1);
        const double serial = time_of(trials, [&] {
            volatile double sink = sample_centered_adjacency(profile, 2).entries.sum();
            (void)sink;
        });
        omp_set_num_threads(omp_get_num_procs());
        report("sample_centered_adjacency", serial, parallel);
    }

    {
        Eigen::VectorXd v(ne), y(ne);
        for (Eigen::Index e = 0; e < ne; ++e)
            v(e) = rng::uniform(3, static_cast<std::uint64_t>(e), 0) - 0.5;
        std::vector<double> scratch(static_cast<std::size_t>(B.vertex_count()));
        const int reps = 50 * trials;
        const double serial = time_of(reps, [&] {
            B.apply_factored({v.data(), static_cast<std::size_t>(ne)},
                             {y.data(), static_cast<std::size_t>(ne)}, scratch);
        });
        const double parallel = time_of(reps, [&] {
            B.apply({v.data(), static_cast<std::size_t>(ne)},
                    {y.data(), static_cast<std::size_t>(ne)});
        });
        report("nb apply", serial, parallel);
    }

    {
        // Smaller operator so the quadratic sweep stays in budget.
        const VarianceProfile small_profile = make_bipartite_profile(100, 25, 0.2);
        const NBOperator Bs =
            build_nb_operator(sample_centered_adjacency(small_profile, 4).entries);
        const double serial = time_of(1, [&] { trace_powers_serial(Bs, 6); });
        const double parallel = time_of(1, [&] { trace_powers(Bs, 6); });
        report("trace sweep (E^2 l)", serial, parallel);
    }

    {
        std::vector<double> grid;
        for (int k = 0; k < 24; ++k) grid.push_back(0.8 + 0.1 * k);
        const double parallel = time_of(trials, [&] {
            volatile double sink = imaginary_axis_scan(sample.entries, grid).rows.back().smallest_eig;
            (void)sink;
        });
        omp_set_num_threads(1);
        const double serial = time_of(trials, [&] {
            volatile double sink = imaginary_axis_scan(sample.entries, grid).rows.back().smallest_eig;
            (void)sink;
        });
        omp_set_num_threads(omp_get_num_procs());
        report("imaginary axis scan", serial, parallel);
    }

    return 0;
}
