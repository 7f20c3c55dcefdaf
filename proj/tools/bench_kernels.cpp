// Compares the OpenMP kernels against the serial reference
// implementations and reports timings plus max deviation.

#include <chrono>
#include <cstdio>
#include <random>

#include "srrm/kernels.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

int main(int argc, char** argv) {
    const int n = argc > 1 ? std::atoi(argv[1]) : 1500;
    const int d = 8, k = 4;

    std::mt19937_64 rng(7);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd points(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) points(i, j) = gauss(rng);
    Eigen::MatrixXd memberships(n, k);
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int c = 0; c < k; ++c) {
            memberships(i, c) = std::abs(gauss(rng)) + 0.1;
            s += memberships(i, c);
        }
        memberships.row(i) /= s;
    }

    auto t0 = Clock::now();
    const auto g_serial = srrm::kernels::serial::affinity_matrix(points, 1.3);
    const double affinity_serial_s = seconds_since(t0);
    t0 = Clock::now();
    const auto g_parallel = srrm::kernels::affinity_matrix(points, 1.3);
    const double affinity_parallel_s = seconds_since(t0);
    const double affinity_dev = (g_serial - g_parallel).cwiseAbs().maxCoeff();

    t0 = Clock::now();
    const auto terms_serial = srrm::kernels::serial::cs_terms(g_serial, memberships);
    const double terms_serial_s = seconds_since(t0);
    t0 = Clock::now();
    const auto terms_parallel = srrm::kernels::cs_terms(g_parallel, memberships);
    const double terms_parallel_s = seconds_since(t0);
    const double terms_dev =
        std::abs(terms_serial.numerator - terms_parallel.numerator) +
        (terms_serial.cluster_mass - terms_parallel.cluster_mass).cwiseAbs().maxCoeff();

    std::printf("n=%d d=%d k=%d\n", n, d, k);
    std::printf("affinity_matrix  serial %8.3f s  openmp %8.3f s  speedup %5.2fx  max_dev %g\n",
                affinity_serial_s, affinity_parallel_s,
                affinity_serial_s / affinity_parallel_s, affinity_dev);
    std::printf("cs_terms         serial %8.3f s  openmp %8.3f s  speedup %5.2fx  max_dev %g\n",
                terms_serial_s, terms_parallel_s, terms_serial_s / terms_parallel_s, terms_dev);
    return (affinity_dev == 0.0 && terms_dev == 0.0) ? 0 : 1;
}
