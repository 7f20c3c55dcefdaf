#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "srrm/clustering.hpp"

using namespace srrm;

namespace {

FeatureMatrix features_from(const Eigen::MatrixXd& values) {
    FeatureMatrix f;
    f.values = values;
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
        f.names.push_back("f" + std::to_string(j));
        f.norms.push_back({0.0, 1.0});
    }
    return f;
}

MembershipMatrix random_memberships(int n, int k, std::uint64_t seed, double floor = 0.01) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(floor, 1.0);
    MembershipMatrix m;
    m.m.resize(n, k);
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int c = 0; c < k; ++c) {
            m.m(i, c) = unif(rng);
            s += m.m(i, c);
        }
        m.m.row(i) /= s;
    }
    return m;
}

FeatureMatrix two_clouds(int n_per, double separation, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd x(2 * n_per, 2);
    for (int i = 0; i < n_per; ++i) {
        x(i, 0) = gauss(rng);
        x(i, 1) = gauss(rng);
        x(n_per + i, 0) = separation + gauss(rng);
        x(n_per + i, 1) = gauss(rng);
    }
    return features_from(x);
}

}  // namespace

TEST_CASE("gaussian_affinity: closed-form values") {
    Eigen::VectorXd a(2), b(2);
    a << 1.0, 2.0;
    b = a;
    CHECK(gaussian_affinity(a, b, 0.7) == 1.0);
    // squared distance 4 sigma^2 -> exp(-1)
    const double sigma = 0.5;
    b << 1.0 + 2.0 * sigma, 2.0;
    CHECK(gaussian_affinity(a, b, sigma) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(gaussian_affinity(a, b, sigma) == gaussian_affinity(b, a, sigma));
    Eigen::VectorXd c(3);
    c.setZero();
    CHECK_THROWS_AS(gaussian_affinity(a, c, 1.0), DataError);
}

TEST_CASE("cs_cost: two identical points, hard split, mu_c = 0 -> 1.0") {
    Eigen::MatrixXd x(2, 2);
    x << 3.0, 4.0, 3.0, 4.0;
    auto f = features_from(x);
    MembershipMatrix m;
    m.m.resize(2, 2);
    m.m << 1, 0, 0, 1;
    ClusterConfig cc;
    cc.k = 2;
    cc.entropy_weight = 0.0;
    cc.kernel_width = 1.0;
    CHECK(cs_cost(m, f, cc) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("cs_cost: uniform memberships add mu_c * N * log K") {
    const int n = 8, k = 3;
    std::mt19937_64 rng(4);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd x(n, 2);
    for (int i = 0; i < n; ++i) {
        x(i, 0) = gauss(rng);
        x(i, 1) = gauss(rng);
    }
    auto f = features_from(x);
    MembershipMatrix m;
    m.m = Eigen::MatrixXd::Constant(n, k, 1.0 / k);
    ClusterConfig cc;
    cc.k = k;
    cc.kernel_width = 1.0;
    cc.entropy_weight = 0.0;
    const double base = cs_cost(m, f, cc);
    cc.entropy_weight = 0.05;
    // The regularizer is -mu_c * sum m log m >= 0: soft rows raise the cost.
    CHECK(cs_cost(m, f, cc) - base ==
          doctest::Approx(0.05 * n * std::log(static_cast<double>(k))).epsilon(1e-12));
}

TEST_CASE("cs_cost: hard rows contribute nothing to the entropy term") {
    Eigen::MatrixXd x(3, 1);
    x << 0.0, 1.0, 2.0;
    auto f = features_from(x);
    MembershipMatrix m;
    m.m.resize(3, 2);
    m.m << 1, 0, 0, 1, 1, 0;
    ClusterConfig cc;
    cc.k = 2;
    cc.kernel_width = 1.0;
    cc.entropy_weight = 0.0;
    const double base = cs_cost(m, f, cc);
    cc.entropy_weight = 0.7;
    CHECK(cs_cost(m, f, cc) == doctest::Approx(base).epsilon(1e-13));
}

TEST_CASE("cs_cost: invariant under cluster-label permutation") {
    const int n = 12, k = 3;
    auto f = two_clouds(n / 2, 3.0, 5);
    auto m = random_memberships(n, k, 6);
    ClusterConfig cc;
    cc.k = k;
    cc.kernel_width = 1.0;
    cc.entropy_weight = 0.02;
    const double base = cs_cost(m, f, cc);
    MembershipMatrix perm;
    perm.m.resize(n, k);
    perm.m.col(0) = m.m.col(2);
    perm.m.col(1) = m.m.col(0);
    perm.m.col(2) = m.m.col(1);
    CHECK(cs_cost(perm, f, cc) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("cs_cost: zero cluster mass raises degenerate-cluster error") {
    Eigen::MatrixXd x(3, 1);
    x << 0.0, 1.0, 2.0;
    auto f = features_from(x);
    MembershipMatrix m;
    m.m.resize(3, 2);
    m.m << 1, 0, 1, 0, 1, 0;  // cluster 1 empty
    ClusterConfig cc;
    cc.k = 2;
    cc.kernel_width = 1.0;
    CHECK_THROWS_AS(cs_cost(m, f, cc), DegenerateClusterError);
}

TEST_CASE("cs_gradient: matches central finite differences on interior points") {
    ClusterConfig cc;
    cc.k = 3;
    cc.kernel_width = 1.2;
    cc.entropy_weight = 0.03;
    const double h = 1e-6;
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 10;
        std::mt19937_64 rng(300 + trial);
        std::normal_distribution<double> gauss(0.0, 1.0);
        Eigen::MatrixXd x(n, 3);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < 3; ++j) x(i, j) = gauss(rng);
        auto f = features_from(x);
        auto m = random_memberships(n, cc.k, 400 + trial, 0.05);
        auto grad = cs_gradient(m, f, cc);
        for (int i = 0; i < n; ++i)
            for (int c = 0; c < cc.k; ++c) {
                auto up = m, dn = m;
                up.m(i, c) += h;
                dn.m(i, c) -= h;
                const double fd = (cs_cost(up, f, cc) - cs_cost(dn, f, cc)) / (2 * h);
                CHECK(std::abs(grad(i, c) - fd) / (1.0 + std::abs(grad(i, c))) < 1e-5);
            }
    }
}

TEST_CASE("cs_gradient: entropy component is -mu_c (log m + 1)") {
    const int n = 6, k = 3;
    auto f = two_clouds(n / 2, 2.0, 8);
    auto m = random_memberships(n, k, 9, 0.05);
    ClusterConfig cc;
    cc.k = k;
    cc.kernel_width = 1.0;
    cc.entropy_weight = 0.0;
    auto g0 = cs_gradient(m, f, cc);
    cc.entropy_weight = 0.4;
    auto g1 = cs_gradient(m, f, cc);
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < k; ++c)
            CHECK(g1(i, c) - g0(i, c) ==
                  doctest::Approx(-0.4 * (std::log(m.m(i, c)) + 1.0)).epsilon(1e-10));
}

TEST_CASE("project_to_simplex: feasible input unchanged, idempotent, known value") {
    Eigen::VectorXd v(3);
    v << 0.2, 0.5, 0.3;
    auto p = project_to_simplex(v);
    CHECK((p - v).cwiseAbs().maxCoeff() < 1e-12);

    Eigen::VectorXd w(2);
    w << 1.2, -0.2;
    auto q = project_to_simplex(w);
    CHECK(q(0) == doctest::Approx(1.0));
    CHECK(q(1) == doctest::Approx(0.0));
    auto q2 = project_to_simplex(q);
    CHECK((q2 - q).cwiseAbs().maxCoeff() < 1e-15);

    std::mt19937_64 rng(10);
    std::normal_distribution<double> gauss(0.0, 2.0);
    for (int t = 0; t < 50; ++t) {
        Eigen::VectorXd r(4);
        for (int j = 0; j < 4; ++j) r(j) = gauss(rng);
        auto s = project_to_simplex(r);
        CHECK(s.minCoeff() >= 0.0);
        CHECK(std::abs(s.sum() - 1.0) < 1e-12);
    }
}

TEST_CASE("cluster: deterministic per seed and simplex-feasible") {
    auto f = two_clouds(10, 6.0, 33);
    ClusterConfig cc;
    cc.k = 2;
    cc.entropy_weight = 1e-3;
    cc.max_iterations = 60;
    cc.seed = 77;
    auto a = cluster(f, cc);
    auto b = cluster(f, cc);
    CHECK((a.memberships.m - b.memberships.m).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.cost_trace == b.cost_trace);
    for (Eigen::Index i = 0; i < a.memberships.count(); ++i) {
        CHECK(a.memberships.m.row(i).minCoeff() >= 0.0);
        CHECK(std::abs(a.memberships.m.row(i).sum() - 1.0) < 1e-12);
    }
}

TEST_CASE("cluster: separable clouds get confident, consistent memberships") {
    const int n_per = 10;
    auto f = two_clouds(n_per, 10.0, 55);
    ClusterConfig cc;
    cc.k = 2;
    cc.entropy_weight = 1e-3;
    cc.max_iterations = 150;
    cc.seed = 3;
    auto res = cluster(f, cc);
    auto labels = hard_assign(res.memberships);
    for (int i = 1; i < n_per; ++i) CHECK(labels[i] == labels[0]);
    for (int i = n_per + 1; i < 2 * n_per; ++i) CHECK(labels[i] == labels[n_per]);
    CHECK(labels[0] != labels[n_per]);
    for (Eigen::Index i = 0; i < res.memberships.count(); ++i)
        CHECK(res.memberships.m.row(i).maxCoeff() >= 0.9);
}

TEST_CASE("cluster: cost trace finite, final below initial on separable instance") {
    auto f = two_clouds(8, 8.0, 91);
    ClusterConfig cc;
    cc.k = 2;
    cc.entropy_weight = 1e-3;
    cc.max_iterations = 120;
    cc.seed = 12;
    auto res = cluster(f, cc);
    REQUIRE(res.cost_trace.size() >= 2);
    for (double c : res.cost_trace) CHECK(std::isfinite(c));
    CHECK(res.cost_trace.back() < res.cost_trace.front());
}

TEST_CASE("cluster: checkpoints include iterate 0 on the requested cadence") {
    auto f = two_clouds(8, 5.0, 14);
    ClusterConfig cc;
    cc.k = 2;
    cc.entropy_weight = 1e-3;
    cc.max_iterations = 40;
    cc.checkpoint_every = 10;
    cc.seed = 2;
    auto res = cluster(f, cc);
    REQUIRE(res.checkpoint_iterations.size() == res.checkpoints.size());
    REQUIRE(res.checkpoint_iterations.size() == 5);
    CHECK(res.checkpoint_iterations.front() == 0);
    CHECK(res.checkpoint_iterations.back() == 40);
}

TEST_CASE("hard_assign: argmax with lowest-index tie-break") {
    MembershipMatrix m;
    m.m.resize(3, 3);
    m.m << 0.2, 0.5, 0.3,
           0.5, 0.5, 0.0,
           0.1, 0.1, 0.8;
    auto labels = hard_assign(m);
    CHECK(labels == std::vector<int>({1, 0, 2}));
}

TEST_CASE("membership io: round trip") {
    auto m = random_memberships(7, 3, 123);
    const auto path = (std::filesystem::temp_directory_path() / "srrm_members.txt").string();
    write_memberships(m, path);
    auto back = read_memberships(path);
    CHECK(back.count() == m.count());
    CHECK((back.m - m.m).cwiseAbs().maxCoeff() == 0.0);
    std::filesystem::remove(path);
}

TEST_CASE("median_pairwise_distance: exact on tiny instance") {
    Eigen::MatrixXd x(3, 1);
    x << 0.0, 1.0, 3.0;  // pairwise distances 1, 3, 2 -> median 2
    CHECK(median_pairwise_distance(x) == doctest::Approx(2.0));
}
