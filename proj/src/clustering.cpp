#include "srrm/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "srrm/kernels.hpp"
#include "srrm/seeding.hpp"

namespace srrm {

double gaussian_affinity(const Eigen::VectorXd& xi, const Eigen::VectorXd& xj, double sigma) {
    if (xi.size() != xj.size())
        throw DataError("gaussian_affinity: dimension mismatch");
    if (sigma <= 0.0)
        throw DataError("gaussian_affinity: sigma must be positive");
    return std::exp(-(xi - xj).squaredNorm() / (4.0 * sigma * sigma));
}

double median_pairwise_distance(const Eigen::MatrixXd& points, std::uint64_t seed) {
    const Eigen::Index n = points.rows();
    if (n < 2) return 1.0;
    std::vector<Eigen::Index> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    constexpr Eigen::Index kMaxSample = 400;
    if (n > kMaxSample) {
        std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
        std::shuffle(idx.begin(), idx.end(), rng);
        idx.resize(kMaxSample);
    }
    std::vector<double> dists;
    dists.reserve(idx.size() * (idx.size() - 1) / 2);
    for (std::size_t a = 0; a < idx.size(); ++a)
        for (std::size_t b = a + 1; b < idx.size(); ++b)
            dists.push_back((points.row(idx[a]) - points.row(idx[b])).norm());
    auto mid = dists.begin() + dists.size() / 2;
    std::nth_element(dists.begin(), mid, dists.end());
    double med = *mid;
    if (med <= 0.0) med = 1.0;  // all-identical subsample
    return med;
}

Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v) {
    const Eigen::Index k = v.size();
    std::vector<double> u(v.data(), v.data() + k);
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cumsum = 0.0;
    double theta = 0.0;
    int rho = 0;
    for (Eigen::Index j = 0; j < k; ++j) {
        cumsum += u[j];
        const double t = (cumsum - 1.0) / static_cast<double>(j + 1);
        if (u[j] - t > 0.0) {
            rho = static_cast<int>(j + 1);
            theta = t;
        }
    }
    (void)rho;
    Eigen::VectorXd out(k);
    for (Eigen::Index j = 0; j < k; ++j) out(j) = std::max(v(j) - theta, 0.0);
    // Exact renormalization of the positive support.
    const double s = out.sum();
    if (s > 0.0) out /= s;
    return out;
}

namespace {

double entropy_sum(const Eigen::MatrixXd& m, double floor_val) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index k = 0; k < m.cols(); ++k) {
            const double v = m(i, k);
            if (v > 0.0) s += v * std::log(std::max(v, floor_val));
        }
    return s;
}

struct Objective {
    double ratio;        // U / sqrt(prod_k V_k)
    double cost;         // ratio - mu_c * sum m log m
    double numerator;    // U
    double denom_sqrt;   // sqrt(prod_k V_k)
    Eigen::VectorXd cluster_mass;
};

Objective objective_from_terms(const kernels::serial::CsTerms& terms, const Eigen::MatrixXd& m,
                               double mu_c, double floor_val, double degeneracy_scale) {
    Objective o;
    o.numerator = terms.numerator;
    o.cluster_mass = terms.cluster_mass;
    double log_prod = 0.0;
    for (Eigen::Index k = 0; k < terms.cluster_mass.size(); ++k) {
        const double v = terms.cluster_mass(k);
        if (!(v > 1e-12 * degeneracy_scale))
            throw DegenerateClusterError(
                "cluster " + std::to_string(k) +
                " has vanishing soft mass (K or mu_c infeasible for this instance)");
        log_prod += std::log(v);
    }
    o.denom_sqrt = std::exp(0.5 * log_prod);
    o.ratio = o.numerator / o.denom_sqrt;
    o.cost = o.ratio - mu_c * entropy_sum(m, floor_val);
    return o;
}

}  // namespace

double cs_cost_from_affinity(const MembershipMatrix& m, const Eigen::MatrixXd& affinity,
                             double mu_c, double membership_floor) {
    if (m.count() < 2) throw DataError("cs_cost: need at least two points");
    auto terms = kernels::cs_terms(affinity, m.m);
    return objective_from_terms(terms, m.m, mu_c, membership_floor, affinity.sum()).cost;
}

double cs_cost(const MembershipMatrix& m, const FeatureMatrix& f, const ClusterConfig& config) {
    const double sigma = config.kernel_width > 0.0
                             ? config.kernel_width
                             : median_pairwise_distance(f.values, config.seed);
    const auto g = kernels::affinity_matrix(f.values, sigma);
    return cs_cost_from_affinity(m, g, config.entropy_weight, config.membership_floor);
}

namespace {

// Unconstrained partials of the full objective. GM = G * M.
Eigen::MatrixXd gradient_from_product(const Eigen::MatrixXd& m, const Eigen::MatrixXd& gm,
                                      const Objective& o, double mu_c, double floor_val) {
    const Eigen::Index n = m.rows();
    const Eigen::Index k = m.cols();
    Eigen::MatrixXd grad(n, k);
    for (Eigen::Index c = 0; c < k; ++c) {
        const double coef = 1.0 / o.denom_sqrt + o.ratio / o.cluster_mass(c);
        grad.col(c) = -coef * gm.col(c);
    }
    if (mu_c != 0.0) {
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index c = 0; c < k; ++c)
                grad(i, c) -= mu_c * (std::log(std::max(m(i, c), floor_val)) + 1.0);
    }
    return grad;
}

}  // namespace

Eigen::MatrixXd cs_gradient(const MembershipMatrix& m, const FeatureMatrix& f,
                            const ClusterConfig& config) {
    if (m.count() < 2) throw DataError("cs_gradient: need at least two points");
    const double sigma = config.kernel_width > 0.0
                             ? config.kernel_width
                             : median_pairwise_distance(f.values, config.seed);
    const auto g = kernels::affinity_matrix(f.values, sigma);
    const auto terms = kernels::cs_terms(g, m.m);
    const auto o = objective_from_terms(terms, m.m, config.entropy_weight,
                                        config.membership_floor, g.sum());
    const Eigen::MatrixXd gm = g * m.m;
    return gradient_from_product(m.m, gm, o, config.entropy_weight, config.membership_floor);
}

ClusterResult cluster(const FeatureMatrix& f, const ClusterConfig& config) {
    const double sigma = config.kernel_width > 0.0
                             ? config.kernel_width
                             : median_pairwise_distance(f.values, config.seed);
    const auto g = kernels::affinity_matrix(f.values, sigma);
    ClusterConfig cfg = config;
    cfg.kernel_width = sigma;
    return cluster(f, cfg, g);
}

namespace {

// One projected-SGD run from a seeded random start.
ClusterResult cluster_once(const FeatureMatrix& f, const ClusterConfig& config,
                           const Eigen::MatrixXd& affinity) {
    const Eigen::Index n = f.count();
    const int k = config.k;
    if (k < 1) throw DataError("cluster: k must be >= 1");
    if (n < k) throw DataError("cluster: need at least k points");

    ClusterResult result;
    result.kernel_width = config.kernel_width > 0.0
                              ? config.kernel_width
                              : median_pairwise_distance(f.values, config.seed);

    std::mt19937_64 rng(config.seed);

    // Near-uniform start: symmetric Dirichlet(5) per row.
    Eigen::MatrixXd m(n, k);
    std::gamma_distribution<double> gamma_draw(5.0, 1.0);
    for (Eigen::Index i = 0; i < n; ++i) {
        double s = 0.0;
        for (int c = 0; c < k; ++c) {
            m(i, c) = gamma_draw(rng);
            s += m(i, c);
        }
        m.row(i) /= s;
    }

    const double affinity_total = affinity.sum();
    Eigen::MatrixXd gm = affinity * m;

    auto evaluate = [&](int iteration) -> Objective {
        auto terms = kernels::cs_terms_from_product(gm, m, affinity_total);
        auto o = objective_from_terms(terms, m, config.entropy_weight, config.membership_floor,
                                      affinity_total);
        if (!std::isfinite(o.cost))
            throw NumericalError("cluster: non-finite cost at iteration " +
                                 std::to_string(iteration));
        return o;
    };

    auto maybe_checkpoint = [&](int iteration) {
        if (config.checkpoint_every > 0 && iteration % config.checkpoint_every == 0) {
            result.checkpoints.push_back(MembershipMatrix{m});
            result.checkpoint_iterations.push_back(iteration);
        }
    };

    Objective current = evaluate(0);
    result.cost_trace.push_back(current.cost);
    maybe_checkpoint(0);

    const int batch = std::max(1, std::min<int>(config.batch_size, static_cast<int>(n)));
    std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);

    double best_cost = current.cost;
    int stalled = 0;

    for (int t = 0; t < config.max_iterations; ++t) {
        const double eta = config.step_size / (1.0 + t * config.step_decay);

        // Gradient coefficients frozen over the batch.
        Eigen::VectorXd coef(k);
        for (int c = 0; c < k; ++c)
            coef(c) = 1.0 / current.denom_sqrt + current.ratio / current.cluster_mass(c);

        for (int b = 0; b < batch; ++b) {
            const Eigen::Index i = batch == static_cast<int>(n) ? b : pick(rng);
            Eigen::VectorXd grad(k);
            for (int c = 0; c < k; ++c) {
                grad(c) = -coef(c) * gm(i, c);
                if (config.entropy_weight != 0.0)
                    grad(c) -= config.entropy_weight *
                               (std::log(std::max(m(i, c), config.membership_floor)) + 1.0);
            }
            // The CS-ratio part of the gradient shrinks like 1/N^2 as the
            // instance grows; normalizing per row keeps the effective step
            // size-independent so convergence does not stall on large grids.
            const double gscale = grad.cwiseAbs().maxCoeff();
            if (gscale > 0.0) grad /= gscale;
            const Eigen::VectorXd updated =
                project_to_simplex(m.row(i).transpose() - eta * grad);
            const Eigen::VectorXd delta = updated - m.row(i).transpose();
            m.row(i) = updated.transpose();
            gm.noalias() += affinity.col(i) * delta.transpose();
        }

        // Periodic refresh caps incremental-update drift.
        if ((t + 1) % 50 == 0) gm.noalias() = affinity * m;

        current = evaluate(t + 1);
        result.cost_trace.push_back(current.cost);
        maybe_checkpoint(t + 1);

        if (config.checkpoint_every <= 0) {
            const double rel = std::abs(current.cost - best_cost) /
                               (1.0 + std::abs(best_cost));
            if (current.cost < best_cost) best_cost = current.cost;
            if (rel < config.tolerance) {
                if (++stalled >= config.patience) break;
            } else {
                stalled = 0;
            }
        }
    }

    result.memberships = MembershipMatrix{std::move(m)};
    return result;
}

}  // namespace

ClusterResult cluster(const FeatureMatrix& f, const ClusterConfig& config,
                      const Eigen::MatrixXd& affinity) {
    const int restarts = std::max(1, config.restarts);
    ClusterResult best = cluster_once(f, config, affinity);
    // The objective is non-convex; extra seeded starts guard against bad
    // local minima, keeping whichever run ends at the lowest cost.
    for (int r = 1; r < restarts; ++r) {
        ClusterConfig alt = config;
        alt.seed = mix_seed(config.seed, 0x7e57a7ull + static_cast<std::uint64_t>(r));
        ClusterResult candidate = cluster_once(f, alt, affinity);
        if (candidate.cost_trace.back() < best.cost_trace.back())
            best = std::move(candidate);
    }
    return best;
}

std::vector<int> hard_assign(const MembershipMatrix& m) {
    std::vector<int> labels(m.count());
    for (Eigen::Index i = 0; i < m.count(); ++i) {
        int best = 0;
        for (Eigen::Index c = 1; c < m.clusters(); ++c)
            if (m.m(i, c) > m.m(i, best)) best = static_cast<int>(c);
        labels[i] = best;
    }
    return labels;
}

void write_memberships(const MembershipMatrix& m, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw DataError("cannot open for writing: " + path);
    f << std::setprecision(std::numeric_limits<double>::max_digits10);
    f << m.count() << ' ' << m.clusters() << '\n';
    for (Eigen::Index i = 0; i < m.count(); ++i) {
        for (Eigen::Index c = 0; c < m.clusters(); ++c)
            f << (c ? " " : "") << m.m(i, c);
        f << '\n';
    }
}

MembershipMatrix read_memberships(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open: " + path);
    Eigen::Index n = 0, k = 0;
    if (!(f >> n >> k) || n <= 0 || k <= 0)
        throw ParseError(path + ": malformed membership header");
    MembershipMatrix m;
    m.m.resize(n, k);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index c = 0; c < k; ++c)
            if (!(f >> m.m(i, c)))
                throw ParseError(path + ": truncated membership matrix");
    return m;
}

}  // namespace srrm
