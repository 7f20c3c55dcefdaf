#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "srrm/errors.hpp"

namespace srrm {

// Per-pixel feature vectors with a normalization record that permits an
// exact inverse transform (value = raw * scale + offset... stored as
// raw = (value - offset) / scale).
struct FeatureMatrix {
    struct Norm {
        double offset = 0.0;
        double scale = 1.0;
    };
    Eigen::MatrixXd values;  // N x D
    std::vector<std::string> names;
    std::vector<Norm> norms;

    Eigen::Index count() const { return values.rows(); }
    Eigen::Index dim() const { return values.cols(); }
};

struct MembershipMatrix {
    Eigen::MatrixXd m;  // N x K, rows on the probability simplex
    Eigen::Index count() const { return m.rows(); }
    Eigen::Index clusters() const { return m.cols(); }
};

struct ClusterConfig {
    int k = 2;
    double entropy_weight = 0.0;   // mu_c
    double kernel_width = 0.0;     // sigma; <= 0 selects the median heuristic
    int max_iterations = 200;
    double step_size = 0.5;        // eta_0; eta_t = eta_0 / (1 + t * step_decay)
    double step_decay = 0.01;
    int batch_size = 64;
    double tolerance = 1e-6;       // relative cost change for early stop
    int patience = 25;
    std::uint64_t seed = 0;
    double membership_floor = 1e-8;  // epsilon_m for log evaluation
    int checkpoint_every = 0;        // > 0: snapshot memberships every n iterations
    int restarts = 1;                // seeded starts; lowest final cost wins
};

struct ClusterResult {
    MembershipMatrix memberships;
    std::vector<double> cost_trace;  // full objective per iteration (index 0 = initial)
    double kernel_width = 0.0;       // sigma actually used
    std::vector<MembershipMatrix> checkpoints;       // iterate 0 first, when requested
    std::vector<int> checkpoint_iterations;
};

// exp(-|xi - xj|^2 / (4 sigma^2)); the affinity G_{sigma*sqrt(2)}.
double gaussian_affinity(const Eigen::VectorXd& xi, const Eigen::VectorXd& xj, double sigma);

// Median pairwise distance over a seeded subsample (at most 400 points).
double median_pairwise_distance(const Eigen::MatrixXd& points, std::uint64_t seed = 0);

// Euclidean projection of a vector onto the probability simplex.
Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v);

// Regularized Cauchy-Schwarz clustering cost:
//   U / sqrt(prod_k V_k) - mu_c * sum_ik m_ik log m_ik
// with U = 1/2 sum_ij (1 - m_i . m_j) G_ij and V_k = m_k^T G m_k.
// The entropy sum is nonpositive, so the regularizer term is >= 0 and
// penalizes soft memberships. 0 log 0 := 0.
double cs_cost(const MembershipMatrix& m, const FeatureMatrix& f, const ClusterConfig& config);
double cs_cost_from_affinity(const MembershipMatrix& m, const Eigen::MatrixXd& affinity,
                             double mu_c, double membership_floor = 1e-8);

// Analytic gradient of cs_cost with respect to each m_ik. log m is
// evaluated at max(m, membership_floor).
Eigen::MatrixXd cs_gradient(const MembershipMatrix& m, const FeatureMatrix& f,
                            const ClusterConfig& config);

// Projected stochastic gradient descent on the regularized CS cost.
// Returns soft memberships (never discretized) and the cost trace.
ClusterResult cluster(const FeatureMatrix& f, const ClusterConfig& config);
ClusterResult cluster(const FeatureMatrix& f, const ClusterConfig& config,
                      const Eigen::MatrixXd& affinity);

// Argmax per row; ties resolve to the lowest cluster index.
std::vector<int> hard_assign(const MembershipMatrix& m);

void write_memberships(const MembershipMatrix& m, const std::string& path);
MembershipMatrix read_memberships(const std::string& path);

}  // namespace srrm
