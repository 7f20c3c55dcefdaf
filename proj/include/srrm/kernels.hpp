#pragma once

#include <Eigen/Dense>

namespace srrm::kernels {

// Data-parallel inner loops used by clustering and the forward model.
// Each kernel has a serial reference implementation (namespace serial)
// and an OpenMP version. The parallel versions use per-row partial
// results with a fixed accumulation order, so they are bit-identical to
// the serial ones for any thread count.

namespace serial {

// G_ij = exp(-|x_i - x_j|^2 / (4 sigma^2)), the G_{sigma*sqrt(2)} affinity.
Eigen::MatrixXd affinity_matrix(const Eigen::MatrixXd& points, double sigma);

// Cauchy-Schwarz objective terms from a cached affinity matrix:
// numerator U = 1/2 * sum_ij (1 - m_i . m_j) G_ij and per-cluster
// masses V_k = m_k^T G m_k. Returns {U, V}.
struct CsTerms {
    double numerator;
    Eigen::VectorXd cluster_mass;
};
CsTerms cs_terms(const Eigen::MatrixXd& affinity, const Eigen::MatrixXd& memberships);

}  // namespace serial

Eigen::MatrixXd affinity_matrix(const Eigen::MatrixXd& points, double sigma);
serial::CsTerms cs_terms(const Eigen::MatrixXd& affinity, const Eigen::MatrixXd& memberships);

// Same terms from a maintained product GM = G * M; O(N*K).
serial::CsTerms cs_terms_from_product(const Eigen::MatrixXd& affinity_product,
                                      const Eigen::MatrixXd& memberships,
                                      double affinity_total);

}  // namespace srrm::kernels
