#include "srrm/kernels.hpp"

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace srrm::kernels {

namespace serial {

Eigen::MatrixXd affinity_matrix(const Eigen::MatrixXd& points, double sigma) {
    const Eigen::Index n = points.rows();
    const double inv = 1.0 / (4.0 * sigma * sigma);
    Eigen::MatrixXd g(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        g(i, i) = 1.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double d2 = (points.row(i) - points.row(j)).squaredNorm();
            const double v = std::exp(-d2 * inv);
            g(i, j) = v;
            g(j, i) = v;
        }
    }
    return g;
}

CsTerms cs_terms(const Eigen::MatrixXd& affinity, const Eigen::MatrixXd& memberships) {
    const Eigen::Index n = memberships.rows();
    const Eigen::Index k = memberships.cols();
    CsTerms out;
    out.cluster_mass = Eigen::VectorXd::Zero(k);
    double total = 0.0;
    double cross = 0.0;
    // Row-partial accumulation, same order as the parallel version.
    for (Eigen::Index i = 0; i < n; ++i) {
        double row_total = 0.0, row_cross = 0.0;
        Eigen::RowVectorXd gm = Eigen::RowVectorXd::Zero(k);
        for (Eigen::Index j = 0; j < n; ++j) {
            const double g = affinity(i, j);
            row_total += g;
            row_cross += g * memberships.row(i).dot(memberships.row(j));
            gm += g * memberships.row(j);
        }
        total += row_total;
        cross += row_cross;
        out.cluster_mass += memberships.row(i).cwiseProduct(gm).transpose();
    }
    out.numerator = 0.5 * (total - cross);
    return out;
}

}  // namespace serial

Eigen::MatrixXd affinity_matrix(const Eigen::MatrixXd& points, double sigma) {
    const Eigen::Index n = points.rows();
    const double inv = 1.0 / (4.0 * sigma * sigma);
    Eigen::MatrixXd g(n, n);
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) {
        g(i, i) = 1.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double d2 = (points.row(i) - points.row(j)).squaredNorm();
            g(i, j) = std::exp(-d2 * inv);
        }
    }
    // Mirror the upper triangle after the parallel fill.
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) g(j, i) = g(i, j);
    return g;
}

serial::CsTerms cs_terms(const Eigen::MatrixXd& affinity, const Eigen::MatrixXd& memberships) {
    const Eigen::Index n = memberships.rows();
    const Eigen::Index k = memberships.cols();

    // Row-wise partials, reduced serially in row order for determinism.
    Eigen::VectorXd row_total(n), row_cross(n);
    Eigen::MatrixXd row_mass(n, k);
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) {
        double total = 0.0, cross = 0.0;
        Eigen::RowVectorXd gm = Eigen::RowVectorXd::Zero(k);
        for (Eigen::Index j = 0; j < n; ++j) {
            const double g = affinity(i, j);
            total += g;
            cross += g * memberships.row(i).dot(memberships.row(j));
            gm += g * memberships.row(j);
        }
        row_total(i) = total;
        row_cross(i) = cross;
        row_mass.row(i) = memberships.row(i).cwiseProduct(gm);
    }
    serial::CsTerms out;
    out.cluster_mass = Eigen::VectorXd::Zero(k);
    double total = 0.0, cross = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        total += row_total(i);
        cross += row_cross(i);
        out.cluster_mass += row_mass.row(i).transpose();
    }
    out.numerator = 0.5 * (total - cross);
    return out;
}

serial::CsTerms cs_terms_from_product(const Eigen::MatrixXd& affinity_product,
                                      const Eigen::MatrixXd& memberships,
                                      double affinity_total) {
    const Eigen::Index k = memberships.cols();
    serial::CsTerms out;
    out.cluster_mass.resize(k);
    double cross = 0.0;
    for (Eigen::Index c = 0; c < k; ++c) {
        const double v = memberships.col(c).dot(affinity_product.col(c));
        out.cluster_mass(c) = v;
        cross += v;
    }
    out.numerator = 0.5 * (affinity_total - cross);
    return out;
}

}  // namespace srrm::kernels
