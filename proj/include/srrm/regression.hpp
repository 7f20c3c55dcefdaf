#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "srrm/errors.hpp"

namespace srrm {

struct TrainingSet {
    Eigen::MatrixXd features;  // M x D, raw (not augmented)
    Eigen::VectorXd targets;   // M, kelvin
    std::vector<int> pixel_indices;
};

// One trained Gaussian kernel ridge regressor in dual form.
struct KernelModel {
    Eigen::MatrixXd train_x;        // M x (D+1), standardized then augmented
    Eigen::VectorXd dual_coefficients;
    double kernel_width = 1.0;      // sigma_r on the standardized representation
    double ridge_weight = 0.0;      // mu_r
    Eigen::VectorXd feature_mean;   // D
    Eigen::VectorXd feature_scale;  // D, 1.0 for constant features
    double target_mean = 0.0;
    double target_scale = 1.0;

    Eigen::Index dim() const { return feature_mean.size(); }
};

// Appends a constant column of 1.0. Not idempotent; callers apply it once.
Eigen::MatrixXd augment(const Eigen::MatrixXd& features);

// Solves (mu_r I + K) alpha = y on standardized augmented inputs.
// sigma_r <= 0 selects the median pairwise training distance.
KernelModel fit(const TrainingSet& train, double sigma_r, double mu_r);

double predict(const KernelModel& model, const Eigen::VectorXd& x);
Eigen::VectorXd predict_many(const KernelModel& model, const Eigen::MatrixXd& x);

// One model per cluster, fitted on that cluster's training subset.
// Clusters that capture no training pixels are left vacant.
struct Ensemble {
    std::vector<std::optional<KernelModel>> models;
    bool vacant(int k) const { return !models[k].has_value(); }
    int size() const { return static_cast<int>(models.size()); }
};

Ensemble fit_ensemble(const TrainingSet& train, const std::vector<int>& labels, int k,
                      double sigma_r, double mu_r);

// Membership-weighted convex combination over non-vacant clusters, with
// memberships renormalized over the non-vacant support.
double fuse(const Eigen::VectorXd& memberships, const Eigen::VectorXd& predictions,
            const std::vector<bool>& vacancy);

void write_ensemble(const Ensemble& ensemble, const std::string& path);
Ensemble read_ensemble(const std::string& path);

}  // namespace srrm
