#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "srrm/clustering.hpp"
#include "srrm/grid.hpp"
#include "srrm/regression.hpp"

namespace srrm {

struct PipelineConfig {
    int scale_factor = 10;
    double training_fraction = 0.10;
    std::vector<int> candidate_k = {2, 3};
    std::vector<double> candidate_mu_c = {1e-3};
    std::vector<double> candidate_mu_r = {1e-2, 1.0};
    ClusterConfig clustering;
    double sigma_r = 0.0;  // <= 0: median heuristic per cluster fit
    int cv_folds = 5;
    int cadence = 3;
    std::uint64_t seed = 0;
};

struct DayInputs {
    const FineGrid* fine = nullptr;  // noisy LST/PPT/LAI + landcover
    const CoarseGrid* coarse = nullptr;  // aggregated TB observation
};

struct AssembledFeatures {
    FeatureMatrix clustering;        // LST, PPT, LAI, one-hot LC, x_scaled, y_scaled
    Eigen::MatrixXd regression;      // LST, PPT, LAI, one-hot LC, coarse TB (raw units)
};

struct SelectedParameters {
    int k = 0;
    double mu_c = 0.0;
    double mu_r = 0.0;
    double score = 0.0;  // held-out MAE at the selected triple
};

struct DownscaleResult {
    int day = 0;
    std::vector<double> tb_estimate;  // fine-grid shape
    SelectedParameters chosen;
    MembershipMatrix memberships;
    std::vector<bool> training_mask;
    std::vector<double> cost_trace;
};

struct SeasonResult {
    std::vector<DownscaleResult> days;
    std::vector<std::pair<int, std::string>> failures;  // (day, message)
};

AssembledFeatures assemble_features(const FineGrid& fine, const CoarseGrid& coarse);

// Seeded uniform sample without replacement of round(fraction * N) pixels.
std::vector<bool> choose_training_pixels(std::size_t n_pixels, double fraction,
                                         std::uint64_t seed);

SelectedParameters select_parameters(const AssembledFeatures& features,
                                     const std::vector<double>& fine_tb_truth,
                                     const std::vector<bool>& training_mask,
                                     const PipelineConfig& config);

DownscaleResult downscale_day(const FineGrid& fine_aux, const CoarseGrid& coarse_tb,
                              const std::vector<double>& fine_tb_truth, int day,
                              const PipelineConfig& config);

// Same stages with externally fixed parameters (no cross-validation).
DownscaleResult downscale_day_fixed(const FineGrid& fine_aux, const CoarseGrid& coarse_tb,
                                    const std::vector<double>& fine_tb_truth, int day,
                                    const PipelineConfig& config,
                                    const SelectedParameters& fixed);

// Membership-weighted fusion of per-cluster predictions for a pixel set.
std::vector<double> fuse_over_pixels(const AssembledFeatures& features,
                                     const MembershipMatrix& memberships,
                                     const Ensemble& ensemble, const std::vector<int>& pixels);

struct IterStudyRow {
    int iteration = 0;
    double rmse = 0.0;
};

// Re-evaluates the full downscaling at clustering-iterate checkpoints
// (iterate 0 and every checkpoint_every iterations up to the cap).
std::vector<IterStudyRow> iteration_study(const FineGrid& fine_aux, const CoarseGrid& coarse_tb,
                                          const std::vector<double>& fine_tb_truth, int day,
                                          const PipelineConfig& config,
                                          int checkpoint_every = 10);

// Maps downscale_day over the series at the configured cadence
// (days 1, 1+cadence, ...). Per-day failures are recorded and the run
// continues.
SeasonResult run_season(const std::vector<FineGrid>& fine_aux_days,
                        const std::vector<CoarseGrid>& coarse_tb_days,
                        const std::vector<std::vector<double>>& fine_tb_truth,
                        const PipelineConfig& config, int jobs = 1);

}  // namespace srrm
