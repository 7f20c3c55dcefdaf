#pragma once

#include <optional>
#include <string>
#include <vector>

#include "srrm/grid.hpp"

namespace srrm {

struct ErrorStats {
    double rmse = 0.0;
    double sd = 0.0;    // population standard deviation of errors
    double bias = 0.0;  // mean error
    std::size_t count = 0;
};

// Errors are estimated - true over masked pixels. Empty mask -> DataError.
ErrorStats rmse_sd(const std::vector<double>& truth, const std::vector<double>& estimated,
                   const std::vector<bool>& mask);
ErrorStats rmse_sd(const std::vector<double>& truth, const std::vector<double>& estimated);

// Histogram KL divergence (nats) on a shared bin grid spanning the union
// range, with additive smoothing before normalization. Degenerate range
// (all values identical in both samples) returns 0.
double kld(const std::vector<double>& truth, const std::vector<double>& estimated,
           int bins = 50);

struct ThresholdTestResult {
    double pass_fraction = 0.0;
    double z_statistic = 0.0;
    bool reject_null = false;  // H0: p <= 0.95 rejected in favor of p > 0.95
};

// One-sided proportion Z-test of the fraction of pixels with
// |error| < threshold against the 0.95 reference proportion.
ThresholdTestResult threshold_test(const std::vector<double>& abs_errors,
                                   double threshold_kelvin, double confidence = 0.95);

struct ClassRow {
    std::string label;
    bool empty = false;
    ErrorStats stats;
    double kld_nats = 0.0;
};

// Per-land-cover stratification of errors and densities.
std::vector<ClassRow> stratify(const std::vector<double>& truth,
                               const std::vector<double>& estimated,
                               const std::vector<int>& landcover, int bins = 50);

// Baresoil sub-strata when pre-aggregation sub-pixel labels are known:
// A - baresoil pixels with vegetated sub-pixels (before harvest_day),
// B - baresoil pixels on/after harvest_day,
// C - pure baresoil pixels before harvest_day.
struct SubpixelContext {
    const std::vector<int>& fine_labels;  // labels on the sub-pixel grid
    int fine_cols = 0;
    int scale_factor = 1;  // evaluation pixel = scale_factor^2 sub-pixels
    int day = 0;
    int harvest_day = 0;
};
std::vector<ClassRow> stratify_baresoil(const std::vector<double>& truth,
                                        const std::vector<double>& estimated,
                                        const std::vector<int>& landcover, int eval_cols,
                                        const SubpixelContext& sub, int bins = 50);

// True where >= 2 land covers occur among the 8-neighborhood.
std::vector<bool> boundary_mask(const std::vector<int>& landcover, int rows, int cols);

struct DayReport {
    int day = 0;
    ErrorStats global;
    std::vector<ClassRow> per_class;
    ThresholdTestResult threshold;
};

struct EvalReport {
    std::vector<DayReport> days;
    ErrorStats season_global;
    std::vector<ClassRow> season_per_class;
    ThresholdTestResult season_threshold;
    // Scatter pairs (true, estimated) pooled over the season, per class.
    std::vector<std::vector<std::pair<double, double>>> scatter;
};

EvalReport evaluate_season(const std::vector<int>& days,
                           const std::vector<std::vector<double>>& truths,
                           const std::vector<std::vector<double>>& estimates,
                           const std::vector<const std::vector<int>*>& landcovers,
                           double threshold_kelvin, double confidence, int bins);

// season.csv, per-class scatter CSVs with 10 K guide-line columns, and
// per-day absolute-difference grids in the grid-file format.
void emit_report(const EvalReport& report, const std::vector<std::vector<double>>& truths,
                 const std::vector<std::vector<double>>& estimates, int rows, int cols,
                 double threshold_kelvin, const std::string& out_dir);

}  // namespace srrm
