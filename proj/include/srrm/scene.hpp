#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "srrm/grid.hpp"

namespace srrm {

struct CropCalendar {
    int plant_day = 0;
    int harvest_day = 0;
    double peak_lai = 0.0;
};

struct RainEvent {
    int day = 0;
    double mean_mm = 0.0;
    double correlation_length = 1.0;  // in pixels
};

struct SceneConfig {
    int rows = 60;
    int cols = 60;
    int n_fields = 12;
    int season_days = 90;
    std::map<LandCover, CropCalendar> crop_calendar;  // corn/cotton entries
    std::vector<RainEvent> rain_events;
    double base_lst = 295.0;  // K
    std::uint64_t seed = 0;
};

// Zeroth-order tau-omega radiative transfer parameters. rms_height and
// correlation_length are carried in the record but the rough-surface
// chain is replaced by an affine soil-moisture -> reflectivity map
// anchored at soil_reflectivity for the driest soil.
struct TauOmegaParams {
    double incidence_angle = 50.0;        // degrees
    double sky_temperature = 5.0;         // K
    double soil_reflectivity = 0.05;      // reflectivity at SM = 0.05
    double vegetation_b_factor = 0.12;    // tau = b * VWC
    double single_scattering_albedo = 0.05;
    double rms_height = 0.62;             // cm, recorded only
    double correlation_length = 8.72;     // cm, recorded only
};

// Emissivity ramp: e = 0.95 at SM = 0.05 down to 0.60 at SM = 0.45.
inline constexpr double kReflectivitySlope = 0.875;
inline constexpr double kSmDry = 0.05;
inline constexpr double kSmWet = 0.45;

// Brightness temperature of one pixel. Monotonically decreasing in sm.
double tau_omega_forward(double sm, double lst, double lai, const TauOmegaParams& params);

// Applies tau_omega_forward per pixel; adds or overwrites the TB layer.
FineGrid forward_model_grid(const FineGrid& grid, const TauOmegaParams& params);

// Seasonal series of fine grids with LST/LAI/PPT/SM layers and a parcel
// land-cover mosaic. Deterministic per seed. PPT is the 3-day
// accumulation ending on the given day.
std::vector<FineGrid> generate_scene(const SceneConfig& config);

}  // namespace srrm
