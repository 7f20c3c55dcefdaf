#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "srrm/errors.hpp"

namespace srrm {

// Land-cover classes, fixed encoding used in grid files and tie-breaks.
enum class LandCover : int { Baresoil = 0, Corn = 1, Cotton = 2 };

inline constexpr int kNumLandCovers = 3;

// Rectangular raster of named real-valued layers plus an optional
// per-pixel land-cover label. Row-major storage.
struct FineGrid {
    int rows = 0;
    int cols = 0;
    double cell_size = 1.0;
    std::vector<std::string> layer_names;
    std::vector<std::vector<double>> layer_data;  // parallel to layer_names
    std::vector<int> landcover;                   // empty if absent

    std::size_t size() const { return static_cast<std::size_t>(rows) * cols; }
    bool has_layer(const std::string& name) const;
    std::vector<double>& layer(const std::string& name);
    const std::vector<double>& layer(const std::string& name) const;
    void add_layer(const std::string& name, std::vector<double> data);
    bool has_landcover() const { return !landcover.empty(); }
};

struct CoarseGrid {
    FineGrid grid;
    int scale_factor = 1;
};

struct NoiseSpec {
    double sd_lst = 0.0;
    double sd_ppt = 0.0;
    double sd_lai = 0.0;
    std::uint64_t seed = 0;
};

// Block means of every real-valued layer; modal land cover per block with
// ties broken by the fixed label order baresoil < corn < cotton.
CoarseGrid aggregate(const FineGrid& fine, int scale_factor);

// Adds independent zero-mean Gaussian noise to LST, PPT and LAI.
// PPT and LAI are clamped at zero from below. Deterministic per seed.
FineGrid add_observation_noise(const FineGrid& grid, const NoiseSpec& spec);

FineGrid read_grid(const std::string& path);
void write_grid(const FineGrid& grid, const std::string& path);

}  // namespace srrm
