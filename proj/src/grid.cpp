#include "srrm/grid.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

namespace srrm {

bool FineGrid::has_layer(const std::string& name) const {
    return std::find(layer_names.begin(), layer_names.end(), name) != layer_names.end();
}

std::vector<double>& FineGrid::layer(const std::string& name) {
    for (std::size_t i = 0; i < layer_names.size(); ++i)
        if (layer_names[i] == name) return layer_data[i];
    throw DataError("missing layer: " + name);
}

const std::vector<double>& FineGrid::layer(const std::string& name) const {
    return const_cast<FineGrid*>(this)->layer(name);
}

void FineGrid::add_layer(const std::string& name, std::vector<double> data) {
    if (data.size() != size())
        throw ShapeError("layer " + name + " has wrong size");
    for (std::size_t i = 0; i < layer_names.size(); ++i) {
        if (layer_names[i] == name) {
            layer_data[i] = std::move(data);
            return;
        }
    }
    layer_names.push_back(name);
    layer_data.push_back(std::move(data));
}

CoarseGrid aggregate(const FineGrid& fine, int scale_factor) {
    if (fine.rows <= 0 || fine.cols <= 0)
        throw DataError("aggregate: empty grid");
    if (scale_factor < 1)
        throw ShapeError("aggregate: scale_factor must be >= 1");
    if (fine.rows % scale_factor != 0 || fine.cols % scale_factor != 0)
        throw ShapeError("aggregate: grid dimensions not divisible by scale_factor");

    CoarseGrid out;
    out.scale_factor = scale_factor;
    out.grid.rows = fine.rows / scale_factor;
    out.grid.cols = fine.cols / scale_factor;
    out.grid.cell_size = fine.cell_size * scale_factor;

    const double inv_block = 1.0 / (static_cast<double>(scale_factor) * scale_factor);
    for (std::size_t l = 0; l < fine.layer_names.size(); ++l) {
        std::vector<double> coarse(out.grid.size(), 0.0);
        for (int cr = 0; cr < out.grid.rows; ++cr) {
            for (int cc = 0; cc < out.grid.cols; ++cc) {
                double sum = 0.0;
                for (int dr = 0; dr < scale_factor; ++dr) {
                    const int fr = cr * scale_factor + dr;
                    for (int dc = 0; dc < scale_factor; ++dc) {
                        const int fc = cc * scale_factor + dc;
                        sum += fine.layer_data[l][static_cast<std::size_t>(fr) * fine.cols + fc];
                    }
                }
                coarse[static_cast<std::size_t>(cr) * out.grid.cols + cc] = sum * inv_block;
            }
        }
        out.grid.add_layer(fine.layer_names[l], std::move(coarse));
    }

    if (fine.has_landcover()) {
        std::vector<int> labels(out.grid.size(), 0);
        for (int cr = 0; cr < out.grid.rows; ++cr) {
            for (int cc = 0; cc < out.grid.cols; ++cc) {
                std::array<int, kNumLandCovers> counts{};
                for (int dr = 0; dr < scale_factor; ++dr) {
                    const int fr = cr * scale_factor + dr;
                    for (int dc = 0; dc < scale_factor; ++dc) {
                        const int fc = cc * scale_factor + dc;
                        counts[fine.landcover[static_cast<std::size_t>(fr) * fine.cols + fc]]++;
                    }
                }
                // Modal label; ties resolve to the lowest label value.
                int best = 0;
                for (int k = 1; k < kNumLandCovers; ++k)
                    if (counts[k] > counts[best]) best = k;
                labels[static_cast<std::size_t>(cr) * out.grid.cols + cc] = best;
            }
        }
        out.grid.landcover = std::move(labels);
    }
    return out;
}

FineGrid add_observation_noise(const FineGrid& grid, const NoiseSpec& spec) {
    for (const char* name : {"LST", "PPT", "LAI"})
        if (!grid.has_layer(name))
            throw DataError(std::string("add_observation_noise: missing layer ") + name);
    if (spec.sd_lst < 0 || spec.sd_ppt < 0 || spec.sd_lai < 0)
        throw DataError("add_observation_noise: negative standard deviation");

    FineGrid out = grid;
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    // Fixed layer order so that the draw sequence is reproducible.
    struct Item { const char* name; double sd; bool clamp; };
    const Item items[] = {{"LST", spec.sd_lst, false},
                          {"PPT", spec.sd_ppt, true},
                          {"LAI", spec.sd_lai, true}};
    for (const auto& it : items) {
        auto& data = out.layer(it.name);
        for (auto& v : data) {
            v += it.sd * gauss(rng);
            if (it.clamp && v < 0.0) v = 0.0;
        }
    }
    return out;
}

namespace {

constexpr const char* kLandcoverName = "landcover";

}  // namespace

void write_grid(const FineGrid& grid, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw DataError("cannot open for writing: " + path);
    f << std::setprecision(std::numeric_limits<double>::max_digits10);

    const bool has_lc = grid.has_landcover();
    const std::size_t n_layers = grid.layer_names.size() + (has_lc ? 1 : 0);
    f << grid.rows << ' ' << grid.cols << ' ' << grid.cell_size << ' ' << n_layers << '\n';
    for (std::size_t i = 0; i < grid.layer_names.size(); ++i)
        f << grid.layer_names[i] << (i + 1 < n_layers ? ' ' : '\n');
    if (has_lc) f << kLandcoverName << '\n';

    for (std::size_t p = 0; p < grid.size(); ++p) {
        for (std::size_t l = 0; l < grid.layer_data.size(); ++l) {
            if (l) f << ' ';
            f << grid.layer_data[l][p];
        }
        if (has_lc) {
            if (!grid.layer_data.empty()) f << ' ';
            f << grid.landcover[p];
        }
        f << '\n';
    }
    if (!f) throw DataError("write failed: " + path);
}

FineGrid read_grid(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open: " + path);

    std::string line;
    if (!std::getline(f, line) || line.empty())
        throw ParseError(path + ": missing header");

    FineGrid grid;
    std::size_t n_layers = 0;
    {
        std::istringstream iss(line);
        if (!(iss >> grid.rows >> grid.cols >> grid.cell_size >> n_layers))
            throw ParseError(path + ":1: malformed header");
        if (grid.rows <= 0 || grid.cols <= 0)
            throw ParseError(path + ":1: non-positive grid dimensions");
    }
    if (!std::getline(f, line))
        throw ParseError(path + ":2: missing layer-name line");
    std::vector<std::string> names;
    {
        std::istringstream iss(line);
        std::string name;
        while (iss >> name) names.push_back(name);
    }
    if (names.size() != n_layers)
        throw ParseError(path + ":2: declared " + std::to_string(n_layers) +
                         " layers but found " + std::to_string(names.size()) + " names");
    bool has_lc = !names.empty() && names.back() == kLandcoverName;
    const std::size_t n_real = names.size() - (has_lc ? 1 : 0);

    for (std::size_t i = 0; i < n_real; ++i) {
        grid.layer_names.push_back(names[i]);
        grid.layer_data.emplace_back(grid.size());
    }
    if (has_lc) grid.landcover.resize(grid.size());

    for (std::size_t p = 0; p < grid.size(); ++p) {
        const std::size_t lineno = p + 3;
        if (!std::getline(f, line))
            throw ParseError(path + ":" + std::to_string(lineno) + ": unexpected end of file");
        std::istringstream iss(line);
        for (std::size_t l = 0; l < n_real; ++l) {
            if (!(iss >> grid.layer_data[l][p]))
                throw ParseError(path + ":" + std::to_string(lineno) + ": expected " +
                                 std::to_string(n_layers) + " values");
        }
        if (has_lc) {
            int lc;
            if (!(iss >> lc) || lc < 0 || lc >= kNumLandCovers)
                throw ParseError(path + ":" + std::to_string(lineno) + ": bad land-cover code");
            grid.landcover[p] = lc;
        }
        std::string extra;
        if (iss >> extra)
            throw ParseError(path + ":" + std::to_string(lineno) + ": trailing values beyond " +
                             std::to_string(n_layers) + " declared columns");
    }
    return grid;
}

}  // namespace srrm
