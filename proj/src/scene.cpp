#include "srrm/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace srrm {

namespace {

double soil_reflectivity_of(double sm, const TauOmegaParams& p) {
    return p.soil_reflectivity + kReflectivitySlope * (sm - kSmDry);
}

// Separable Gaussian blur with reflecting boundaries.
std::vector<double> gaussian_blur(const std::vector<double>& in, int rows, int cols,
                                  double sigma) {
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> weights(2 * radius + 1);
    double wsum = 0.0;
    for (int t = -radius; t <= radius; ++t) {
        weights[t + radius] = std::exp(-0.5 * t * t / (sigma * sigma));
        wsum += weights[t + radius];
    }
    for (auto& w : weights) w /= wsum;

    auto reflect = [](int i, int n) {
        while (i < 0 || i >= n) {
            if (i < 0) i = -i - 1;
            if (i >= n) i = 2 * n - i - 1;
        }
        return i;
    };

    std::vector<double> tmp(in.size()), out(in.size());
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            double v = 0.0;
            for (int t = -radius; t <= radius; ++t)
                v += weights[t + radius] * in[static_cast<std::size_t>(r) * cols + reflect(c + t, cols)];
            tmp[static_cast<std::size_t>(r) * cols + c] = v;
        }
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            double v = 0.0;
            for (int t = -radius; t <= radius; ++t)
                v += weights[t + radius] * tmp[static_cast<std::size_t>(reflect(r + t, rows)) * cols + c];
            out[static_cast<std::size_t>(r) * cols + c] = v;
        }
    return out;
}

struct Rect {
    int r0, c0, r1, c1;  // half-open
    int area() const { return (r1 - r0) * (c1 - c0); }
};

// Recursive binary splits of the domain into n contiguous rectangles.
std::vector<Rect> split_parcels(int rows, int cols, int n, std::mt19937_64& rng) {
    std::vector<Rect> rects{{0, 0, rows, cols}};
    while (static_cast<int>(rects.size()) < n) {
        auto it = std::max_element(rects.begin(), rects.end(),
                                   [](const Rect& a, const Rect& b) { return a.area() < b.area(); });
        Rect r = *it;
        const int h = r.r1 - r.r0, w = r.c1 - r.c0;
        if (h < 2 && w < 2) break;
        std::uniform_real_distribution<double> frac(0.35, 0.65);
        if (h >= w) {
            const int cut = r.r0 + std::max(1, static_cast<int>(h * frac(rng)));
            *it = {r.r0, r.c0, cut, r.c1};
            rects.push_back({cut, r.c0, r.r1, r.c1});
        } else {
            const int cut = r.c0 + std::max(1, static_cast<int>(w * frac(rng)));
            *it = {r.r0, r.c0, r.r1, cut};
            rects.push_back({r.r0, cut, r.r1, r.c1});
        }
    }
    return rects;
}

// Zero-mean, unit-variance rescaling of a field (no-op if constant).
void standardize_field(std::vector<double>& field) {
    double mean = 0.0;
    for (double v : field) mean += v;
    mean /= static_cast<double>(field.size());
    double var = 0.0;
    for (double v : field) var += (v - mean) * (v - mean);
    var /= static_cast<double>(field.size());
    const double sd = std::sqrt(var);
    for (auto& v : field) v = sd > 0.0 ? (v - mean) / sd : 0.0;
}

double lai_curve(const CropCalendar& cal, int day) {
    if (day <= cal.plant_day || day >= cal.harvest_day) return 0.0;
    const double span = cal.harvest_day - cal.plant_day;
    const double peak_day = cal.plant_day + 0.6 * span;
    if (day <= peak_day)
        return cal.peak_lai * (day - cal.plant_day) / (peak_day - cal.plant_day);
    return cal.peak_lai * (cal.harvest_day - day) / (cal.harvest_day - peak_day);
}

void validate(const SceneConfig& cfg) {
    if (cfg.rows <= 0 || cfg.cols <= 0)
        throw DataError("scene: rows and cols must be positive");
    if (cfg.season_days <= 0)
        throw DataError("scene: season_days must be positive");
    for (const auto& [crop, cal] : cfg.crop_calendar) {
        if (!(cal.plant_day < cal.harvest_day && cal.harvest_day <= cfg.season_days))
            throw DataError("scene: crop calendar requires plant_day < harvest_day <= season_days");
        if (!(cal.peak_lai > 0.0 && cal.peak_lai <= 8.0))
            throw DataError("scene: peak_lai must be in (0, 8]");
    }
    for (const auto& ev : cfg.rain_events)
        if (ev.day < 1 || ev.day > cfg.season_days || ev.mean_mm < 0.0)
            throw DataError("scene: invalid rain event");
}

}  // namespace

double tau_omega_forward(double sm, double lst, double lai, const TauOmegaParams& params) {
    const double r = soil_reflectivity_of(sm, params);
    const double e = 1.0 - r;
    const double vwc = 0.5 * lai;  // kg/m^2
    const double tau = params.vegetation_b_factor * vwc;
    const double cos_theta = std::cos(params.incidence_angle * std::numbers::pi / 180.0);
    const double gamma = std::exp(-tau / cos_theta);
    const double omega = params.single_scattering_albedo;
    return gamma * e * lst
         + (1.0 - omega) * (1.0 - gamma) * (1.0 + r * gamma) * lst
         + gamma * gamma * r * params.sky_temperature;
}

FineGrid forward_model_grid(const FineGrid& grid, const TauOmegaParams& params) {
    for (const char* name : {"SM", "LST", "LAI"})
        if (!grid.has_layer(name))
            throw DataError(std::string("forward_model_grid: missing layer ") + name);
    FineGrid out = grid;
    const auto& sm = grid.layer("SM");
    const auto& lst = grid.layer("LST");
    const auto& lai = grid.layer("LAI");
    std::vector<double> tb(grid.size());
#pragma omp parallel for schedule(static)
    for (long long p = 0; p < static_cast<long long>(grid.size()); ++p)
        tb[p] = tau_omega_forward(sm[p], lst[p], lai[p], params);
    out.add_layer("TB", std::move(tb));
    return out;
}

std::vector<FineGrid> generate_scene(const SceneConfig& config) {
    validate(config);
    const std::size_t npix = static_cast<std::size_t>(config.rows) * config.cols;
    std::mt19937_64 rng(config.seed);

    // Parcel mosaic.
    auto rects = split_parcels(config.rows, config.cols, config.n_fields, rng);
    std::vector<int> landcover(npix, static_cast<int>(LandCover::Baresoil));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (const auto& rect : rects) {
        const double u = unif(rng);
        int lc = static_cast<int>(LandCover::Baresoil);
        if (config.crop_calendar.count(LandCover::Corn) && u < 0.35)
            lc = static_cast<int>(LandCover::Corn);
        else if (config.crop_calendar.count(LandCover::Cotton) && u < 0.65)
            lc = static_cast<int>(LandCover::Cotton);
        for (int r = rect.r0; r < rect.r1; ++r)
            for (int c = rect.c0; c < rect.c1; ++c)
                landcover[static_cast<std::size_t>(r) * config.cols + c] = lc;
    }

    // Daily rain fields (spatially correlated, event days only).
    std::vector<std::vector<double>> daily_rain(config.season_days + 1);
    for (const auto& ev : config.rain_events) {
        std::vector<double> noise(npix);
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (auto& v : noise) v = gauss(rng);
        auto field = gaussian_blur(noise, config.rows, config.cols,
                                   std::max(1.0, ev.correlation_length));
        standardize_field(field);
        if (daily_rain[ev.day].empty()) daily_rain[ev.day].assign(npix, 0.0);
        for (std::size_t p = 0; p < npix; ++p)
            daily_rain[ev.day][p] += ev.mean_mm * std::max(0.0, 1.0 + 0.55 * field[p]);
    }

    // Water balance: exponential dry-down toward the lower bound plus an
    // infiltration response to rain, bounded to [0.05, 0.45]. Canopy
    // transpiration accelerates the loss, so the e-folding rate grows
    // with the pixel's current leaf area.
    constexpr double kInfiltrationPerMm = 0.012;
    constexpr double kBareEfoldDays = 10.0;
    constexpr double kUptakePerLai = 0.28;  // extra loss rate per unit LAI
    std::vector<double> sm(npix, 0.25);

    std::vector<FineGrid> days;
    days.reserve(config.season_days);
    for (int day = 1; day <= config.season_days; ++day) {
        std::vector<double> lai(npix, 0.0);
        for (std::size_t p = 0; p < npix; ++p) {
            const auto lc = static_cast<LandCover>(landcover[p]);
            auto it = config.crop_calendar.find(lc);
            if (it != config.crop_calendar.end()) lai[p] = lai_curve(it->second, day);
        }

        const std::vector<double>* rain = daily_rain[day].empty() ? nullptr : &daily_rain[day];
        for (std::size_t p = 0; p < npix; ++p) {
            const double rate = (1.0 + kUptakePerLai * lai[p]) / kBareEfoldDays;
            double v = kSmDry + (sm[p] - kSmDry) * std::exp(-rate);
            if (rain) v += kInfiltrationPerMm * (*rain)[p];
            sm[p] = std::clamp(v, kSmDry, kSmWet);
        }

        std::vector<double> ppt(npix, 0.0);
        for (int d = std::max(1, day - 2); d <= day; ++d)
            if (!daily_rain[d].empty())
                for (std::size_t p = 0; p < npix; ++p) ppt[p] += daily_rain[d][p];

        // LST: seasonal cycle, anti-correlation with SM, vegetation
        // cooling, plus a smooth micro-meteorological field. Canopy
        // shading damps the soil-moisture coupling, so the SM slope
        // weakens with cover class and leaf area.
        std::vector<double> met(npix);
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (auto& v : met) v = gauss(rng);
        met = gaussian_blur(met, config.rows, config.cols, 6.0);
        standardize_field(met);
        const double seasonal = 6.0 * std::sin(std::numbers::pi * day / config.season_days);
        std::vector<double> lst(npix);
        for (std::size_t p = 0; p < npix; ++p) {
            double sm_slope = 35.0;  // bare soil
            if (landcover[p] == static_cast<int>(LandCover::Corn))
                sm_slope = 21.0;
            else if (landcover[p] == static_cast<int>(LandCover::Cotton))
                sm_slope = 28.0;
            lst[p] = config.base_lst + seasonal - sm_slope * (sm[p] - 0.25) - 1.2 * lai[p]
                   + 5.0 * met[p];
        }

        FineGrid g;
        g.rows = config.rows;
        g.cols = config.cols;
        g.cell_size = 1.0;
        g.add_layer("LST", std::move(lst));
        g.add_layer("LAI", std::move(lai));
        g.add_layer("PPT", std::move(ppt));
        g.add_layer("SM", sm);
        g.landcover = landcover;
        days.push_back(std::move(g));
    }
    return days;
}

}  // namespace srrm
