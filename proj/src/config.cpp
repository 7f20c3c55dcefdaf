#include "srrm/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace srrm {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& section,
                const std::set<std::string>& allowed) {
    for (const auto& [key, value] : obj.items())
        if (!allowed.count(key))
            throw ConfigError("unknown key '" + (section.empty() ? key : section + "." + key) +
                              "'");
}

template <typename T>
T get_or(const json& obj, const std::string& key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("bad value for key '" + key + "'");
    }
}

CropCalendar parse_calendar(const json& obj, const std::string& section) {
    check_keys(obj, section, {"plant_day", "harvest_day", "peak_lai"});
    for (const char* key : {"plant_day", "harvest_day", "peak_lai"})
        if (!obj.contains(key))
            throw ConfigError("missing required key '" + section + "." + key + "'");
    CropCalendar cal;
    cal.plant_day = obj.at("plant_day").get<int>();
    cal.harvest_day = obj.at("harvest_day").get<int>();
    cal.peak_lai = obj.at("peak_lai").get<double>();
    return cal;
}

}  // namespace

RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config: " + path);
    json root;
    try {
        root = json::parse(f);
    } catch (const json::exception& e) {
        throw ConfigError("config parse failure: " + std::string(e.what()));
    }

    check_keys(root, "", {"seed", "scene", "tau_omega", "noise", "pipeline", "clustering",
                          "regression", "evaluation"});
    RunConfig cfg;
    cfg.seed = get_or<std::uint64_t>(root, "seed", 0);

    if (root.contains("scene")) {
        const auto& s = root.at("scene");
        check_keys(s, "scene", {"rows", "cols", "n_fields", "season_days", "base_lst", "crops",
                                "rain_events"});
        cfg.scene.rows = get_or(s, "rows", cfg.scene.rows);
        cfg.scene.cols = get_or(s, "cols", cfg.scene.cols);
        cfg.scene.n_fields = get_or(s, "n_fields", cfg.scene.n_fields);
        cfg.scene.season_days = get_or(s, "season_days", cfg.scene.season_days);
        cfg.scene.base_lst = get_or(s, "base_lst", cfg.scene.base_lst);
        if (s.contains("crops")) {
            const auto& crops = s.at("crops");
            check_keys(crops, "scene.crops", {"corn", "cotton"});
            if (crops.contains("corn"))
                cfg.scene.crop_calendar[LandCover::Corn] =
                    parse_calendar(crops.at("corn"), "scene.crops.corn");
            if (crops.contains("cotton"))
                cfg.scene.crop_calendar[LandCover::Cotton] =
                    parse_calendar(crops.at("cotton"), "scene.crops.cotton");
        }
        if (s.contains("rain_events")) {
            for (const auto& ev : s.at("rain_events")) {
                check_keys(ev, "scene.rain_events[]", {"day", "mean_mm", "correlation_length"});
                RainEvent e;
                e.day = get_or(ev, "day", 0);
                e.mean_mm = get_or(ev, "mean_mm", 0.0);
                e.correlation_length = get_or(ev, "correlation_length", 8.0);
                cfg.scene.rain_events.push_back(e);
            }
        }
    }
    cfg.scene.seed = cfg.seed;

    if (root.contains("tau_omega")) {
        const auto& t = root.at("tau_omega");
        check_keys(t, "tau_omega",
                   {"incidence_angle", "sky_temperature", "soil_reflectivity",
                    "vegetation_b_factor", "single_scattering_albedo", "rms_height",
                    "correlation_length"});
        auto& p = cfg.tau_omega;
        p.incidence_angle = get_or(t, "incidence_angle", p.incidence_angle);
        p.sky_temperature = get_or(t, "sky_temperature", p.sky_temperature);
        p.soil_reflectivity = get_or(t, "soil_reflectivity", p.soil_reflectivity);
        p.vegetation_b_factor = get_or(t, "vegetation_b_factor", p.vegetation_b_factor);
        p.single_scattering_albedo =
            get_or(t, "single_scattering_albedo", p.single_scattering_albedo);
        p.rms_height = get_or(t, "rms_height", p.rms_height);
        p.correlation_length = get_or(t, "correlation_length", p.correlation_length);
        if (p.incidence_angle < 0.0 || p.incidence_angle >= 90.0)
            throw ConfigError("tau_omega.incidence_angle must be in [0, 90)");
        if (p.sky_temperature < 0.0)
            throw ConfigError("tau_omega.sky_temperature must be >= 0");
        if (p.soil_reflectivity < 0.0 || p.soil_reflectivity > 1.0)
            throw ConfigError("tau_omega.soil_reflectivity must be in [0, 1]");
        if (p.single_scattering_albedo < 0.0 || p.single_scattering_albedo >= 1.0)
            throw ConfigError("tau_omega.single_scattering_albedo must be in [0, 1)");
    }

    if (root.contains("noise")) {
        const auto& n = root.at("noise");
        check_keys(n, "noise", {"sd_lst", "sd_ppt", "sd_lai"});
        cfg.noise.sd_lst = get_or(n, "sd_lst", 5.0);
        cfg.noise.sd_ppt = get_or(n, "sd_ppt", 1.0);
        cfg.noise.sd_lai = get_or(n, "sd_lai", 0.1);
        if (cfg.noise.sd_lst < 0 || cfg.noise.sd_ppt < 0 || cfg.noise.sd_lai < 0)
            throw ConfigError("noise standard deviations must be >= 0");
    } else {
        cfg.noise = {5.0, 1.0, 0.1, 0};
    }
    cfg.noise.seed = cfg.seed ^ 0x5eedull;

    if (root.contains("pipeline")) {
        const auto& p = root.at("pipeline");
        check_keys(p, "pipeline",
                   {"scale_factor", "training_fraction", "cadence", "candidate_k",
                    "candidate_mu_c", "candidate_mu_r", "cv_folds"});
        auto& pl = cfg.pipeline;
        pl.scale_factor = get_or(p, "scale_factor", pl.scale_factor);
        pl.training_fraction = get_or(p, "training_fraction", pl.training_fraction);
        pl.cadence = get_or(p, "cadence", pl.cadence);
        pl.candidate_k = get_or(p, "candidate_k", pl.candidate_k);
        pl.candidate_mu_c = get_or(p, "candidate_mu_c", pl.candidate_mu_c);
        pl.candidate_mu_r = get_or(p, "candidate_mu_r", pl.candidate_mu_r);
        pl.cv_folds = get_or(p, "cv_folds", pl.cv_folds);
        if (!(pl.training_fraction > 0.0 && pl.training_fraction <= 1.0))
            throw ConfigError("pipeline.training_fraction must be in (0, 1]");
        if (pl.candidate_k.empty() || pl.candidate_mu_c.empty() || pl.candidate_mu_r.empty())
            throw ConfigError("pipeline candidate lists must be non-empty");
        for (int k : pl.candidate_k)
            if (k < 1) throw ConfigError("pipeline.candidate_k entries must be >= 1");
    }

    if (root.contains("clustering")) {
        const auto& c = root.at("clustering");
        check_keys(c, "clustering",
                   {"max_iterations", "batch_size", "step_size", "step_decay", "kernel_width",
                    "tolerance", "patience", "membership_floor", "restarts"});
        auto& cl = cfg.pipeline.clustering;
        cl.max_iterations = get_or(c, "max_iterations", cl.max_iterations);
        cl.batch_size = get_or(c, "batch_size", cl.batch_size);
        cl.step_size = get_or(c, "step_size", cl.step_size);
        cl.step_decay = get_or(c, "step_decay", cl.step_decay);
        cl.kernel_width = get_or(c, "kernel_width", cl.kernel_width);
        cl.tolerance = get_or(c, "tolerance", cl.tolerance);
        cl.patience = get_or(c, "patience", cl.patience);
        cl.membership_floor = get_or(c, "membership_floor", cl.membership_floor);
        cl.restarts = get_or(c, "restarts", cl.restarts);
        if (cl.max_iterations < 1) throw ConfigError("clustering.max_iterations must be >= 1");
        if (cl.restarts < 1) throw ConfigError("clustering.restarts must be >= 1");
    }

    if (root.contains("regression")) {
        const auto& r = root.at("regression");
        check_keys(r, "regression", {"kernel_width"});
        cfg.pipeline.sigma_r = get_or(r, "kernel_width", cfg.pipeline.sigma_r);
    }

    if (root.contains("evaluation")) {
        const auto& e = root.at("evaluation");
        check_keys(e, "evaluation", {"threshold_kelvin", "confidence", "bins"});
        cfg.evaluation.threshold_kelvin =
            get_or(e, "threshold_kelvin", cfg.evaluation.threshold_kelvin);
        cfg.evaluation.confidence = get_or(e, "confidence", cfg.evaluation.confidence);
        cfg.evaluation.bins = get_or(e, "bins", cfg.evaluation.bins);
        if (cfg.evaluation.threshold_kelvin <= 0.0)
            throw ConfigError("evaluation.threshold_kelvin must be > 0");
    }

    apply_seed(cfg, cfg.seed);
    return cfg;
}

void apply_seed(RunConfig& cfg, std::uint64_t seed) {
    cfg.seed = seed;
    cfg.scene.seed = seed;
    cfg.noise.seed = seed ^ 0x5eedull;
    cfg.pipeline.seed = seed;
    cfg.pipeline.clustering.seed = seed ^ 0xc5ull;
}

std::uint64_t config_hash(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open config: " + path);
    std::uint64_t h = 0xcbf29ce484222325ull;
    char c;
    while (f.get(c)) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string describe_config(const RunConfig& cfg) {
    std::ostringstream out;
    out << "seed: " << cfg.seed << '\n';
    out << "scene: " << cfg.scene.rows << "x" << cfg.scene.cols << ", " << cfg.scene.season_days
        << " days, " << cfg.scene.n_fields << " fields, base_lst " << cfg.scene.base_lst
        << " K, " << cfg.scene.rain_events.size() << " rain events\n";
    for (const auto& [crop, cal] : cfg.scene.crop_calendar)
        out << "  crop " << static_cast<int>(crop) << ": plant " << cal.plant_day << " harvest "
            << cal.harvest_day << " peak_lai " << cal.peak_lai << '\n';
    out << "tau_omega: theta " << cfg.tau_omega.incidence_angle << " deg, T_sky "
        << cfg.tau_omega.sky_temperature << " K, r_dry " << cfg.tau_omega.soil_reflectivity
        << ", b " << cfg.tau_omega.vegetation_b_factor << ", omega "
        << cfg.tau_omega.single_scattering_albedo << '\n';
    out << "noise: sd_lst " << cfg.noise.sd_lst << " K, sd_ppt " << cfg.noise.sd_ppt
        << " mm, sd_lai " << cfg.noise.sd_lai << '\n';
    out << "pipeline: scale_factor " << cfg.pipeline.scale_factor << ", training_fraction "
        << cfg.pipeline.training_fraction << ", cadence " << cfg.pipeline.cadence
        << ", cv_folds " << cfg.pipeline.cv_folds << '\n';
    out << "  candidate_k:";
    for (int k : cfg.pipeline.candidate_k) out << ' ' << k;
    out << "\n  candidate_mu_c:";
    for (double v : cfg.pipeline.candidate_mu_c) out << ' ' << v;
    out << "\n  candidate_mu_r:";
    for (double v : cfg.pipeline.candidate_mu_r) out << ' ' << v;
    out << "\nclustering: max_iterations " << cfg.pipeline.clustering.max_iterations
        << ", batch_size " << cfg.pipeline.clustering.batch_size << ", step_size "
        << cfg.pipeline.clustering.step_size << ", step_decay "
        << cfg.pipeline.clustering.step_decay << ", kernel_width "
        << (cfg.pipeline.clustering.kernel_width > 0
                ? std::to_string(cfg.pipeline.clustering.kernel_width)
                : std::string("auto (median heuristic)"))
        << '\n';
    out << "regression: kernel_width "
        << (cfg.pipeline.sigma_r > 0 ? std::to_string(cfg.pipeline.sigma_r)
                                     : std::string("auto (median heuristic)"))
        << '\n';
    out << "evaluation: threshold " << cfg.evaluation.threshold_kelvin << " K, confidence "
        << cfg.evaluation.confidence << ", bins " << cfg.evaluation.bins << '\n';
    return out.str();
}

}  // namespace srrm
