#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "srrm/config.hpp"
#include "srrm/evaluation.hpp"
#include "srrm/grid.hpp"
#include "srrm/pipeline.hpp"
#include "srrm/scene.hpp"
#include "srrm/seeding.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string day_filename(int day) {
    std::ostringstream s;
    s << "day_" << std::setw(3) << std::setfill('0') << day << ".grid";
    return s.str();
}

std::string default_out(const std::string& flag_value, const std::string& leaf) {
    if (!flag_value.empty()) return flag_value;
    const char* root = std::getenv("SRRM_OUT_ROOT");
    return (fs::path(root ? root : "out") / leaf).string();
}

struct SceneOnDisk {
    std::vector<srrm::FineGrid> days;  // clean grids with TB layer
};

SceneOnDisk load_scene(const std::string& scene_dir, int season_days) {
    SceneOnDisk scene;
    for (int day = 1; day <= season_days; ++day) {
        const auto path = fs::path(scene_dir) / day_filename(day);
        if (!fs::exists(path))
            throw srrm::DataError("missing scene file: " + path.string());
        scene.days.push_back(srrm::read_grid(path.string()));
    }
    return scene;
}

json manifest_base(const std::string& config_path, const srrm::RunConfig& cfg) {
    json m;
    m["config_hash"] = srrm::config_hash(config_path);
    m["seed"] = cfg.seed;
    m["timestamp"] = std::chrono::duration_cast<std::chrono::seconds>(
                         std::chrono::system_clock::now().time_since_epoch())
                         .count();
    m["stages"] = json::object({{"scene", 1}, {"grid", 1}, {"clustering", 1},
                                {"regression", 1}, {"pipeline", 1}, {"evaluation", 1}});
    m["outputs"] = json::array();
    return m;
}

int cmd_generate(const std::string& config_path, const std::string& out_dir,
                 std::optional<std::uint64_t> seed_override) {
    auto cfg = srrm::load_config(config_path);
    if (seed_override) srrm::apply_seed(cfg, *seed_override);
    fs::create_directories(out_dir);
    auto days = srrm::generate_scene(cfg.scene);
    json manifest = manifest_base(config_path, cfg);
    for (std::size_t d = 0; d < days.size(); ++d) {
        const auto with_tb = srrm::forward_model_grid(days[d], cfg.tau_omega);
        const auto path = fs::path(out_dir) / day_filename(static_cast<int>(d) + 1);
        srrm::write_grid(with_tb, path.string());
        manifest["outputs"].push_back(path.string());
    }
    std::ofstream(fs::path(out_dir) / "manifest.json") << manifest.dump(2) << '\n';
    std::cout << "generated " << days.size() << " days to " << out_dir << '\n';
    return 0;
}

int cmd_downscale(const std::string& config_path, const std::string& scene_dir,
                  const std::string& out_dir, int jobs, int cadence_override,
                  std::optional<std::uint64_t> seed_override) {
    auto cfg = srrm::load_config(config_path);
    if (seed_override) srrm::apply_seed(cfg, *seed_override);
    if (cadence_override > 0) cfg.pipeline.cadence = cadence_override;
    const auto scene = load_scene(scene_dir, cfg.scene.season_days);

    std::vector<srrm::FineGrid> noisy;
    std::vector<srrm::CoarseGrid> coarse;
    std::vector<std::vector<double>> truth;
    for (std::size_t d = 0; d < scene.days.size(); ++d) {
        srrm::NoiseSpec spec = cfg.noise;
        spec.seed = srrm::mix_seed(cfg.noise.seed, d + 1);
        noisy.push_back(srrm::add_observation_noise(scene.days[d], spec));
        coarse.push_back(srrm::aggregate(scene.days[d], cfg.pipeline.scale_factor));
        truth.push_back(scene.days[d].layer("TB"));
    }

    const auto season = srrm::run_season(noisy, coarse, truth, cfg.pipeline, jobs);

    fs::create_directories(out_dir);
    json manifest = manifest_base(config_path, cfg);

    std::vector<int> eval_days;
    std::vector<std::vector<double>> eval_truth, eval_est;
    std::vector<const std::vector<int>*> eval_lc;
    for (const auto& result : season.days) {
        const auto day_dir = fs::path(out_dir) / ("day_" + std::to_string(result.day));
        fs::create_directories(day_dir);

        srrm::FineGrid est;
        est.rows = scene.days[result.day - 1].rows;
        est.cols = scene.days[result.day - 1].cols;
        est.add_layer("TB_EST", result.tb_estimate);
        srrm::write_grid(est, (day_dir / "tb_estimate.grid").string());
        srrm::write_memberships(result.memberships, (day_dir / "membership.txt").string());
        {
            json params;
            params["k"] = result.chosen.k;
            params["mu_c"] = result.chosen.mu_c;
            params["mu_r"] = result.chosen.mu_r;
            params["cv_mae"] = result.chosen.score;
            std::ofstream(day_dir / "params.json") << params.dump(2) << '\n';
        }
        {
            std::ofstream f(day_dir / "cost_trace.csv");
            f << std::setprecision(std::numeric_limits<double>::max_digits10);
            f << "iteration,cost\n";
            for (std::size_t t = 0; t < result.cost_trace.size(); ++t)
                f << t << ',' << result.cost_trace[t] << '\n';
        }
        {
            std::ofstream f(day_dir / "training_mask.txt");
            for (std::size_t i = 0; i < result.training_mask.size(); ++i)
                f << (result.training_mask[i] ? 1 : 0)
                  << ((i + 1) % est.cols == 0 ? '\n' : ' ');
        }
        manifest["outputs"].push_back(day_dir.string());
        manifest["per_day_status"][std::to_string(result.day)] = "ok";

        eval_days.push_back(result.day);
        eval_truth.push_back(truth[result.day - 1]);
        eval_est.push_back(result.tb_estimate);
        eval_lc.push_back(&scene.days[result.day - 1].landcover);
    }
    for (const auto& [day, message] : season.failures)
        manifest["per_day_status"][std::to_string(day)] = "failed: " + message;

    if (!eval_days.empty()) {
        const auto report = srrm::evaluate_season(
            eval_days, eval_truth, eval_est, eval_lc, cfg.evaluation.threshold_kelvin,
            cfg.evaluation.confidence, cfg.evaluation.bins);
        const auto report_dir = (fs::path(out_dir) / "report").string();
        srrm::emit_report(report, eval_truth, eval_est, scene.days[0].rows, scene.days[0].cols,
                          cfg.evaluation.threshold_kelvin, report_dir);
        manifest["outputs"].push_back(report_dir);
        std::cout << "season RMSE " << report.season_global.rmse << " K, SD "
                  << report.season_global.sd << " K, pass fraction "
                  << report.season_threshold.pass_fraction << '\n';
    }
    std::ofstream(fs::path(out_dir) / "manifest.json") << manifest.dump(2) << '\n';
    if (!season.failures.empty()) {
        std::cout << season.failures.size() << " day(s) failed:\n";
        for (const auto& [day, message] : season.failures)
            std::cout << "  day " << day << ": " << message << '\n';
    }
    return 0;
}

int cmd_iterstudy(const std::string& config_path, const std::string& scene_dir, int day,
                  const std::string& out_dir, std::optional<std::uint64_t> seed_override) {
    auto cfg = srrm::load_config(config_path);
    if (seed_override) srrm::apply_seed(cfg, *seed_override);
    if (day < 1 || day > cfg.scene.season_days)
        throw srrm::ConfigError("iterstudy: --day out of range");
    const auto path = fs::path(scene_dir) / day_filename(day);
    const auto clean = srrm::read_grid(path.string());

    srrm::NoiseSpec spec = cfg.noise;
    spec.seed = srrm::mix_seed(cfg.noise.seed, static_cast<std::uint64_t>(day));
    const auto noisy = srrm::add_observation_noise(clean, spec);
    const auto coarse = srrm::aggregate(clean, cfg.pipeline.scale_factor);
    const auto& truth = clean.layer("TB");

    const auto rows = srrm::iteration_study(noisy, coarse, truth, day, cfg.pipeline);

    fs::create_directories(out_dir);
    const auto csv_path = fs::path(out_dir) / ("iterstudy_day_" + std::to_string(day) + ".csv");
    std::ofstream f(csv_path);
    f << std::setprecision(std::numeric_limits<double>::max_digits10);
    f << "iteration,rmse\n";
    for (const auto& row : rows) f << row.iteration << ',' << row.rmse << '\n';
    std::cout << "wrote " << rows.size() << " checkpoints to " << csv_path.string() << '\n';
    return 0;
}

int cmd_validate(const std::string& config_path) {
    const auto cfg = srrm::load_config(config_path);
    std::cout << describe_config(cfg);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SRRM brightness-temperature downscaling"};
    app.require_subcommand(1);

    std::string config_path, out_flag, scene_dir;
    std::uint64_t seed_override = 0;
    bool seed_given = false;
    int jobs = 1, day = 0, cadence = 0;

    auto add_common = [&](CLI::App* sub, bool needs_scene) {
        sub->add_option("--config", config_path, "run configuration file")->required();
        sub->add_option("--out", out_flag, "output directory");
        sub->add_option_function<std::uint64_t>(
            "--seed", [&](std::uint64_t s) { seed_override = s; seed_given = true; },
            "override the config seed");
        if (needs_scene)
            sub->add_option("--scene", scene_dir, "scene directory from the generate step")
                ->required();
    };

    auto* generate = app.add_subcommand("generate", "build a seasonal scene series");
    add_common(generate, false);
    auto* downscale = app.add_subcommand("downscale", "run the full pipeline and evaluation");
    add_common(downscale, true);
    downscale->add_option("--jobs", jobs, "day-level parallelism")->check(CLI::PositiveNumber);
    downscale->add_option("--cadence", cadence, "override pipeline cadence");
    auto* iterstudy = app.add_subcommand("iterstudy", "RMSE vs clustering iteration for one day");
    add_common(iterstudy, true);
    iterstudy->add_option("--day", day, "scene day to study")->required();
    auto* validate = app.add_subcommand("validate", "parse and check a config file");
    validate->add_option("--config", config_path, "run configuration file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        const auto seed = seed_given ? std::optional<std::uint64_t>(seed_override)
                                     : std::nullopt;
        if (generate->parsed())
            return cmd_generate(config_path, default_out(out_flag, "scene"), seed);
        if (downscale->parsed())
            return cmd_downscale(config_path, scene_dir, default_out(out_flag, "downscale"),
                                 jobs, cadence, seed);
        if (iterstudy->parsed())
            return cmd_iterstudy(config_path, scene_dir, day,
                                 default_out(out_flag, "iterstudy"), seed);
        if (validate->parsed()) return cmd_validate(config_path);
    } catch (const srrm::ConfigError& e) {
        std::cerr << "error: config: " << e.what() << '\n';
        return 2;
    } catch (const srrm::NumericalError& e) {
        std::cerr << "error: numerical: " << e.what() << '\n';
        return 4;
    } catch (const srrm::DataError& e) {
        std::cerr << "error: data: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
