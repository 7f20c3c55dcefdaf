#include "srrm/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>

#include "srrm/kernels.hpp"
#include "srrm/seeding.hpp"

namespace srrm {

AssembledFeatures assemble_features(const FineGrid& fine, const CoarseGrid& coarse) {
    for (const char* name : {"LST", "PPT", "LAI"})
        if (!fine.has_layer(name))
            throw DataError(std::string("assemble_features: missing fine layer ") + name);
    if (!fine.has_landcover())
        throw DataError("assemble_features: fine grid has no land cover");
    if (!coarse.grid.has_layer("TB"))
        throw DataError("assemble_features: coarse grid has no TB layer");
    if (coarse.grid.rows * coarse.scale_factor != fine.rows ||
        coarse.grid.cols * coarse.scale_factor != fine.cols)
        throw ShapeError("assemble_features: coarse/fine scales do not divide");

    const Eigen::Index n = static_cast<Eigen::Index>(fine.size());
    const auto& lst = fine.layer("LST");
    const auto& ppt = fine.layer("PPT");
    const auto& lai = fine.layer("LAI");
    const auto& coarse_tb = coarse.grid.layer("TB");

    AssembledFeatures out;
    // Clustering features: LST, PPT, LAI standardized; one-hot LC;
    // coordinates min-max scaled to [0, 1].
    out.clustering.names = {"LST", "PPT", "LAI", "LC_baresoil", "LC_corn", "LC_cotton",
                            "x_scaled", "y_scaled"};
    out.clustering.values.resize(n, 8);
    out.clustering.norms.assign(8, FeatureMatrix::Norm{});

    const double* cont[3] = {lst.data(), ppt.data(), lai.data()};
    for (int c = 0; c < 3; ++c) {
        double mean = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) mean += cont[c][i];
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) var += (cont[c][i] - mean) * (cont[c][i] - mean);
        var /= static_cast<double>(n);
        const double sd = std::sqrt(var);
        const double scale = sd > 0.0 ? sd : 1.0;
        out.clustering.norms[c] = {sd > 0.0 ? mean : 0.0, scale};
        for (Eigen::Index i = 0; i < n; ++i)
            out.clustering.values(i, c) = (cont[c][i] - out.clustering.norms[c].offset) / scale;
    }
    const double xden = fine.cols > 1 ? fine.cols - 1.0 : 1.0;
    const double yden = fine.rows > 1 ? fine.rows - 1.0 : 1.0;
    out.clustering.norms[6] = {0.0, xden};
    out.clustering.norms[7] = {0.0, yden};
    for (Eigen::Index i = 0; i < n; ++i) {
        const int r = static_cast<int>(i) / fine.cols;
        const int c = static_cast<int>(i) % fine.cols;
        for (int cls = 0; cls < kNumLandCovers; ++cls)
            out.clustering.values(i, 3 + cls) = fine.landcover[i] == cls ? 1.0 : 0.0;
        out.clustering.values(i, 6) = c / xden;
        out.clustering.values(i, 7) = r / yden;
    }

    // Regression features stay in raw units; fit() standardizes per model.
    out.regression.resize(n, 7);
    for (Eigen::Index i = 0; i < n; ++i) {
        const int r = static_cast<int>(i) / fine.cols;
        const int c = static_cast<int>(i) % fine.cols;
        out.regression(i, 0) = lst[i];
        out.regression(i, 1) = ppt[i];
        out.regression(i, 2) = lai[i];
        for (int cls = 0; cls < kNumLandCovers; ++cls)
            out.regression(i, 3 + cls) = fine.landcover[i] == cls ? 1.0 : 0.0;
        const std::size_t ci = static_cast<std::size_t>(r / coarse.scale_factor) *
                                   coarse.grid.cols +
                               c / coarse.scale_factor;
        out.regression(i, 6) = coarse_tb[ci];
    }
    return out;
}

std::vector<bool> choose_training_pixels(std::size_t n_pixels, double fraction,
                                         std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw DataError("training_fraction must be in (0, 1]");
    const std::size_t n_train =
        std::max<std::size_t>(1, std::llround(fraction * static_cast<double>(n_pixels)));
    std::vector<std::size_t> idx(n_pixels);
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < n_train; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n_pixels - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }
    std::vector<bool> mask(n_pixels, false);
    for (std::size_t i = 0; i < n_train; ++i) mask[idx[i]] = true;
    return mask;
}

namespace {

TrainingSet make_training_set(const AssembledFeatures& features,
                              const std::vector<double>& fine_tb_truth,
                              const std::vector<int>& rows) {
    TrainingSet set;
    set.features.resize(rows.size(), features.regression.cols());
    set.targets.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        set.features.row(i) = features.regression.row(rows[i]);
        set.targets(i) = fine_tb_truth[rows[i]];
        set.pixel_indices.push_back(rows[i]);
    }
    return set;
}

// Fused predictions for a set of pixels given a fitted ensemble.
std::vector<double> fused_predictions(const AssembledFeatures& features,
                                      const MembershipMatrix& memberships,
                                      const Ensemble& ensemble,
                                      const std::vector<int>& pixels) {
    const int k = ensemble.size();
    std::vector<bool> vacancy(k);
    for (int c = 0; c < k; ++c) vacancy[c] = ensemble.vacant(c);
    std::vector<double> out(pixels.size());
#pragma omp parallel for schedule(static)
    for (long long p = 0; p < static_cast<long long>(pixels.size()); ++p) {
        const int i = pixels[p];
        Eigen::VectorXd preds = Eigen::VectorXd::Zero(k);
        for (int c = 0; c < k; ++c)
            if (!vacancy[c])
                preds(c) = predict(*ensemble.models[c], features.regression.row(i));
        out[p] = fuse(memberships.m.row(i).transpose(), preds, vacancy);
    }
    return out;
}

}  // namespace

std::vector<double> fuse_over_pixels(const AssembledFeatures& features,
                                     const MembershipMatrix& memberships,
                                     const Ensemble& ensemble, const std::vector<int>& pixels) {
    return fused_predictions(features, memberships, ensemble, pixels);
}

SelectedParameters select_parameters(const AssembledFeatures& features,
                                     const std::vector<double>& fine_tb_truth,
                                     const std::vector<bool>& training_mask,
                                     const PipelineConfig& config) {
    if (config.candidate_k.empty() || config.candidate_mu_c.empty() ||
        config.candidate_mu_r.empty())
        throw ConfigError("select_parameters: empty candidate list");

    std::vector<int> train_rows;
    for (std::size_t i = 0; i < training_mask.size(); ++i)
        if (training_mask[i]) train_rows.push_back(static_cast<int>(i));
    const int folds = std::max(2, std::min<int>(config.cv_folds,
                                                static_cast<int>(train_rows.size()) / 2));
    if (static_cast<int>(train_rows.size()) < 2 * folds)
        throw DataError("select_parameters: too few training pixels for cross-validation");

    // Deterministic fold assignment, shared across all candidates.
    std::vector<int> shuffled = train_rows;
    std::mt19937_64 rng(mix_seed(config.seed, 0xf01d));
    std::shuffle(shuffled.begin(), shuffled.end(), rng);

    // Sorted candidates make the value-based tie-break order-independent.
    auto ks = config.candidate_k;
    auto mcs = config.candidate_mu_c;
    auto mrs = config.candidate_mu_r;
    std::sort(ks.begin(), ks.end());
    std::sort(mcs.begin(), mcs.end());
    std::sort(mrs.begin(), mrs.end());

    const double sigma = config.clustering.kernel_width > 0.0
                             ? config.clustering.kernel_width
                             : median_pairwise_distance(features.clustering.values,
                                                        config.clustering.seed);
    const Eigen::MatrixXd affinity =
        kernels::affinity_matrix(features.clustering.values, sigma);

    SelectedParameters best;
    bool found = false;
    std::string failures;

    for (int k : ks) {
        for (double mu_c : mcs) {
            ClusterConfig cc = config.clustering;
            cc.k = k;
            cc.entropy_weight = mu_c;
            cc.kernel_width = sigma;
            ClusterResult clustered;
            try {
                clustered = cluster(features.clustering, cc, affinity);
            } catch (const NumericalError& e) {
                failures += "K=" + std::to_string(k) + " mu_c=" + std::to_string(mu_c) + ": " +
                            e.what() + "; ";
                continue;
            }
            const auto labels = hard_assign(clustered.memberships);

            for (double mu_r : mrs) {
                double abs_err = 0.0;
                std::size_t count = 0;
                bool feasible = true;
                for (int fold = 0; fold < folds && feasible; ++fold) {
                    std::vector<int> fit_rows, held_rows;
                    for (std::size_t i = 0; i < shuffled.size(); ++i)
                        (static_cast<int>(i % folds) == fold ? held_rows : fit_rows)
                            .push_back(shuffled[i]);
                    std::vector<int> fit_labels;
                    for (int r : fit_rows) fit_labels.push_back(labels[r]);
                    try {
                        const auto set = make_training_set(features, fine_tb_truth, fit_rows);
                        const auto ensemble =
                            fit_ensemble(set, fit_labels, k, config.sigma_r, mu_r);
                        const auto preds = fused_predictions(features, clustered.memberships,
                                                             ensemble, held_rows);
                        for (std::size_t i = 0; i < held_rows.size(); ++i) {
                            abs_err += std::abs(preds[i] - fine_tb_truth[held_rows[i]]);
                            ++count;
                        }
                    } catch (const std::runtime_error& e) {
                        failures += "K=" + std::to_string(k) + " mu_r=" + std::to_string(mu_r) +
                                    ": " + e.what() + "; ";
                        feasible = false;
                    }
                }
                if (!feasible || count == 0) continue;
                const double score = abs_err / static_cast<double>(count);
                // Strict improvement; candidates are visited in ascending
                // (K, mu_c, mu_r) order, so ties keep the smaller triple.
                if (!found || score < best.score) {
                    best = {k, mu_c, mu_r, score};
                    found = true;
                }
            }
        }
    }
    if (!found)
        throw NumericalError("select_parameters: all candidates infeasible: " + failures);
    return best;
}

DownscaleResult downscale_day_fixed(const FineGrid& fine_aux, const CoarseGrid& coarse_tb,
                                    const std::vector<double>& fine_tb_truth, int day,
                                    const PipelineConfig& config,
                                    const SelectedParameters& fixed) {
    const auto features = assemble_features(fine_aux, coarse_tb);
    const auto mask =
        choose_training_pixels(fine_aux.size(), config.training_fraction,
                               mix_seed(config.seed, static_cast<std::uint64_t>(day)));

    ClusterConfig cc = config.clustering;
    cc.k = fixed.k;
    cc.entropy_weight = fixed.mu_c;
    cc.seed = mix_seed(config.seed, 0xc175ull + static_cast<std::uint64_t>(day));
    auto clustered = cluster(features.clustering, cc);

    std::vector<int> train_rows;
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i]) train_rows.push_back(static_cast<int>(i));
    const auto labels = hard_assign(clustered.memberships);
    std::vector<int> train_labels;
    for (int r : train_rows) train_labels.push_back(labels[r]);

    const auto set = make_training_set(features, fine_tb_truth, train_rows);
    const auto ensemble = fit_ensemble(set, train_labels, fixed.k, config.sigma_r, fixed.mu_r);

    std::vector<int> all_rows(fine_aux.size());
    std::iota(all_rows.begin(), all_rows.end(), 0);
    auto estimate = fused_predictions(features, clustered.memberships, ensemble, all_rows);

    DownscaleResult result;
    result.day = day;
    result.tb_estimate = std::move(estimate);
    result.chosen = fixed;
    result.memberships = std::move(clustered.memberships);
    result.training_mask = mask;
    result.cost_trace = std::move(clustered.cost_trace);
    return result;
}

DownscaleResult downscale_day(const FineGrid& fine_aux, const CoarseGrid& coarse_tb,
                              const std::vector<double>& fine_tb_truth, int day,
                              const PipelineConfig& config) {
    try {
        const auto features = assemble_features(fine_aux, coarse_tb);
        const auto mask =
            choose_training_pixels(fine_aux.size(), config.training_fraction,
                                   mix_seed(config.seed, static_cast<std::uint64_t>(day)));
        PipelineConfig day_config = config;
        day_config.seed = mix_seed(config.seed, static_cast<std::uint64_t>(day));
        day_config.clustering.seed =
            mix_seed(config.seed, 0xc175ull + static_cast<std::uint64_t>(day));
        const auto chosen = select_parameters(features, fine_tb_truth, mask, day_config);
        PipelineConfig fit_config = config;
        fit_config.clustering.seed = day_config.clustering.seed;
        return downscale_day_fixed(fine_aux, coarse_tb, fine_tb_truth, day, fit_config, chosen);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::runtime_error& e) {
        throw std::runtime_error("downscale_day(day " + std::to_string(day) + "): " + e.what());
    }
}

std::vector<IterStudyRow> iteration_study(const FineGrid& fine_aux, const CoarseGrid& coarse_tb,
                                          const std::vector<double>& fine_tb_truth, int day,
                                          const PipelineConfig& config, int checkpoint_every) {
    if (checkpoint_every < 1) throw ConfigError("iteration_study: checkpoint_every must be >= 1");
    const auto features = assemble_features(fine_aux, coarse_tb);
    const auto mask =
        choose_training_pixels(fine_aux.size(), config.training_fraction,
                               mix_seed(config.seed, static_cast<std::uint64_t>(day)));

    PipelineConfig day_config = config;
    day_config.seed = mix_seed(config.seed, static_cast<std::uint64_t>(day));
    day_config.clustering.seed =
        mix_seed(config.seed, 0xc175ull + static_cast<std::uint64_t>(day));
    const auto chosen = select_parameters(features, fine_tb_truth, mask, day_config);

    ClusterConfig cc = day_config.clustering;
    cc.k = chosen.k;
    cc.entropy_weight = chosen.mu_c;
    cc.checkpoint_every = checkpoint_every;  // also disables early stopping
    const auto clustered = cluster(features.clustering, cc);

    std::vector<int> train_rows, all_rows(fine_aux.size());
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i]) train_rows.push_back(static_cast<int>(i));
    std::iota(all_rows.begin(), all_rows.end(), 0);

    std::vector<IterStudyRow> rows;
    for (std::size_t s = 0; s < clustered.checkpoints.size(); ++s) {
        const auto& memberships = clustered.checkpoints[s];
        const auto labels = hard_assign(memberships);
        std::vector<int> train_labels;
        for (int r : train_rows) train_labels.push_back(labels[r]);
        const auto set = make_training_set(features, fine_tb_truth, train_rows);
        const auto ensemble =
            fit_ensemble(set, train_labels, chosen.k, config.sigma_r, chosen.mu_r);
        const auto estimate = fused_predictions(features, memberships, ensemble, all_rows);
        double sq = 0.0;
        for (std::size_t i = 0; i < estimate.size(); ++i) {
            const double e = estimate[i] - fine_tb_truth[i];
            sq += e * e;
        }
        rows.push_back({clustered.checkpoint_iterations[s],
                        std::sqrt(sq / static_cast<double>(estimate.size()))});
    }
    return rows;
}

SeasonResult run_season(const std::vector<FineGrid>& fine_aux_days,
                        const std::vector<CoarseGrid>& coarse_tb_days,
                        const std::vector<std::vector<double>>& fine_tb_truth,
                        const PipelineConfig& config, int jobs) {
    if (fine_aux_days.empty()) throw DataError("run_season: empty series");
    if (fine_aux_days.size() != coarse_tb_days.size() ||
        fine_aux_days.size() != fine_tb_truth.size())
        throw ShapeError("run_season: series length mismatch");
    if (config.cadence < 1) throw ConfigError("run_season: cadence must be >= 1");

    std::vector<int> days;  // 1-based day numbers
    for (std::size_t d = 0; d < fine_aux_days.size(); d += config.cadence)
        days.push_back(static_cast<int>(d) + 1);

    std::vector<std::optional<DownscaleResult>> slots(days.size());
    std::vector<std::optional<std::string>> errors(days.size());

    auto work = [&](std::size_t slot) {
        const int day = days[slot];
        try {
            slots[slot] = downscale_day(fine_aux_days[day - 1], coarse_tb_days[day - 1],
                                        fine_tb_truth[day - 1], day, config);
        } catch (const std::exception& e) {
            errors[slot] = e.what();
        }
    };

    if (jobs <= 1) {
        for (std::size_t s = 0; s < days.size(); ++s) work(s);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j)
            pool.emplace_back([&] {
                for (std::size_t s = next.fetch_add(1); s < days.size(); s = next.fetch_add(1))
                    work(s);
            });
        for (auto& t : pool) t.join();
    }

    SeasonResult out;
    for (std::size_t s = 0; s < days.size(); ++s) {
        if (slots[s])
            out.days.push_back(std::move(*slots[s]));
        else
            out.failures.emplace_back(days[s], errors[s].value_or("unknown failure"));
    }
    return out;
}

}  // namespace srrm
