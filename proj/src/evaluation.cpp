#include "srrm/evaluation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>

namespace srrm {

namespace {

constexpr double kHistSmoothing = 1e-10;
constexpr std::array<const char*, kNumLandCovers> kClassNames = {"baresoil", "corn", "cotton"};

double normal_quantile_one_sided(double confidence) {
    // Inverse standard normal CDF via Acklam's rational approximation.
    const double p = confidence;
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425, phigh = 1 - plow;
    double q, r;
    if (p < plow) {
        q = std::sqrt(-2 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    }
    if (p <= phigh) {
        q = p - 0.5;
        r = q * q;
        return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
               (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
    }
    q = std::sqrt(-2 * std::log(1 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
}

}  // namespace

ErrorStats rmse_sd(const std::vector<double>& truth, const std::vector<double>& estimated,
                   const std::vector<bool>& mask) {
    if (truth.size() != estimated.size() || truth.size() != mask.size())
        throw ShapeError("rmse_sd: size mismatch");
    double sum = 0.0, sumsq = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (!mask[i]) continue;
        const double e = estimated[i] - truth[i];
        sum += e;
        sumsq += e * e;
        ++n;
    }
    if (n == 0) throw DataError("rmse_sd: empty mask");
    ErrorStats s;
    s.count = n;
    s.bias = sum / static_cast<double>(n);
    const double msq = sumsq / static_cast<double>(n);
    s.rmse = std::sqrt(msq);
    s.sd = std::sqrt(std::max(0.0, msq - s.bias * s.bias));
    return s;
}

ErrorStats rmse_sd(const std::vector<double>& truth, const std::vector<double>& estimated) {
    return rmse_sd(truth, estimated, std::vector<bool>(truth.size(), true));
}

double kld(const std::vector<double>& truth, const std::vector<double>& estimated, int bins) {
    if (truth.empty() || estimated.empty())
        throw DataError("kld: empty sample");
    if (bins < 1) throw DataError("kld: bins must be >= 1");
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (double v : truth) { lo = std::min(lo, v); hi = std::max(hi, v); }
    for (double v : estimated) { lo = std::min(lo, v); hi = std::max(hi, v); }
    if (!(hi > lo)) return 0.0;  // degenerate shared range

    std::vector<double> p(bins, kHistSmoothing), q(bins, kHistSmoothing);
    const double width = (hi - lo) / bins;
    auto bin_of = [&](double v) {
        int b = static_cast<int>((v - lo) / width);
        return std::clamp(b, 0, bins - 1);
    };
    for (double v : truth) p[bin_of(v)] += 1.0;
    for (double v : estimated) q[bin_of(v)] += 1.0;
    double psum = 0.0, qsum = 0.0;
    for (int b = 0; b < bins; ++b) { psum += p[b]; qsum += q[b]; }
    double out = 0.0;
    for (int b = 0; b < bins; ++b) {
        const double pb = p[b] / psum;
        const double qb = q[b] / qsum;
        out += pb * std::log(pb / qb);
    }
    return out;
}

ThresholdTestResult threshold_test(const std::vector<double>& abs_errors,
                                   double threshold_kelvin, double confidence) {
    if (abs_errors.empty()) throw DataError("threshold_test: no errors");
    if (threshold_kelvin <= 0.0) throw DataError("threshold_test: threshold must be > 0");
    const double n = static_cast<double>(abs_errors.size());
    std::size_t pass = 0;
    for (double e : abs_errors)
        if (std::abs(e) < threshold_kelvin) ++pass;
    ThresholdTestResult r;
    r.pass_fraction = static_cast<double>(pass) / n;
    const double p0 = 0.95;
    r.z_statistic = (r.pass_fraction - p0) / std::sqrt(p0 * (1.0 - p0) / n);
    r.reject_null = r.z_statistic > normal_quantile_one_sided(confidence);
    return r;
}

std::vector<ClassRow> stratify(const std::vector<double>& truth,
                               const std::vector<double>& estimated,
                               const std::vector<int>& landcover, int bins) {
    if (landcover.size() != truth.size())
        throw ShapeError("stratify: land-cover size mismatch");
    std::vector<ClassRow> rows;
    for (int cls = 0; cls < kNumLandCovers; ++cls) {
        ClassRow row;
        row.label = kClassNames[cls];
        std::vector<double> t, e;
        for (std::size_t i = 0; i < truth.size(); ++i)
            if (landcover[i] == cls) {
                t.push_back(truth[i]);
                e.push_back(estimated[i]);
            }
        if (t.empty()) {
            row.empty = true;
        } else {
            row.stats = rmse_sd(t, e);
            row.kld_nats = kld(t, e, bins);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<ClassRow> stratify_baresoil(const std::vector<double>& truth,
                                        const std::vector<double>& estimated,
                                        const std::vector<int>& landcover, int eval_cols,
                                        const SubpixelContext& sub, int bins) {
    const int s = sub.scale_factor;
    std::vector<std::vector<double>> t(3), e(3);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (landcover[i] != static_cast<int>(LandCover::Baresoil)) continue;
        int stratum;
        if (sub.day >= sub.harvest_day) {
            stratum = 1;  // B: after-harvest baresoil
        } else {
            const int er = static_cast<int>(i) / eval_cols;
            const int ec = static_cast<int>(i) % eval_cols;
            bool mixed = false;
            for (int dr = 0; dr < s && !mixed; ++dr)
                for (int dc = 0; dc < s; ++dc) {
                    const std::size_t fi =
                        static_cast<std::size_t>(er * s + dr) * sub.fine_cols + ec * s + dc;
                    if (sub.fine_labels[fi] != static_cast<int>(LandCover::Baresoil)) {
                        mixed = true;
                        break;
                    }
                }
            stratum = mixed ? 0 : 2;  // A: vegetated sub-pixels, C: pure
        }
        t[stratum].push_back(truth[i]);
        e[stratum].push_back(estimated[i]);
    }
    const char* labels[] = {"baresoil_A_mixed", "baresoil_B_after_harvest", "baresoil_C_pure"};
    std::vector<ClassRow> rows;
    for (int k = 0; k < 3; ++k) {
        ClassRow row;
        row.label = labels[k];
        if (t[k].empty()) {
            row.empty = true;
        } else {
            row.stats = rmse_sd(t[k], e[k]);
            row.kld_nats = kld(t[k], e[k], bins);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<bool> boundary_mask(const std::vector<int>& landcover, int rows, int cols) {
    std::vector<bool> mask(landcover.size(), false);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            const int self = landcover[static_cast<std::size_t>(r) * cols + c];
            bool mixed = false;
            for (int dr = -1; dr <= 1 && !mixed; ++dr)
                for (int dc = -1; dc <= 1; ++dc) {
                    const int rr = r + dr, cc = c + dc;
                    if (rr < 0 || rr >= rows || cc < 0 || cc >= cols) continue;
                    if (landcover[static_cast<std::size_t>(rr) * cols + cc] != self) {
                        mixed = true;
                        break;
                    }
                }
            mask[static_cast<std::size_t>(r) * cols + c] = mixed;
        }
    return mask;
}

EvalReport evaluate_season(const std::vector<int>& days,
                           const std::vector<std::vector<double>>& truths,
                           const std::vector<std::vector<double>>& estimates,
                           const std::vector<const std::vector<int>*>& landcovers,
                           double threshold_kelvin, double confidence, int bins) {
    if (days.empty()) throw DataError("evaluate_season: no days");
    EvalReport report;
    report.scatter.resize(kNumLandCovers);
    std::vector<double> all_t, all_e;
    std::vector<int> all_lc;
    for (std::size_t d = 0; d < days.size(); ++d) {
        DayReport day;
        day.day = days[d];
        day.global = rmse_sd(truths[d], estimates[d]);
        day.per_class = stratify(truths[d], estimates[d], *landcovers[d], bins);
        std::vector<double> abs_err(truths[d].size());
        for (std::size_t i = 0; i < truths[d].size(); ++i)
            abs_err[i] = std::abs(estimates[d][i] - truths[d][i]);
        day.threshold = threshold_test(abs_err, threshold_kelvin, confidence);
        report.days.push_back(std::move(day));

        for (std::size_t i = 0; i < truths[d].size(); ++i) {
            all_t.push_back(truths[d][i]);
            all_e.push_back(estimates[d][i]);
            all_lc.push_back((*landcovers[d])[i]);
            report.scatter[(*landcovers[d])[i]].emplace_back(truths[d][i], estimates[d][i]);
        }
    }
    report.season_global = rmse_sd(all_t, all_e);
    report.season_per_class = stratify(all_t, all_e, all_lc, bins);
    std::vector<double> abs_err(all_t.size());
    for (std::size_t i = 0; i < all_t.size(); ++i) abs_err[i] = std::abs(all_e[i] - all_t[i]);
    report.season_threshold = threshold_test(abs_err, threshold_kelvin, confidence);
    return report;
}

void emit_report(const EvalReport& report, const std::vector<std::vector<double>>& truths,
                 const std::vector<std::vector<double>>& estimates, int rows, int cols,
                 double threshold_kelvin, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    {
        std::ofstream f(fs::path(out_dir) / "season.csv");
        f << std::setprecision(std::numeric_limits<double>::max_digits10);
        f << "day,rmse,sd,bias,pass_fraction,z_statistic";
        for (const char* name : kClassNames)
            f << ',' << name << "_rmse," << name << "_sd," << name << "_kld";
        f << '\n';
        auto write_row = [&](const std::string& day, const ErrorStats& g,
                             const ThresholdTestResult& th, const std::vector<ClassRow>& cls) {
            f << day << ',' << g.rmse << ',' << g.sd << ',' << g.bias << ','
              << th.pass_fraction << ',' << th.z_statistic;
            for (const auto& row : cls) {
                if (row.empty)
                    f << ",,,";
                else
                    f << ',' << row.stats.rmse << ',' << row.stats.sd << ',' << row.kld_nats;
            }
            f << '\n';
        };
        for (const auto& day : report.days)
            write_row(std::to_string(day.day), day.global, day.threshold, day.per_class);
        write_row("season", report.season_global, report.season_threshold,
                  report.season_per_class);
    }

    for (int cls = 0; cls < kNumLandCovers; ++cls) {
        std::ofstream f(fs::path(out_dir) / ("scatter_" + std::string(kClassNames[cls]) + ".csv"));
        f << std::setprecision(std::numeric_limits<double>::max_digits10);
        f << "true,estimated,guide_low,guide_high\n";
        for (const auto& [t, e] : report.scatter[cls])
            f << t << ',' << e << ',' << t - threshold_kelvin << ',' << t + threshold_kelvin
              << '\n';
    }

    for (std::size_t d = 0; d < report.days.size(); ++d) {
        FineGrid g;
        g.rows = rows;
        g.cols = cols;
        std::vector<double> diff(truths[d].size());
        for (std::size_t i = 0; i < diff.size(); ++i)
            diff[i] = std::abs(estimates[d][i] - truths[d][i]);
        g.add_layer("ABS_DIFF", std::move(diff));
        write_grid(g, (fs::path(out_dir) /
                       ("absdiff_day_" + std::to_string(report.days[d].day) + ".grid"))
                          .string());
    }
}

}  // namespace srrm
