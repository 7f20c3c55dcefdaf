#include "srrm/regression.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

#include "srrm/clustering.hpp"

namespace srrm {

Eigen::MatrixXd augment(const Eigen::MatrixXd& features) {
    Eigen::MatrixXd out(features.rows(), features.cols() + 1);
    out.leftCols(features.cols()) = features;
    out.col(features.cols()).setOnes();
    return out;
}

namespace {

double gauss_kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double sigma) {
    return std::exp(-(a - b).squaredNorm() / (2.0 * sigma * sigma));
}

Eigen::MatrixXd standardize(const KernelModel& model, const Eigen::MatrixXd& raw) {
    Eigen::MatrixXd out = raw;
    for (Eigen::Index c = 0; c < out.cols(); ++c)
        out.col(c) = (out.col(c).array() - model.feature_mean(c)) / model.feature_scale(c);
    return out;
}

}  // namespace

KernelModel fit(const TrainingSet& train, double sigma_r, double mu_r) {
    const Eigen::Index m = train.features.rows();
    if (m < 1) throw DataError("fit: empty training set");
    if (mu_r < 0.0) throw DataError("fit: ridge weight must be >= 0");
    if (!train.features.allFinite() || !train.targets.allFinite())
        throw DataError("fit: non-finite training data");
    if (train.targets.size() != m)
        throw ShapeError("fit: feature/target count mismatch");

    KernelModel model;
    model.ridge_weight = mu_r;
    model.feature_mean.resize(train.features.cols());
    model.feature_scale.resize(train.features.cols());
    for (Eigen::Index c = 0; c < train.features.cols(); ++c) {
        const double mean = train.features.col(c).mean();
        const double var =
            (train.features.col(c).array() - mean).square().sum() / static_cast<double>(m);
        const double sd = std::sqrt(var);
        model.feature_mean(c) = sd > 0.0 ? mean : 0.0;
        model.feature_scale(c) = sd > 0.0 ? sd : 1.0;  // constant features pass through
    }
    model.target_mean = train.targets.mean();
    {
        const double var =
            (train.targets.array() - model.target_mean).square().sum() / static_cast<double>(m);
        const double sd = std::sqrt(var);
        model.target_scale = sd > 0.0 ? sd : 1.0;
    }

    model.train_x = augment(standardize(model, train.features));
    model.kernel_width =
        sigma_r > 0.0 ? sigma_r : median_pairwise_distance(model.train_x);

    Eigen::MatrixXd gram(m, m);
    for (Eigen::Index a = 0; a < m; ++a) {
        gram(a, a) = 1.0;
        for (Eigen::Index b = a + 1; b < m; ++b) {
            const double v =
                gauss_kernel(model.train_x.row(a), model.train_x.row(b), model.kernel_width);
            gram(a, b) = v;
            gram(b, a) = v;
        }
    }
    gram.diagonal().array() += mu_r;

    const Eigen::VectorXd y =
        (train.targets.array() - model.target_mean) / model.target_scale;

    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success) {
        if (mu_r == 0.0)
            throw IllConditionedError(
                "fit: singular kernel system with mu_r = 0; use mu_r > 0");
        throw IllConditionedError("fit: kernel system not positive definite");
    }
    model.dual_coefficients = llt.solve(y);
    return model;
}

double predict(const KernelModel& model, const Eigen::VectorXd& x) {
    if (x.size() != model.dim())
        throw DataError("predict: feature dimension mismatch");
    Eigen::VectorXd z(model.dim() + 1);
    for (Eigen::Index c = 0; c < model.dim(); ++c)
        z(c) = (x(c) - model.feature_mean(c)) / model.feature_scale(c);
    z(model.dim()) = 1.0;
    double acc = 0.0;
    for (Eigen::Index a = 0; a < model.train_x.rows(); ++a)
        acc += model.dual_coefficients(a) *
               gauss_kernel(model.train_x.row(a), z, model.kernel_width);
    return acc * model.target_scale + model.target_mean;
}

Eigen::VectorXd predict_many(const KernelModel& model, const Eigen::MatrixXd& x) {
    Eigen::VectorXd out(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) out(i) = predict(model, x.row(i));
    return out;
}

Ensemble fit_ensemble(const TrainingSet& train, const std::vector<int>& labels, int k,
                      double sigma_r, double mu_r) {
    if (labels.size() != static_cast<std::size_t>(train.features.rows()))
        throw ShapeError("fit_ensemble: label/feature count mismatch");
    Ensemble ensemble;
    ensemble.models.resize(k);
    bool any = false;
    for (int c = 0; c < k; ++c) {
        std::vector<int> rows;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == c) rows.push_back(static_cast<int>(i));
        if (rows.empty()) continue;  // vacant cluster
        TrainingSet sub;
        sub.features.resize(rows.size(), train.features.cols());
        sub.targets.resize(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            sub.features.row(i) = train.features.row(rows[i]);
            sub.targets(i) = train.targets(rows[i]);
            if (!train.pixel_indices.empty())
                sub.pixel_indices.push_back(train.pixel_indices[rows[i]]);
        }
        ensemble.models[c] = fit(sub, sigma_r, mu_r);
        any = true;
    }
    if (!any) throw DataError("fit_ensemble: every cluster is vacant");
    return ensemble;
}

double fuse(const Eigen::VectorXd& memberships, const Eigen::VectorXd& predictions,
            const std::vector<bool>& vacancy) {
    if (memberships.size() != predictions.size() ||
        vacancy.size() != static_cast<std::size_t>(memberships.size()))
        throw ShapeError("fuse: size mismatch");
    double weight = 0.0, acc = 0.0;
    for (Eigen::Index k = 0; k < memberships.size(); ++k) {
        if (vacancy[k]) continue;
        weight += memberships(k);
        acc += memberships(k) * predictions(k);
    }
    if (weight <= 0.0) {
        // No soft mass on any trained cluster: fall back to the plain
        // mean over non-vacant predictions.
        int live = 0;
        acc = 0.0;
        for (Eigen::Index k = 0; k < memberships.size(); ++k)
            if (!vacancy[k]) {
                acc += predictions(k);
                ++live;
            }
        if (live == 0) throw DataError("fuse: all clusters vacant");
        return acc / live;
    }
    return acc / weight;
}

void write_ensemble(const Ensemble& ensemble, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw DataError("cannot open for writing: " + path);
    f << std::setprecision(std::numeric_limits<double>::max_digits10);
    f << ensemble.size() << '\n';
    for (int c = 0; c < ensemble.size(); ++c) {
        if (ensemble.vacant(c)) {
            f << "vacant\n";
            continue;
        }
        const auto& mdl = *ensemble.models[c];
        f << "model " << mdl.train_x.rows() << ' ' << mdl.train_x.cols() << '\n';
        f << mdl.kernel_width << ' ' << mdl.ridge_weight << ' ' << mdl.target_mean << ' '
          << mdl.target_scale << '\n';
        for (Eigen::Index i = 0; i < mdl.feature_mean.size(); ++i)
            f << (i ? " " : "") << mdl.feature_mean(i);
        f << '\n';
        for (Eigen::Index i = 0; i < mdl.feature_scale.size(); ++i)
            f << (i ? " " : "") << mdl.feature_scale(i);
        f << '\n';
        for (Eigen::Index i = 0; i < mdl.train_x.rows(); ++i) {
            for (Eigen::Index j = 0; j < mdl.train_x.cols(); ++j)
                f << (j ? " " : "") << mdl.train_x(i, j);
            f << '\n';
        }
        for (Eigen::Index i = 0; i < mdl.dual_coefficients.size(); ++i)
            f << (i ? " " : "") << mdl.dual_coefficients(i);
        f << '\n';
    }
}

Ensemble read_ensemble(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open: " + path);
    int k = 0;
    if (!(f >> k) || k <= 0) throw ParseError(path + ": malformed ensemble header");
    Ensemble ensemble;
    ensemble.models.resize(k);
    for (int c = 0; c < k; ++c) {
        std::string tag;
        if (!(f >> tag)) throw ParseError(path + ": truncated ensemble");
        if (tag == "vacant") continue;
        if (tag != "model") throw ParseError(path + ": unexpected token " + tag);
        Eigen::Index rows = 0, cols = 0;
        if (!(f >> rows >> cols) || rows <= 0 || cols <= 1)
            throw ParseError(path + ": malformed model header");
        KernelModel mdl;
        if (!(f >> mdl.kernel_width >> mdl.ridge_weight >> mdl.target_mean >> mdl.target_scale))
            throw ParseError(path + ": malformed model parameters");
        mdl.feature_mean.resize(cols - 1);
        mdl.feature_scale.resize(cols - 1);
        for (Eigen::Index i = 0; i < cols - 1; ++i) f >> mdl.feature_mean(i);
        for (Eigen::Index i = 0; i < cols - 1; ++i) f >> mdl.feature_scale(i);
        mdl.train_x.resize(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j) f >> mdl.train_x(i, j);
        mdl.dual_coefficients.resize(rows);
        for (Eigen::Index i = 0; i < rows; ++i) f >> mdl.dual_coefficients(i);
        if (!f) throw ParseError(path + ": truncated model block");
        ensemble.models[c] = std::move(mdl);
    }
    return ensemble;
}

}  // namespace srrm
