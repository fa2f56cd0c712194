#include "blockreg/pipeline.hpp"

#include <cmath>
#include <string>

#include "blockreg/error.hpp"

namespace blockreg {

namespace {

void check_dims(const FeatureSet& f, const NormalizationStats& s) {
    const auto w = static_cast<std::size_t>(f.x.cols());
    if (s.width() != w || static_cast<std::size_t>(s.sigma_x.size()) != w) {
        throw Error(ErrorCode::DimensionMismatch, "feature width " + std::to_string(w) +
                                                      " does not match statistics width " +
                                                      std::to_string(s.width()));
    }
}

double sample_std(const Eigen::Ref<const Eigen::VectorXd>& v, double mean) {
    double ss = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double d = v[i] - mean;
        ss += d * d;
    }
    const double sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
    return sd == 0.0 ? 1.0 : sd;
}

} // namespace

NormalizationStats NormalizationStats::identity(std::size_t w) {
    NormalizationStats s;
    s.mu_x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(w));
    s.sigma_x = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(w));
    s.mu_y = 0.0;
    s.sigma_y = 1.0;
    return s;
}

DifferencedMatrix seasonal_difference(const TrafficMatrix& t, std::size_t m) {
    const std::size_t l = t.n_hours();
    if (m < 1 || m >= l) {
        throw Error(ErrorCode::SeasonalityTooLarge,
                    "seasonality " + std::to_string(m) + " requires 1 <= m < L = " + std::to_string(l));
    }
    const auto cols = static_cast<Eigen::Index>(l - m);
    DifferencedMatrix d;
    d.seasonality_m = m;
    d.values = t.values.rightCols(cols) - t.values.leftCols(cols);
    d.origin = t;
    return d;
}

FeatureSet slide_windows(const RowMatrix& series, std::size_t w, std::size_t col_offset) {
    const auto cols = static_cast<std::size_t>(series.cols());
    if (w < 1 || w >= cols) {
        throw Error(ErrorCode::WindowTooLarge,
                    "window " + std::to_string(w) + " requires 1 <= w < " + std::to_string(cols));
    }
    const std::size_t per_bs = cols - w;
    const auto n = static_cast<std::size_t>(series.rows());
    const auto total = static_cast<Eigen::Index>(per_bs * n);

    FeatureSet f;
    f.window_w = w;
    f.x.resize(total, static_cast<Eigen::Index>(w));
    f.y.resize(total);
    f.provenance.reserve(per_bs * n);

    Eigen::Index r = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = series.row(static_cast<Eigen::Index>(i));
        for (std::size_t c = w; c < cols; ++c, ++r) {
            f.x.row(r) = row.segment(static_cast<Eigen::Index>(c - w), static_cast<Eigen::Index>(w));
            f.y[r] = row[static_cast<Eigen::Index>(c)];
            f.provenance.push_back({i, c + col_offset});
        }
    }
    return f;
}

FeatureSet slide_windows(const DifferencedMatrix& d, std::size_t w) {
    const auto cols = static_cast<std::size_t>(d.values.cols());
    if (w < 1 || w >= cols) {
        throw Error(ErrorCode::WindowTooLarge,
                    "window " + std::to_string(w) + " requires 1 <= w < L - M = " + std::to_string(cols));
    }
    return slide_windows(d.values, w, d.seasonality_m);
}

NormalizationStats fit_normalization(const FeatureSet& f) {
    const auto n = f.n_samples();
    if (n < 2) {
        throw Error(ErrorCode::InsufficientSamples,
                    "normalization needs at least 2 samples, got " + std::to_string(n));
    }
    const auto w = f.x.cols();
    NormalizationStats s;
    s.mu_x.resize(w);
    s.sigma_x.resize(w);
    for (Eigen::Index j = 0; j < w; ++j) {
        const Eigen::VectorXd col = f.x.col(j);
        s.mu_x[j] = col.mean();
        s.sigma_x[j] = sample_std(col, s.mu_x[j]);
    }
    s.mu_y = f.y.mean();
    s.sigma_y = sample_std(f.y, s.mu_y);
    return s;
}

FeatureSet apply_normalization(const FeatureSet& f, const NormalizationStats& s) {
    check_dims(f, s);
    FeatureSet out = f;
    for (Eigen::Index j = 0; j < f.x.cols(); ++j) {
        out.x.col(j) = (f.x.col(j).array() - s.mu_x[j]) / s.sigma_x[j];
    }
    out.y = (f.y.array() - s.mu_y) / s.sigma_y;
    return out;
}

FeatureSet denormalize(const FeatureSet& f, const NormalizationStats& s) {
    check_dims(f, s);
    FeatureSet out = f;
    for (Eigen::Index j = 0; j < f.x.cols(); ++j) {
        out.x.col(j) = f.x.col(j).array() * s.sigma_x[j] + s.mu_x[j];
    }
    out.y = f.y.array() * s.sigma_y + s.mu_y;
    return out;
}

} // namespace blockreg
