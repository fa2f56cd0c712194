#pragma once

#include <cstddef>
#include <optional>

#include <Eigen/Dense>

#include "blockreg/corpus.hpp"
#include "blockreg/pipeline.hpp"

namespace blockreg {

/// Intercept plus one weight per window position, oldest lag first.
struct LinearCoefficients {
    double theta0 = 0.0;
    Eigen::VectorXd theta;

    std::size_t width() const noexcept { return static_cast<std::size_t>(theta.size()); }
};

/// The shared Block Regression model: coefficients in normalized space plus
/// everything needed to map raw history to a forecast.
struct BlockModel {
    double theta0 = 0.0;
    Eigen::VectorXd theta;
    NormalizationStats stats;
    std::size_t seasonality_m = 24;
    std::size_t window_w = 3;

    std::size_t params() const noexcept { return window_w + 1; }
    LinearCoefficients coefficients() const { return {theta0, theta}; }
};

struct CgOptions {
    double tol = 1e-8;
    /// Defaults to 10 * (W + 1).
    std::optional<std::size_t> max_iter;
};

struct TrainingDiagnostics {
    double final_cost = 0.0;
    std::size_t iterations = 0;
    Eigen::VectorXd residuals;
    bool converged = false;
    double gradient_norm = 0.0;
};

struct CgFit {
    LinearCoefficients coef;
    TrainingDiagnostics diagnostics;
};

/// Squared-error cost J = 1/(2 N_s) * sum_i (y_i - theta0 - x_i . theta)^2
/// over normalized features.
double cost(const LinearCoefficients& c, const FeatureSet& f);
double cost(const BlockModel& m, const FeatureSet& f);

/// Analytic gradient of cost(); entry 0 is d/dtheta0.
Eigen::VectorXd gradient(const LinearCoefficients& c, const FeatureSet& f);

/// y_i - theta0 - x_i . theta for every row.
Eigen::VectorXd residuals(const LinearCoefficients& c, const FeatureSet& f);

/// Linear conjugate gradient on the normal equations of cost(), started at
/// zero. Stops once the gradient norm is <= tol. When max_iter runs out the
/// best iterate is returned with converged = false.
CgFit train_cg(const FeatureSet& f, const CgOptions& opts = {});

/// Direct dense solve of the same normal equations. Throws SingularSystem
/// when the augmented design [1 | X] is numerically rank deficient.
LinearCoefficients train_normal_equations(const FeatureSet& f);

/// Window, normalize and train on the given series rows. Shared by the
/// block model (differenced series) and the raw-lag baseline.
struct WindowedFit {
    LinearCoefficients coef;
    NormalizationStats stats;
    TrainingDiagnostics diagnostics;
};
WindowedFit fit_windowed(const RowMatrix& series, std::size_t w, const CgOptions& opts = {});

struct BrConfig {
    std::size_t m = 24;
    std::size_t w = 3;
    std::size_t train_hours = 240;
    CgOptions cg;
};

struct BlockFit {
    BlockModel model;
    TrainingDiagnostics diagnostics;
};

/// Full training path on the first train_hours columns of t: seasonal
/// difference, windows, normalization, conjugate gradient.
BlockFit fit_block_model(const TrafficMatrix& t, const BrConfig& cfg = {});

} // namespace blockreg
