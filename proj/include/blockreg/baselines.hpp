#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "blockreg/corpus.hpp"
#include "blockreg/forecaster.hpp"
#include "blockreg/regressor.hpp"

namespace blockreg {

// ---------------------------------------------------------------------------
// Block linear regression on raw (undifferenced) traffic.

struct LrModel {
    double theta0 = 0.0;
    Eigen::VectorXd theta;
    NormalizationStats stats;
    std::size_t window_w = 72;

    std::size_t params() const noexcept { return window_w + 1; }
};

struct LrFit {
    LrModel model;
    TrainingDiagnostics diagnostics;
};

LrFit train_lr(const TrafficMatrix& t, std::size_t w, std::size_t train_hours, const CgOptions& opts = {});

/// mu_y + (theta0 + theta . xhat) * sigma_y over the last W hours of history.
double forecast_lr_one(const LrModel& model, std::span<const double> history);

ForecastSeries forecast_lr(const LrModel& model, const TrafficMatrix& t, std::string_view bs, std::int64_t start,
                           std::size_t k, ForecastMode mode);

// ---------------------------------------------------------------------------
// Per-BS seasonal ARIMA: seasonal difference at lag s, then ARMA(ar, ma)
// estimated by Hannan-Rissanen.

struct SaCoefficients {
    Eigen::VectorXd phi;
    Eigen::VectorXd psi;
    double intercept = 0.0;
    double noise_variance = 0.0;
};

struct SaModel {
    std::map<std::string, SaCoefficients> per_bs;
    std::size_t seasonality = 24;
    std::size_t ar_order = 2;
    std::size_t ma_order = 1;
    /// BSs whose fit failed; they have no entry in per_bs.
    std::vector<std::string> failed;

    /// (ar + ma + 2) per fitted BS: AR and MA weights, intercept, noise variance.
    std::size_t params() const noexcept { return (ar_order + ma_order + 2) * per_bs.size(); }
};

struct SaConfig {
    std::size_t ar = 2;
    std::size_t ma = 1;
    std::size_t seasonality = 24;
    std::size_t train_hours = 240;
};

/// ARMA(ar, ma) with intercept on an already differenced series. Stage one
/// fits a long autoregression of order min(ceil(1.5 sqrt(n)), n / 4) to get
/// residual proxies; stage two regresses the series on its own lags and the
/// lagged proxies. Non-invertible MA estimates are mapped to their invertible
/// equivalent by reflecting roots inside the unit circle.
SaCoefficients hannan_rissanen(std::span<const double> z, std::size_t ar, std::size_t ma);

/// Maps MA weights psi (polynomial 1 + psi_1 B + ... + psi_q B^q) to the
/// invertible polynomial with the same autocovariances.
Eigen::VectorXd make_invertible(const Eigen::VectorXd& psi);

SaModel train_sa(const TrafficMatrix& t, const SaConfig& cfg = {}, std::size_t threads = 1);

/// One-step ARMA prediction on the differenced scale, using residuals run
/// over the whole history, plus t(l - s).
double forecast_sa_one(const SaCoefficients& c, std::size_t seasonality, std::span<const double> history);

ForecastSeries forecast_sa(const SaModel& model, const TrafficMatrix& t, std::string_view bs, std::int64_t start,
                           std::size_t k, ForecastMode mode);

} // namespace blockreg
