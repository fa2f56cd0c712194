#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "blockreg/corpus.hpp"
#include "blockreg/regressor.hpp"

namespace blockreg {

/// one_step feeds recorded actuals back as history; recursive feeds the
/// model's own forecasts once the horizon starts.
enum class ForecastMode { one_step, recursive };

std::string_view to_string(ForecastMode mode) noexcept;
ForecastMode parse_forecast_mode(std::string_view text);

struct ForecastSeries {
    std::string bs_id;
    std::vector<std::int64_t> hours;
    std::vector<double> forecast;
    std::vector<std::optional<double>> actual;
    ForecastMode mode = ForecastMode::one_step;
};

/// Forecast for the hour right after `history` (which ends at hour l - 1):
/// mu_y + (theta0 + sum_p theta_p * xhat_p) * sigma_y + t(l - M).
/// Needs at least M + W hours of history.
double forecast_one(const BlockModel& model, std::span<const double> history);

ForecastSeries forecast_horizon(const BlockModel& model, const TrafficMatrix& t, std::string_view bs,
                                std::int64_t start, std::size_t k, ForecastMode mode);

/// Maps the history preceding hour l to the forecast for l.
using StepFunction = std::function<double(std::span<const double>)>;

/// Horizon driver shared by every model. `start` is an absolute hour; the
/// corpus must hold at least `min_history` hours before it. In one_step mode
/// every hour of the horizon except the last must be recorded.
ForecastSeries run_horizon(const TrafficMatrix& t, std::string_view bs, std::int64_t start, std::size_t k,
                           ForecastMode mode, std::size_t min_history, const StepFunction& step);

} // namespace blockreg
