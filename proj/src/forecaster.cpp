#include "blockreg/forecaster.hpp"

#include <string>

#include "blockreg/error.hpp"

namespace blockreg {

std::string_view to_string(ForecastMode mode) noexcept {
    return mode == ForecastMode::one_step ? "one_step" : "recursive";
}

ForecastMode parse_forecast_mode(std::string_view text) {
    if (text == "one_step") return ForecastMode::one_step;
    if (text == "recursive") return ForecastMode::recursive;
    throw Error(ErrorCode::ConfigError, "unknown forecast mode '" + std::string(text) + "'");
}

double forecast_one(const BlockModel& model, std::span<const double> history) {
    const std::size_t m = model.seasonality_m;
    const std::size_t w = model.window_w;
    const std::size_t n = history.size();
    if (n < m + w) {
        throw Error(ErrorCode::InsufficientHistory, "need " + std::to_string(m + w) + " hours of history, got " +
                                                        std::to_string(n));
    }
    if (static_cast<std::size_t>(model.theta.size()) != w || model.stats.width() != w) {
        throw Error(ErrorCode::DimensionMismatch, "model coefficients do not match its window");
    }

    double linear = model.theta0;
    for (std::size_t p = 0; p < w; ++p) {
        const std::size_t h = n - w + p;
        const double diff = history[h] - history[h - m];
        const auto pi = static_cast<Eigen::Index>(p);
        linear += model.theta[pi] * ((diff - model.stats.mu_x[pi]) / model.stats.sigma_x[pi]);
    }
    return model.stats.mu_y + linear * model.stats.sigma_y + history[n - m];
}

ForecastSeries forecast_horizon(const BlockModel& model, const TrafficMatrix& t, std::string_view bs,
                                std::int64_t start, std::size_t k, ForecastMode mode) {
    return run_horizon(t, bs, start, k, mode, model.seasonality_m + model.window_w,
                       [&model](std::span<const double> history) { return forecast_one(model, history); });
}

ForecastSeries run_horizon(const TrafficMatrix& t, std::string_view bs, std::int64_t start, std::size_t k,
                           ForecastMode mode, std::size_t min_history, const StepFunction& step) {
    const auto index = t.index_of(bs);
    if (!index) {
        throw Error(ErrorCode::UnknownBs, "unknown base station '" + std::string(bs) + "'");
    }
    if (k == 0) {
        throw Error(ErrorCode::InvalidConfig, "forecast horizon must be positive");
    }
    const std::int64_t first_col = start - t.start_hour;
    const auto n_hours = static_cast<std::int64_t>(t.n_hours());
    if (first_col < static_cast<std::int64_t>(min_history) || first_col > n_hours) {
        throw Error(ErrorCode::InsufficientHistory, "hour " + std::to_string(start) + " needs " +
                                                        std::to_string(min_history) +
                                                        " recorded hours before it");
    }
    const auto horizon = static_cast<std::int64_t>(k);
    if (mode == ForecastMode::one_step && first_col + horizon - 1 > n_hours) {
        throw Error(ErrorCode::InsufficientHistory, "one-step forecasting needs recorded traffic up to hour " +
                                                        std::to_string(start + horizon - 2));
    }

    const auto row = t.row(*index);
    std::vector<double> buffer(row.begin(), row.begin() + first_col);
    buffer.reserve(static_cast<std::size_t>(first_col + horizon));

    ForecastSeries out;
    out.bs_id = std::string(bs);
    out.mode = mode;
    out.hours.reserve(k);
    out.forecast.reserve(k);
    out.actual.reserve(k);
    for (std::int64_t step_index = 0; step_index < horizon; ++step_index) {
        const std::int64_t col = first_col + step_index;
        const double value = step(buffer);
        std::optional<double> actual;
        if (col < n_hours) {
            actual = row[static_cast<std::size_t>(col)];
        }
        out.hours.push_back(start + step_index);
        out.forecast.push_back(value);
        out.actual.push_back(actual);
        if (step_index + 1 < horizon) {
            buffer.push_back(mode == ForecastMode::one_step ? *actual : value);
        }
    }
    return out;
}

} // namespace blockreg
