#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "blockreg/baselines.hpp"
#include "blockreg/corpus.hpp"
#include "blockreg/forecaster.hpp"
#include "blockreg/regressor.hpp"

namespace blockreg {

enum class ModelKind { br, lr, sa };

std::string_view to_string(ModelKind kind) noexcept;
ModelKind parse_model_kind(std::string_view text);

using AnyModel = std::variant<BlockModel, LrModel, SaModel>;

ModelKind kind_of(const AnyModel& model) noexcept;
std::size_t param_count(const AnyModel& model) noexcept;

/// Train on hours [0, train_hours), test on the following test_hours.
struct Split {
    std::size_t train_hours = 240;
    std::size_t test_hours = 96;

    bool operator==(const Split&) const = default;
};

struct ExperimentConfig {
    ModelKind kind = ModelKind::br;
    std::size_t m = 24;
    std::size_t w = 3;
    std::size_t ar = 2;
    std::size_t ma = 1;
    Split split;
    ForecastMode mode = ForecastMode::one_step;
    std::optional<std::uint64_t> seed;
};

/// Fills the window default for the kind: 3 for br, 72 for lr.
ExperimentConfig default_experiment(ModelKind kind);

struct TrainedModel {
    AnyModel model;
    /// Present for the conjugate-gradient models (br, lr).
    std::optional<TrainingDiagnostics> diagnostics;
};

TrainedModel train_model(const TrafficMatrix& t, const ExperimentConfig& cfg, std::size_t threads = 1,
                         const CgOptions& cg = {});

ForecastSeries forecast(const AnyModel& model, const TrafficMatrix& t, std::string_view bs, std::int64_t start,
                        std::size_t k, ForecastMode mode);

/// Root mean square error over mean(actual).
double nrmse(std::span<const double> actual, std::span<const double> forecast);

struct HistogramBin {
    double lower = 0.0;
    /// Empty for the terminal open bin (values above 1).
    std::optional<double> upper;
    std::size_t count = 0;
};

/// Bins of `width` from 0 up to min(max, 1); values above 1 go to a terminal
/// open bin that is present only when it is non-empty.
std::vector<HistogramBin> make_histogram(std::span<const double> values, double width = 0.1);

struct EvalReport {
    std::map<std::string, double> per_bs;
    double average = 0.0;
    std::vector<HistogramBin> histogram;
    /// BSs without a score: zero-mean test period or no fitted model.
    std::vector<std::string> excluded;
    ExperimentConfig config;

    std::size_t excluded_count() const noexcept { return excluded.size(); }
};

/// Forecasts every BS over the test hours of the split and scores it.
EvalReport evaluate(const AnyModel& model, const TrafficMatrix& t, const Split& split, ForecastMode mode,
                    std::size_t threads = 1);

struct SweepPoint {
    std::size_t seasonality_m = 0;
    std::optional<double> average_nrmse;
    /// Set when this seasonality could not be trained or evaluated.
    std::string error;
};

struct SweepResult {
    std::vector<SweepPoint> points;
};

/// One block model per seasonality (sorted, duplicates dropped).
SweepResult sweep_seasonality(const TrafficMatrix& t, std::vector<std::size_t> seasonalities, std::size_t w,
                              const Split& split, ForecastMode mode, std::size_t threads = 1,
                              const CgOptions& cg = {});

} // namespace blockreg
