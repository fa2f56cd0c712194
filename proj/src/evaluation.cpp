#include "blockreg/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "blockreg/error.hpp"
#include "blockreg/parallel.hpp"

namespace blockreg {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

} // namespace

std::string_view to_string(ModelKind kind) noexcept {
    switch (kind) {
    case ModelKind::br: return "br";
    case ModelKind::lr: return "lr";
    case ModelKind::sa: return "sa";
    }
    return "br";
}

ModelKind parse_model_kind(std::string_view text) {
    if (text == "br") return ModelKind::br;
    if (text == "lr") return ModelKind::lr;
    if (text == "sa") return ModelKind::sa;
    throw Error(ErrorCode::ConfigError, "unknown model kind '" + std::string(text) + "'");
}

ModelKind kind_of(const AnyModel& model) noexcept {
    return static_cast<ModelKind>(model.index());
}

std::size_t param_count(const AnyModel& model) noexcept {
    return std::visit([](const auto& m) { return m.params(); }, model);
}

ExperimentConfig default_experiment(ModelKind kind) {
    ExperimentConfig cfg;
    cfg.kind = kind;
    cfg.w = kind == ModelKind::lr ? 72 : 3;
    return cfg;
}

TrainedModel train_model(const TrafficMatrix& t, const ExperimentConfig& cfg, std::size_t threads,
                         const CgOptions& cg) {
    switch (cfg.kind) {
    case ModelKind::br: {
        BrConfig br{cfg.m, cfg.w, cfg.split.train_hours, cg};
        auto fit = fit_block_model(t, br);
        return {std::move(fit.model), std::move(fit.diagnostics)};
    }
    case ModelKind::lr: {
        auto fit = train_lr(t, cfg.w, cfg.split.train_hours, cg);
        return {std::move(fit.model), std::move(fit.diagnostics)};
    }
    case ModelKind::sa: {
        SaConfig sa{cfg.ar, cfg.ma, cfg.m, cfg.split.train_hours};
        return {train_sa(t, sa, threads), std::nullopt};
    }
    }
    throw Error(ErrorCode::ConfigError, "unknown model kind");
}

ForecastSeries forecast(const AnyModel& model, const TrafficMatrix& t, std::string_view bs, std::int64_t start,
                        std::size_t k, ForecastMode mode) {
    return std::visit(overloaded{
                          [&](const BlockModel& m) { return forecast_horizon(m, t, bs, start, k, mode); },
                          [&](const LrModel& m) { return forecast_lr(m, t, bs, start, k, mode); },
                          [&](const SaModel& m) { return forecast_sa(m, t, bs, start, k, mode); },
                      },
                      model);
}

double nrmse(std::span<const double> actual, std::span<const double> forecast) {
    if (actual.size() != forecast.size() || actual.empty()) {
        throw Error(ErrorCode::LengthMismatch, "nrmse needs equal nonzero lengths, got " +
                                                   std::to_string(actual.size()) + " and " +
                                                   std::to_string(forecast.size()));
    }
    const auto k = static_cast<double>(actual.size());
    double sum = 0.0;
    double sq = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        sum += actual[i];
        const double d = actual[i] - forecast[i];
        sq += d * d;
    }
    const double mean = sum / k;
    if (mean == 0.0) {
        throw Error(ErrorCode::ZeroMeanActual, "actual traffic has zero mean");
    }
    return std::sqrt(sq / k) / mean;
}

std::vector<HistogramBin> make_histogram(std::span<const double> values, double width) {
    constexpr double kOpenFrom = 1.0;
    const auto closed_bins = static_cast<std::size_t>(std::llround(kOpenFrom / width));

    double max_closed = 0.0;
    std::size_t open_count = 0;
    for (const double v : values) {
        if (v > kOpenFrom) {
            ++open_count;
        } else {
            max_closed = std::max(max_closed, v);
        }
    }
    if (open_count > 0) {
        max_closed = kOpenFrom;
    }
    // Bin b covers [b * width, (b + 1) * width); the last closed bin also
    // takes its upper edge.
    auto bin_of = [&](double v) {
        const auto b = static_cast<std::size_t>(std::floor(v / width));
        return std::min(b, closed_bins - 1);
    };
    const std::size_t used = std::max<std::size_t>(1, bin_of(max_closed) + 1);

    std::vector<HistogramBin> bins(used);
    for (std::size_t b = 0; b < used; ++b) {
        bins[b].lower = static_cast<double>(b) * width;
        bins[b].upper = static_cast<double>(b + 1) * width;
    }
    for (const double v : values) {
        if (v <= kOpenFrom) {
            ++bins[bin_of(v)].count;
        }
    }
    if (open_count > 0) {
        bins.push_back({kOpenFrom, std::nullopt, open_count});
    }
    return bins;
}

EvalReport evaluate(const AnyModel& model, const TrafficMatrix& t, const Split& split, ForecastMode mode,
                    std::size_t threads) {
    if (split.test_hours == 0 || split.train_hours + split.test_hours > t.n_hours()) {
        throw Error(ErrorCode::InsufficientHistory, "split " + std::to_string(split.train_hours) + "/" +
                                                        std::to_string(split.test_hours) +
                                                        " does not fit a corpus of " +
                                                        std::to_string(t.n_hours()) + " hours");
    }

    const std::int64_t start = t.start_hour + static_cast<std::int64_t>(split.train_hours);
    std::vector<std::optional<double>> scores(t.n_bs());
    parallel_for(t.n_bs(), threads, [&](std::size_t i) {
        const auto& id = t.bs_ids[i];
        if (const auto* sa = std::get_if<SaModel>(&model); sa && !sa->per_bs.contains(id)) {
            return;
        }
        const auto series = forecast(model, t, id, start, split.test_hours, mode);
        std::vector<double> actual;
        actual.reserve(series.actual.size());
        for (const auto& a : series.actual) {
            actual.push_back(*a);
        }
        try {
            scores[i] = nrmse(actual, series.forecast);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::ZeroMeanActual) {
                throw;
            }
        }
    });

    EvalReport report;
    for (std::size_t i = 0; i < t.n_bs(); ++i) {
        if (scores[i]) {
            report.per_bs.emplace(t.bs_ids[i], *scores[i]);
        } else {
            report.excluded.push_back(t.bs_ids[i]);
        }
    }
    std::sort(report.excluded.begin(), report.excluded.end());
    if (report.per_bs.empty()) {
        throw Error(ErrorCode::EmptyCorpus, "no base station could be scored");
    }

    std::vector<double> values;
    values.reserve(report.per_bs.size());
    double sum = 0.0;
    for (const auto& [id, v] : report.per_bs) {
        values.push_back(v);
        sum += v;
    }
    report.average = sum / static_cast<double>(values.size());
    report.histogram = make_histogram(values);

    report.config.kind = kind_of(model);
    report.config.split = split;
    report.config.mode = mode;
    std::visit(overloaded{
                   [&](const BlockModel& m) {
                       report.config.m = m.seasonality_m;
                       report.config.w = m.window_w;
                   },
                   [&](const LrModel& m) {
                       report.config.m = 0;
                       report.config.w = m.window_w;
                   },
                   [&](const SaModel& m) {
                       report.config.m = m.seasonality;
                       report.config.w = 0;
                       report.config.ar = m.ar_order;
                       report.config.ma = m.ma_order;
                   },
               },
               model);
    return report;
}

SweepResult sweep_seasonality(const TrafficMatrix& t, std::vector<std::size_t> seasonalities, std::size_t w,
                              const Split& split, ForecastMode mode, std::size_t threads, const CgOptions& cg) {
    std::sort(seasonalities.begin(), seasonalities.end());
    seasonalities.erase(std::unique(seasonalities.begin(), seasonalities.end()), seasonalities.end());

    SweepResult result;
    for (const std::size_t m : seasonalities) {
        SweepPoint point;
        point.seasonality_m = m;
        try {
            const auto fit = fit_block_model(t, BrConfig{m, w, split.train_hours, cg});
            point.average_nrmse = evaluate(fit.model, t, split, mode, threads).average;
        } catch (const Error& e) {
            point.error = e.what();
        }
        result.points.push_back(std::move(point));
    }
    return result;
}

} // namespace blockreg
