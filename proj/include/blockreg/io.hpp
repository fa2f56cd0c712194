#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

#include <json.hpp>

#include "blockreg/corpus.hpp"
#include "blockreg/evaluation.hpp"
#include "blockreg/forecaster.hpp"

namespace blockreg {

inline constexpr int kModelFormatVersion = 1;

/// Writes to a sibling temp file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

nlohmann::json to_json(const SynthConfig& cfg);
/// Exactly the SynthConfig field names; missing fields keep their defaults,
/// unknown fields are rejected.
SynthConfig synth_config_from_json(const nlohmann::json& j);

// Model files: `theta0`, `theta`, `mu_x`, `sigma_x`, `mu_y`, `sigma_y`, `m`,
// `w`, `format_version`, plus `kind` and `params`. Seasonal ARIMA files carry
// a per-BS coefficient map instead of the regression fields.
nlohmann::json model_to_json(const AnyModel& model);
AnyModel model_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ExperimentConfig& cfg);
nlohmann::json to_json(const EvalReport& report);
nlohmann::json to_json(const SweepResult& sweep);

std::string report_to_csv(const EvalReport& report);
std::string sweep_to_csv(const SweepResult& sweep);
/// `bs_id,hour,actual,forecast,mode`; actual empty when unknown.
std::string forecasts_to_csv(std::span<const ForecastSeries> series);

} // namespace blockreg
