#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "blockreg/corpus.hpp"
#include "blockreg/error.hpp"
#include "blockreg/evaluation.hpp"

namespace blockreg {

enum class Command { synth, clean, train, forecast, eval, sweep };

std::string_view to_string(Command c) noexcept;

struct RunConfig {
    Command command = Command::eval;
    ModelKind kind = ModelKind::br;
    std::size_t m = 24;
    /// Unset means the kind's default window (3 for br, 72 for lr).
    std::optional<std::size_t> w;
    std::size_t ar = 2;
    std::size_t ma = 1;
    Split split;
    ForecastMode mode = ForecastMode::one_step;
    std::uint64_t seed = 1;
    std::size_t threads = 1;
    std::vector<std::size_t> grid{24, 48, 72, 96, 120, 144, 168};
    std::filesystem::path input;
    std::filesystem::path output;
    std::filesystem::path model;
    /// Generator settings for `synth`; its seed is replaced by `seed`.
    SynthConfig synth;

    std::size_t window() const noexcept { return w.value_or(kind == ModelKind::lr ? 72 : 3); }
    ExperimentConfig experiment() const;
};

/// Overlays the keys present in a JSON config object onto `cfg`. Keys are the
/// long flag names with '-' replaced by '_', plus a `synth` object holding
/// generator fields. Unknown keys are rejected.
void apply_config_json(RunConfig& cfg, const nlohmann::json& j);

/// Executes one command. Writes artifacts atomically and a one-line summary
/// to `out`. Throws Error on failure.
void run(const RunConfig& cfg, std::ostream& out);

int exit_code(ErrorCategory category) noexcept;

/// Parses argv (program name first), runs, and maps failures to exit codes:
/// 2 for configuration errors, 3 for data errors, 4 for numerical errors. The
/// error is reported as one JSON line on `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace blockreg
