#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace blockreg {

enum class ErrorCode {
    // configuration
    ConfigError,
    InvalidConfig,
    // data
    IoError,
    ParseError,
    InconsistentHours,
    EmptyCorpus,
    InvalidCorpus,
    SeasonalityTooLarge,
    WindowTooLarge,
    InsufficientSamples,
    DimensionMismatch,
    Underdetermined,
    InsufficientHistory,
    UnknownBs,
    LengthMismatch,
    ZeroMeanActual,
    // numerical
    SingularSystem,
    NotConverged,
};

enum class ErrorCategory { Config, Data, Numerical };

std::string_view to_string(ErrorCode code) noexcept;
std::string_view to_string(ErrorCategory category) noexcept;
ErrorCategory category_of(ErrorCode code) noexcept;

/// Single exception type for the library; the code carries the failure kind.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }
    ErrorCategory category() const noexcept { return category_of(code_); }

private:
    ErrorCode code_;
};

} // namespace blockreg
