#include "blockreg/error.hpp"

namespace blockreg {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InconsistentHours: return "InconsistentHours";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::InvalidCorpus: return "InvalidCorpus";
    case ErrorCode::SeasonalityTooLarge: return "SeasonalityTooLarge";
    case ErrorCode::WindowTooLarge: return "WindowTooLarge";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::Underdetermined: return "Underdetermined";
    case ErrorCode::InsufficientHistory: return "InsufficientHistory";
    case ErrorCode::UnknownBs: return "UnknownBs";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ZeroMeanActual: return "ZeroMeanActual";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::NotConverged: return "NotConverged";
    }
    return "Unknown";
}

std::string_view to_string(ErrorCategory category) noexcept {
    switch (category) {
    case ErrorCategory::Config: return "ConfigError";
    case ErrorCategory::Data: return "DataError";
    case ErrorCategory::Numerical: return "NumericalError";
    }
    return "Unknown";
}

ErrorCategory category_of(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::InvalidConfig:
        return ErrorCategory::Config;
    case ErrorCode::SingularSystem:
    case ErrorCode::NotConverged:
        return ErrorCategory::Numerical;
    default:
        return ErrorCategory::Data;
    }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

} // namespace blockreg
