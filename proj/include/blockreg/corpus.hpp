#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace blockreg {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// N x L hourly traffic, one row per base station. Row i belongs to bs_ids[i]
/// and column j to hour start_hour + j. Entries are finite and nonnegative.
struct TrafficMatrix {
    std::vector<std::string> bs_ids;
    RowMatrix values;
    std::int64_t start_hour = 0;

    std::size_t n_bs() const noexcept { return bs_ids.size(); }
    std::size_t n_hours() const noexcept { return static_cast<std::size_t>(values.cols()); }

    std::span<const double> row(std::size_t i) const {
        return {values.data() + i * n_hours(), n_hours()};
    }

    std::optional<std::size_t> index_of(std::string_view bs_id) const;
};

/// Throws Error(InvalidCorpus) when any TrafficMatrix invariant is violated.
void validate(const TrafficMatrix& t);

/// Traffic as loaded from disk, before cleaning. A cell is empty when the
/// (bs, hour) record is absent or marked NA.
struct RawTrafficMatrix {
    std::vector<std::string> bs_ids;
    std::int64_t start_hour = 0;
    std::size_t n_hours = 0;
    std::vector<std::optional<double>> cells; // row-major, n_bs * n_hours

    std::size_t n_bs() const noexcept { return bs_ids.size(); }
    const std::optional<double>& at(std::size_t i, std::size_t j) const { return cells[i * n_hours + j]; }
    std::optional<double>& at(std::size_t i, std::size_t j) { return cells[i * n_hours + j]; }
};

RawTrafficMatrix to_raw(const TrafficMatrix& t);

struct SynthConfig {
    std::size_t n_bs = 200;
    std::size_t n_hours = 336;
    std::uint64_t seed = 1;
    double daily_profile_amplitude = 3.0;
    double day_intensity_std = 0.15;
    double noise_std = 0.2;
    double burst_probability = 0.02;

    bool operator==(const SynthConfig&) const = default;
};

// CSV schema: header `bs_id,hour,volume`, volume is a decimal or `NA`.
RawTrafficMatrix read_corpus(std::istream& in);
RawTrafficMatrix load_corpus(const std::filesystem::path& path);

/// Rows sorted by (bs_id, hour); volumes in shortest round-trip form.
void write_corpus(std::ostream& out, const TrafficMatrix& t);
void save_corpus(const std::filesystem::path& path, const TrafficMatrix& t);

/// Drops every base station with a missing, negative or non-finite entry.
TrafficMatrix clean(const RawTrafficMatrix& raw);

/// Deterministic synthetic corpus: per-BS scale x daily profile x per-day
/// intensity x hourly noise, with an optional one-day burst late in the series.
TrafficMatrix synthesize(const SynthConfig& cfg, std::size_t threads = 1);

/// Shortest representation that reads back to the same double.
std::string format_double(double v);

/// Value of the fixed daily profile at hour-of-day h (0..23), amplitude 1
/// meaning a peak-to-trough ratio of 2.
double daily_profile(std::size_t hour_of_day, double amplitude);

} // namespace blockreg
