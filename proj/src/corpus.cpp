#include "blockreg/corpus.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <set>

#include "blockreg/error.hpp"
#include "blockreg/parallel.hpp"

namespace blockreg {

namespace {

constexpr std::size_t kHoursPerDay = 24;
// Persistence of the log day-intensity AR(1) process.
constexpr double kDayIntensityPersistence = 0.7;
// Log-normal spread of per-BS traffic scale.
constexpr double kScaleLogStd = 1.0;
constexpr double kBurstMinFactor = 2.0;
constexpr double kBurstMaxFactor = 5.0;

std::string_view trim_cr(std::string_view s) {
    if (!s.empty() && s.back() == '\r') {
        s.remove_suffix(1);
    }
    return s;
}

[[noreturn]] void parse_fail(std::size_t line, const std::string& what) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + what);
}

std::array<std::string_view, 3> split3(std::string_view line, std::size_t line_no) {
    std::array<std::string_view, 3> fields;
    std::size_t pos = 0;
    for (std::size_t k = 0; k < 3; ++k) {
        const auto comma = line.find(',', pos);
        if (k < 2) {
            if (comma == std::string_view::npos) {
                parse_fail(line_no, "expected 3 fields");
            }
            fields[k] = line.substr(pos, comma - pos);
            pos = comma + 1;
        } else {
            if (comma != std::string_view::npos) {
                parse_fail(line_no, "expected 3 fields");
            }
            fields[k] = line.substr(pos);
        }
    }
    return fields;
}

double shape_bump(double hour, double centre, double width) {
    double d = std::abs(hour - centre);
    d = std::min(d, static_cast<double>(kHoursPerDay) - d);
    return std::exp(-d * d / (2.0 * width * width));
}

// Bimodal daily curve in [0, 1]: night trough, late-morning and evening peaks.
const std::array<double, kHoursPerDay>& profile_shape() {
    static const std::array<double, kHoursPerDay> shape = [] {
        std::array<double, kHoursPerDay> s{};
        for (std::size_t h = 0; h < kHoursPerDay; ++h) {
            const auto x = static_cast<double>(h);
            s[h] = 0.7 * shape_bump(x, 11.0, 3.0) + shape_bump(x, 20.0, 2.5);
        }
        const double lo = *std::min_element(s.begin(), s.end());
        const double hi = *std::max_element(s.begin(), s.end());
        for (auto& v : s) {
            v = (v - lo) / (hi - lo);
        }
        return s;
    }();
    return shape;
}

void check_synth_config(const SynthConfig& cfg) {
    auto bad = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
    if (cfg.n_bs < 1) bad("n_bs must be >= 1");
    if (cfg.n_hours < kHoursPerDay) bad("n_hours must be >= 24");
    if (!(cfg.daily_profile_amplitude >= 0.0) || !std::isfinite(cfg.daily_profile_amplitude))
        bad("daily_profile_amplitude must be a nonnegative finite number");
    if (!(cfg.day_intensity_std >= 0.0) || !std::isfinite(cfg.day_intensity_std))
        bad("day_intensity_std must be a nonnegative finite number");
    if (!(cfg.noise_std >= 0.0) || !std::isfinite(cfg.noise_std))
        bad("noise_std must be a nonnegative finite number");
    if (!(cfg.burst_probability >= 0.0 && cfg.burst_probability <= 1.0))
        bad("burst_probability must lie in [0, 1]");
}

} // namespace

std::string format_double(double v) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return {buf.data(), res.ptr};
}

std::optional<std::size_t> TrafficMatrix::index_of(std::string_view bs_id) const {
    const auto it = std::find(bs_ids.begin(), bs_ids.end(), bs_id);
    if (it == bs_ids.end()) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(it - bs_ids.begin());
}

void validate(const TrafficMatrix& t) {
    auto bad = [](const std::string& what) { throw Error(ErrorCode::InvalidCorpus, what); };
    if (t.values.rows() != static_cast<Eigen::Index>(t.bs_ids.size())) {
        bad("row count does not match bs_ids");
    }
    if (t.values.cols() < 1) {
        bad("traffic matrix has no hours");
    }
    std::set<std::string_view> seen;
    for (const auto& id : t.bs_ids) {
        if (!seen.insert(id).second) {
            bad("duplicate bs_id '" + id + "'");
        }
    }
    for (Eigen::Index i = 0; i < t.values.rows(); ++i) {
        for (Eigen::Index j = 0; j < t.values.cols(); ++j) {
            const double v = t.values(i, j);
            if (!std::isfinite(v) || v < 0.0) {
                bad("entry (" + t.bs_ids[static_cast<std::size_t>(i)] + ", " + std::to_string(j) +
                    ") is negative or non-finite");
            }
        }
    }
}

RawTrafficMatrix to_raw(const TrafficMatrix& t) {
    RawTrafficMatrix raw;
    raw.bs_ids = t.bs_ids;
    raw.start_hour = t.start_hour;
    raw.n_hours = t.n_hours();
    raw.cells.assign(t.values.data(), t.values.data() + t.values.size());
    return raw;
}

RawTrafficMatrix read_corpus(std::istream& in) {
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line)) {
        parse_fail(line_no, "missing header");
    }
    if (trim_cr(line) != "bs_id,hour,volume") {
        parse_fail(line_no, "header must be 'bs_id,hour,volume'");
    }

    std::map<std::string, std::map<std::int64_t, std::optional<double>>> records;
    std::optional<std::int64_t> min_hour;
    std::optional<std::int64_t> max_hour;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = trim_cr(line);
        if (text.empty()) {
            continue;
        }
        const auto [id, hour_text, volume_text] = split3(text, line_no);
        if (id.empty()) {
            parse_fail(line_no, "empty bs_id");
        }

        std::int64_t hour = 0;
        const auto hour_end = hour_text.data() + hour_text.size();
        const auto hr = std::from_chars(hour_text.data(), hour_end, hour);
        if (hour_text.empty() || hr.ec != std::errc{} || hr.ptr != hour_end || hour < 0) {
            parse_fail(line_no, "hour must be a nonnegative integer");
        }

        std::optional<double> volume;
        if (volume_text != "NA") {
            double v = 0.0;
            const auto vol_end = volume_text.data() + volume_text.size();
            const auto vr = std::from_chars(volume_text.data(), vol_end, v);
            if (volume_text.empty() || vr.ec != std::errc{} || vr.ptr != vol_end) {
                parse_fail(line_no, "volume must be a decimal or NA");
            }
            volume = v;
        }

        auto& series = records[std::string(id)];
        if (!series.emplace(hour, volume).second) {
            throw Error(ErrorCode::InconsistentHours, "line " + std::to_string(line_no) + ": duplicate record for (" +
                                                          std::string(id) + ", " + std::to_string(hour) + ")");
        }
        min_hour = min_hour ? std::min(*min_hour, hour) : hour;
        max_hour = max_hour ? std::max(*max_hour, hour) : hour;
    }

    RawTrafficMatrix raw;
    if (records.empty()) {
        return raw;
    }
    raw.start_hour = *min_hour;
    raw.n_hours = static_cast<std::size_t>(*max_hour - *min_hour + 1);
    raw.cells.assign(records.size() * raw.n_hours, std::nullopt);
    for (const auto& [id, series] : records) {
        const std::size_t i = raw.bs_ids.size();
        raw.bs_ids.push_back(id);
        for (const auto& [hour, volume] : series) {
            raw.at(i, static_cast<std::size_t>(hour - raw.start_hour)) = volume;
        }
    }
    return raw;
}

RawTrafficMatrix load_corpus(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
    }
    return read_corpus(in);
}

void write_corpus(std::ostream& out, const TrafficMatrix& t) {
    std::vector<std::size_t> order(t.n_bs());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return t.bs_ids[a] < t.bs_ids[b]; });

    out << "bs_id,hour,volume\n";
    for (const auto i : order) {
        const auto row = t.row(i);
        for (std::size_t j = 0; j < row.size(); ++j) {
            out << t.bs_ids[i] << ',' << t.start_hour + static_cast<std::int64_t>(j) << ',' << format_double(row[j])
                << '\n';
        }
    }
}

void save_corpus(const std::filesystem::path& path, const TrafficMatrix& t) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
    }
    write_corpus(out, t);
    if (!out) {
        throw Error(ErrorCode::IoError, "write failed for '" + path.string() + "'");
    }
}

TrafficMatrix clean(const RawTrafficMatrix& raw) {
    if (raw.n_bs() == 0) {
        throw Error(ErrorCode::EmptyCorpus, "corpus has no base stations");
    }
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < raw.n_bs(); ++i) {
        bool ok = true;
        for (std::size_t j = 0; j < raw.n_hours && ok; ++j) {
            const auto& cell = raw.at(i, j);
            ok = cell.has_value() && std::isfinite(*cell) && *cell >= 0.0;
        }
        if (ok) {
            keep.push_back(i);
        }
    }
    if (keep.empty()) {
        throw Error(ErrorCode::EmptyCorpus, "every base station has faulty data");
    }

    TrafficMatrix t;
    t.start_hour = raw.start_hour;
    t.values.resize(static_cast<Eigen::Index>(keep.size()), static_cast<Eigen::Index>(raw.n_hours));
    for (std::size_t r = 0; r < keep.size(); ++r) {
        t.bs_ids.push_back(raw.bs_ids[keep[r]]);
        for (std::size_t j = 0; j < raw.n_hours; ++j) {
            t.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = *raw.at(keep[r], j);
        }
    }
    return t;
}

double daily_profile(std::size_t hour_of_day, double amplitude) {
    return 1.0 + amplitude * profile_shape()[hour_of_day % kHoursPerDay];
}

TrafficMatrix synthesize(const SynthConfig& cfg, std::size_t threads) {
    check_synth_config(cfg);

    const std::size_t n_days = (cfg.n_hours + kHoursPerDay - 1) / kHoursPerDay;
    const std::size_t width = std::to_string(cfg.n_bs - 1).size();

    TrafficMatrix t;
    t.start_hour = 0;
    t.values.resize(static_cast<Eigen::Index>(cfg.n_bs), static_cast<Eigen::Index>(cfg.n_hours));
    t.bs_ids.resize(cfg.n_bs);

    std::array<double, kHoursPerDay> profile{};
    for (std::size_t h = 0; h < kHoursPerDay; ++h) {
        profile[h] = daily_profile(h, cfg.daily_profile_amplitude);
    }
    const double rho = kDayIntensityPersistence;
    const double innovation_std = cfg.day_intensity_std * std::sqrt(1.0 - rho * rho);

    parallel_for(cfg.n_bs, threads, [&](std::size_t i) {
        auto id = std::to_string(i);
        t.bs_ids[i] = "bs_" + std::string(width - id.size(), '0') + id;

        // One independent stream per BS keeps rows identical for any thread count.
        std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                          static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i >> 32)};
        std::mt19937_64 rng(seq);
        std::normal_distribution<double> normal(0.0, 1.0);
        std::uniform_real_distribution<double> uniform(0.0, 1.0);

        const double scale = std::exp(kScaleLogStd * normal(rng));

        std::vector<double> day_factor(n_days);
        double log_intensity = cfg.day_intensity_std * normal(rng);
        for (std::size_t d = 0; d < n_days; ++d) {
            if (d > 0) {
                log_intensity = rho * log_intensity + innovation_std * normal(rng);
            }
            day_factor[d] = std::exp(log_intensity);
        }

        auto row = t.values.row(static_cast<Eigen::Index>(i));
        for (std::size_t j = 0; j < cfg.n_hours; ++j) {
            const double noise = std::exp(cfg.noise_std * normal(rng));
            row(static_cast<Eigen::Index>(j)) = scale * profile[j % kHoursPerDay] * day_factor[j / kHoursPerDay] * noise;
        }

        // Bursts land in the last two sevenths of the days, i.e. the test
        // period of a 14-day corpus split 10/4.
        if (uniform(rng) < cfg.burst_probability) {
            const std::size_t first_day = n_days * 5 / 7;
            std::uniform_int_distribution<std::size_t> pick_day(first_day, n_days - 1);
            const std::size_t day = pick_day(rng);
            const double factor = kBurstMinFactor + (kBurstMaxFactor - kBurstMinFactor) * uniform(rng);
            for (std::size_t j = day * kHoursPerDay; j < std::min(cfg.n_hours, (day + 1) * kHoursPerDay); ++j) {
                row(static_cast<Eigen::Index>(j)) *= factor;
            }
        }
    });
    return t;
}

} // namespace blockreg
