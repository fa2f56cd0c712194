#include "blockreg/io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "blockreg/error.hpp"

namespace blockreg {

using nlohmann::json;

namespace {

json vector_to_json(const Eigen::VectorXd& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        arr.push_back(v[i]);
    }
    return arr;
}

Eigen::VectorXd vector_from_json(const json& j, std::string_view field) {
    if (!j.is_array()) {
        throw Error(ErrorCode::ParseError, "model field '" + std::string(field) + "' must be an array");
    }
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

const json& field(const json& j, std::string_view name) {
    const auto it = j.find(name);
    if (it == j.end()) {
        throw Error(ErrorCode::ParseError, "model file is missing field '" + std::string(name) + "'");
    }
    return *it;
}

void put_regression(json& j, double theta0, const Eigen::VectorXd& theta, const NormalizationStats& s) {
    j["theta0"] = theta0;
    j["theta"] = vector_to_json(theta);
    j["mu_x"] = vector_to_json(s.mu_x);
    j["sigma_x"] = vector_to_json(s.sigma_x);
    j["mu_y"] = s.mu_y;
    j["sigma_y"] = s.sigma_y;
}

void get_regression(const json& j, std::size_t w, double& theta0, Eigen::VectorXd& theta, NormalizationStats& s) {
    theta0 = field(j, "theta0").get<double>();
    theta = vector_from_json(field(j, "theta"), "theta");
    s.mu_x = vector_from_json(field(j, "mu_x"), "mu_x");
    s.sigma_x = vector_from_json(field(j, "sigma_x"), "sigma_x");
    s.mu_y = field(j, "mu_y").get<double>();
    s.sigma_y = field(j, "sigma_y").get<double>();
    const auto n = static_cast<Eigen::Index>(w);
    if (theta.size() != n || s.mu_x.size() != n || s.sigma_x.size() != n) {
        throw Error(ErrorCode::DimensionMismatch, "model arrays do not match w = " + std::to_string(w));
    }
}

} // namespace

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error(ErrorCode::IoError, "cannot write '" + tmp.string() + "'");
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            throw Error(ErrorCode::IoError, "write failed for '" + tmp.string() + "'");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error(ErrorCode::IoError, "cannot move output into place at '" + path.string() + "'");
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json to_json(const SynthConfig& cfg) {
    return {
        {"n_bs", cfg.n_bs},
        {"n_hours", cfg.n_hours},
        {"seed", cfg.seed},
        {"daily_profile_amplitude", cfg.daily_profile_amplitude},
        {"day_intensity_std", cfg.day_intensity_std},
        {"noise_std", cfg.noise_std},
        {"burst_probability", cfg.burst_probability},
    };
}

SynthConfig synth_config_from_json(const json& j) {
    if (!j.is_object()) {
        throw Error(ErrorCode::InvalidConfig, "synth config must be a JSON object");
    }
    static const std::set<std::string> known{"n_bs",      "n_hours",           "seed",
                                             "daily_profile_amplitude", "day_intensity_std",
                                             "noise_std", "burst_probability"};
    for (const auto& [key, value] : j.items()) {
        if (!known.contains(key)) {
            throw Error(ErrorCode::InvalidConfig, "unknown synth config field '" + key + "'");
        }
    }
    SynthConfig cfg;
    try {
        auto unsigned_field = [&](const char* name, auto& out) {
            if (!j.contains(name)) return;
            const auto& v = j.at(name);
            if (!v.is_number_unsigned() && !(v.is_number_integer() && v.template get<std::int64_t>() >= 0)) {
                throw Error(ErrorCode::InvalidConfig, std::string(name) + " must be a nonnegative integer");
            }
            out = v.template get<std::remove_reference_t<decltype(out)>>();
        };
        auto real_field = [&](const char* name, double& out) {
            if (!j.contains(name)) return;
            const auto& v = j.at(name);
            if (!v.is_number()) {
                throw Error(ErrorCode::InvalidConfig, std::string(name) + " must be a number");
            }
            out = v.get<double>();
        };
        unsigned_field("n_bs", cfg.n_bs);
        unsigned_field("n_hours", cfg.n_hours);
        unsigned_field("seed", cfg.seed);
        real_field("daily_profile_amplitude", cfg.daily_profile_amplitude);
        real_field("day_intensity_std", cfg.day_intensity_std);
        real_field("noise_std", cfg.noise_std);
        real_field("burst_probability", cfg.burst_probability);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, e.what());
    }
    return cfg;
}

json model_to_json(const AnyModel& model) {
    json j;
    j["format_version"] = kModelFormatVersion;
    j["kind"] = std::string(to_string(kind_of(model)));
    j["params"] = param_count(model);
    if (const auto* br = std::get_if<BlockModel>(&model)) {
        put_regression(j, br->theta0, br->theta, br->stats);
        j["m"] = br->seasonality_m;
        j["w"] = br->window_w;
    } else if (const auto* lr = std::get_if<LrModel>(&model)) {
        put_regression(j, lr->theta0, lr->theta, lr->stats);
        j["m"] = 0;
        j["w"] = lr->window_w;
    } else {
        const auto& sa = std::get<SaModel>(model);
        j["m"] = sa.seasonality;
        j["ar"] = sa.ar_order;
        j["ma"] = sa.ma_order;
        json per_bs = json::object();
        for (const auto& [id, c] : sa.per_bs) {
            per_bs[id] = {
                {"phi", vector_to_json(c.phi)},
                {"psi", vector_to_json(c.psi)},
                {"intercept", c.intercept},
                {"noise_variance", c.noise_variance},
            };
        }
        j["per_bs"] = std::move(per_bs);
        j["failed"] = sa.failed;
    }
    return j;
}

AnyModel model_from_json(const json& j) {
    try {
        if (!j.is_object()) {
            throw Error(ErrorCode::ParseError, "model file must hold a JSON object");
        }
        const int version = field(j, "format_version").get<int>();
        if (version != kModelFormatVersion) {
            throw Error(ErrorCode::ParseError, "unsupported model format_version " + std::to_string(version));
        }
        const ModelKind kind = j.contains("kind") ? parse_model_kind(j.at("kind").get<std::string>()) : ModelKind::br;
        switch (kind) {
        case ModelKind::br: {
            BlockModel m;
            m.seasonality_m = field(j, "m").get<std::size_t>();
            m.window_w = field(j, "w").get<std::size_t>();
            get_regression(j, m.window_w, m.theta0, m.theta, m.stats);
            return m;
        }
        case ModelKind::lr: {
            LrModel m;
            m.window_w = field(j, "w").get<std::size_t>();
            get_regression(j, m.window_w, m.theta0, m.theta, m.stats);
            return m;
        }
        case ModelKind::sa: {
            SaModel m;
            m.seasonality = field(j, "m").get<std::size_t>();
            m.ar_order = field(j, "ar").get<std::size_t>();
            m.ma_order = field(j, "ma").get<std::size_t>();
            for (const auto& [id, c] : field(j, "per_bs").items()) {
                SaCoefficients coef;
                coef.phi = vector_from_json(field(c, "phi"), "phi");
                coef.psi = vector_from_json(field(c, "psi"), "psi");
                coef.intercept = field(c, "intercept").get<double>();
                coef.noise_variance = field(c, "noise_variance").get<double>();
                if (static_cast<std::size_t>(coef.phi.size()) != m.ar_order ||
                    static_cast<std::size_t>(coef.psi.size()) != m.ma_order) {
                    throw Error(ErrorCode::DimensionMismatch, "coefficients of '" + id + "' do not match the orders");
                }
                m.per_bs.emplace(id, std::move(coef));
            }
            if (j.contains("failed")) {
                m.failed = j.at("failed").get<std::vector<std::string>>();
            }
            return m;
        }
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("malformed model file: ") + e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ConfigError) {
            throw Error(ErrorCode::ParseError, e.what());
        }
        throw;
    }
    throw Error(ErrorCode::ParseError, "unknown model kind");
}

json to_json(const ExperimentConfig& cfg) {
    json j = {
        {"kind", std::string(to_string(cfg.kind))},
        {"m", cfg.m},
        {"w", cfg.w},
        {"train_hours", cfg.split.train_hours},
        {"test_hours", cfg.split.test_hours},
        {"mode", std::string(to_string(cfg.mode))},
    };
    if (cfg.kind == ModelKind::sa) {
        j["ar"] = cfg.ar;
        j["ma"] = cfg.ma;
    }
    j["seed"] = cfg.seed ? json(*cfg.seed) : json(nullptr);
    return j;
}

json to_json(const EvalReport& report) {
    json per_bs = json::object();
    for (const auto& [id, v] : report.per_bs) {
        per_bs[id] = v;
    }
    json histogram = json::array();
    for (const auto& b : report.histogram) {
        const auto& upper = b.upper;
        histogram.push_back({{"lower", b.lower}, {"upper", upper ? json(*upper) : json(nullptr)}, {"count", b.count}});
    }
    return {
        {"config", to_json(report.config)},
        {"average", report.average},
        {"excluded_count", report.excluded_count()},
        {"excluded", report.excluded},
        {"per_bs", std::move(per_bs)},
        {"histogram", std::move(histogram)},
    };
}

json to_json(const SweepResult& sweep) {
    json arr = json::array();
    for (const auto& p : sweep.points) {
        json point = {{"m", p.seasonality_m},
                      {"average_nrmse", p.average_nrmse ? json(*p.average_nrmse) : json(nullptr)}};
        if (!p.error.empty()) {
            point["error"] = p.error;
        }
        arr.push_back(std::move(point));
    }
    return arr;
}

std::string report_to_csv(const EvalReport& report) {
    std::ostringstream out;
    out << "bs_id,nrmse\n";
    for (const auto& [id, v] : report.per_bs) {
        out << id << ',' << format_double(v) << '\n';
    }
    return out.str();
}

std::string sweep_to_csv(const SweepResult& sweep) {
    std::ostringstream out;
    out << "m,average_nrmse\n";
    for (const auto& p : sweep.points) {
        out << p.seasonality_m << ',' << (p.average_nrmse ? format_double(*p.average_nrmse) : std::string()) << '\n';
    }
    return out.str();
}

std::string forecasts_to_csv(std::span<const ForecastSeries> series) {
    std::ostringstream out;
    out << "bs_id,hour,actual,forecast,mode\n";
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.hours.size(); ++i) {
            out << s.bs_id << ',' << s.hours[i] << ',' << (s.actual[i] ? format_double(*s.actual[i]) : std::string())
                << ',' << format_double(s.forecast[i]) << ',' << to_string(s.mode) << '\n';
        }
    }
    return out.str();
}

} // namespace blockreg
