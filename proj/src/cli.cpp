#include "blockreg/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "blockreg/error.hpp"
#include "blockreg/io.hpp"
#include "blockreg/parallel.hpp"

namespace blockreg {

using nlohmann::json;

namespace {

const std::map<std::string, Command>& command_names() {
    static const std::map<std::string, Command> names{
        {"synth", Command::synth},       {"clean", Command::clean}, {"train", Command::train},
        {"forecast", Command::forecast}, {"eval", Command::eval},   {"sweep", Command::sweep},
    };
    return names;
}

std::string grid_text(const std::vector<std::size_t>& grid) {
    std::string s;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        s += (i ? "," : "") + std::to_string(grid[i]);
    }
    return s;
}

void require_path(const std::filesystem::path& p, std::string_view flag, Command c) {
    if (p.empty()) {
        throw Error(ErrorCode::ConfigError,
                    std::string(to_string(c)) + " needs " + std::string(flag));
    }
}

void check_config(const RunConfig& cfg) {
    auto bad = [](const std::string& what) { throw Error(ErrorCode::ConfigError, what); };
    if (cfg.m < 1) bad("m must be a positive integer");
    if (cfg.w && *cfg.w < 1) bad("w must be a positive integer");
    if (cfg.threads < 1) bad("threads must be a positive integer");
    if (cfg.split.train_hours < 1) bad("train_hours must be a positive integer");
    if (cfg.split.test_hours < 1) bad("test_hours must be a positive integer");
    if (cfg.grid.empty()) bad("grid must not be empty");
    if (std::find(cfg.grid.begin(), cfg.grid.end(), std::size_t{0}) != cfg.grid.end()) {
        bad("grid entries must be positive integers");
    }
}

TrafficMatrix load_clean(const RunConfig& cfg) {
    require_path(cfg.input, "--input", cfg.command);
    return clean(load_corpus(cfg.input));
}

void check_converged(const std::optional<TrainingDiagnostics>& d) {
    if (d && !d->converged) {
        throw Error(ErrorCode::NotConverged, "conjugate gradient stopped after " + std::to_string(d->iterations) +
                                                 " iterations with gradient norm " +
                                                 format_double(d->gradient_norm) +
                                                 "; the best iterate was written");
    }
}

// A model either comes from --model or is trained on the corpus itself.
TrainedModel obtain_model(const RunConfig& cfg, const TrafficMatrix& t) {
    if (!cfg.model.empty()) {
        json j;
        try {
            j = json::parse(read_file(cfg.model));
        } catch (const json::parse_error& e) {
            throw Error(ErrorCode::ParseError, "model file '" + cfg.model.string() + "': " + e.what());
        }
        return {model_from_json(j), std::nullopt};
    }
    return train_model(t, cfg.experiment(), cfg.threads);
}

std::string dump(const json& j) {
    return j.dump(2) + "\n";
}

bool wants_csv(const std::filesystem::path& p) {
    return p.extension() == ".csv";
}

void run_synth(const RunConfig& cfg, std::ostream& out) {
    require_path(cfg.output, "--output", cfg.command);
    SynthConfig sc = cfg.synth;
    sc.seed = cfg.seed;
    const auto t = synthesize(sc, cfg.threads);
    std::ostringstream csv;
    write_corpus(csv, t);
    write_file_atomic(cfg.output, csv.str());
    out << "synth: " << t.n_bs() << " base stations x " << t.n_hours() << " hours, seed " << sc.seed << " -> "
        << cfg.output.string() << '\n';
}

void run_clean(const RunConfig& cfg, std::ostream& out) {
    require_path(cfg.input, "--input", cfg.command);
    require_path(cfg.output, "--output", cfg.command);
    const auto raw = load_corpus(cfg.input);
    const auto t = clean(raw);
    std::ostringstream csv;
    write_corpus(csv, t);
    write_file_atomic(cfg.output, csv.str());
    out << "clean: kept " << t.n_bs() << " of " << raw.n_bs() << " base stations -> " << cfg.output.string()
        << '\n';
}

void run_train(const RunConfig& cfg, std::ostream& out) {
    require_path(cfg.output, "--output", cfg.command);
    const auto t = load_clean(cfg);
    const auto trained = train_model(t, cfg.experiment(), cfg.threads);
    write_file_atomic(cfg.output, dump(model_to_json(trained.model)));
    out << "train: kind " << to_string(kind_of(trained.model)) << ", " << param_count(trained.model)
        << " parameters";
    if (trained.diagnostics) {
        out << ", final cost " << format_double(trained.diagnostics->final_cost);
    }
    out << " -> " << cfg.output.string() << '\n';
    check_converged(trained.diagnostics);
}

void run_forecast(const RunConfig& cfg, std::ostream& out) {
    require_path(cfg.output, "--output", cfg.command);
    const auto t = load_clean(cfg);
    const auto trained = obtain_model(cfg, t);
    const std::int64_t start = t.start_hour + static_cast<std::int64_t>(cfg.split.train_hours);

    std::vector<std::optional<ForecastSeries>> slots(t.n_bs());
    const auto* sa = std::get_if<SaModel>(&trained.model);
    parallel_for(t.n_bs(), cfg.threads, [&](std::size_t i) {
        if (sa && !sa->per_bs.contains(t.bs_ids[i])) {
            return;
        }
        slots[i] = forecast(trained.model, t, t.bs_ids[i], start, cfg.split.test_hours, cfg.mode);
    });
    std::vector<ForecastSeries> series;
    for (auto& s : slots) {
        if (s) series.push_back(std::move(*s));
    }
    std::sort(series.begin(), series.end(), [](const auto& a, const auto& b) { return a.bs_id < b.bs_id; });
    write_file_atomic(cfg.output, forecasts_to_csv(series));
    out << "forecast: " << series.size() << " base stations x " << cfg.split.test_hours << " hours ("
        << to_string(cfg.mode) << ") -> " << cfg.output.string() << '\n';
    check_converged(trained.diagnostics);
}

void run_eval(const RunConfig& cfg, std::ostream& out) {
    require_path(cfg.output, "--output", cfg.command);
    const auto t = load_clean(cfg);
    const auto trained = obtain_model(cfg, t);
    auto report = evaluate(trained.model, t, cfg.split, cfg.mode, cfg.threads);
    report.config.seed = cfg.seed;
    write_file_atomic(cfg.output, wants_csv(cfg.output) ? report_to_csv(report) : dump(to_json(report)));
    out << "eval: kind " << to_string(report.config.kind) << ", average NRMSE " << format_double(report.average)
        << " over " << report.per_bs.size() << " base stations (" << report.excluded_count() << " excluded) -> "
        << cfg.output.string() << '\n';
    check_converged(trained.diagnostics);
}

void run_sweep(const RunConfig& cfg, std::ostream& out) {
    require_path(cfg.output, "--output", cfg.command);
    const auto t = load_clean(cfg);
    const auto sweep = sweep_seasonality(t, cfg.grid, cfg.window(), cfg.split, cfg.mode, cfg.threads);
    write_file_atomic(cfg.output, wants_csv(cfg.output) ? sweep_to_csv(sweep) : dump(to_json(sweep)));

    const SweepPoint* best = nullptr;
    for (const auto& p : sweep.points) {
        if (p.average_nrmse && (!best || *p.average_nrmse < *best->average_nrmse)) {
            best = &p;
        }
    }
    out << "sweep: " << sweep.points.size() << " seasonalities";
    if (best) {
        out << ", best m " << best->seasonality_m << " with average NRMSE " << format_double(*best->average_nrmse);
    } else {
        out << ", none evaluated";
    }
    out << " -> " << cfg.output.string() << '\n';
}

template <class T>
T json_value(const json& j, const std::string& key) {
    try {
        if constexpr (std::is_unsigned_v<T>) {
            if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() && j.get<std::int64_t>() < 0)) {
                throw Error(ErrorCode::ConfigError, "config key '" + key + "' must be a nonnegative integer");
            }
        }
        return j.get<T>();
    } catch (const json::exception&) {
        throw Error(ErrorCode::ConfigError, "config key '" + key + "' has the wrong type");
    }
}

} // namespace

std::string_view to_string(Command c) noexcept {
    for (const auto& [name, cmd] : command_names()) {
        if (cmd == c) return name;
    }
    return "eval";
}

ExperimentConfig RunConfig::experiment() const {
    ExperimentConfig e;
    e.kind = kind;
    e.m = m;
    e.w = window();
    e.ar = ar;
    e.ma = ma;
    e.split = split;
    e.mode = mode;
    e.seed = seed;
    return e;
}

void apply_config_json(RunConfig& cfg, const json& j) {
    if (!j.is_object()) {
        throw Error(ErrorCode::ConfigError, "config file must hold a JSON object");
    }
    for (const auto& [key, v] : j.items()) {
        if (key == "kind") {
            cfg.kind = parse_model_kind(json_value<std::string>(v, key));
        } else if (key == "m") {
            cfg.m = json_value<std::size_t>(v, key);
        } else if (key == "w") {
            cfg.w = json_value<std::size_t>(v, key);
        } else if (key == "ar") {
            cfg.ar = json_value<std::size_t>(v, key);
        } else if (key == "ma") {
            cfg.ma = json_value<std::size_t>(v, key);
        } else if (key == "train_hours") {
            cfg.split.train_hours = json_value<std::size_t>(v, key);
        } else if (key == "test_hours") {
            cfg.split.test_hours = json_value<std::size_t>(v, key);
        } else if (key == "mode") {
            cfg.mode = parse_forecast_mode(json_value<std::string>(v, key));
        } else if (key == "seed") {
            cfg.seed = json_value<std::uint64_t>(v, key);
        } else if (key == "threads") {
            cfg.threads = json_value<std::size_t>(v, key);
        } else if (key == "grid") {
            if (!v.is_array()) {
                throw Error(ErrorCode::ConfigError, "config key 'grid' must be an array");
            }
            cfg.grid.clear();
            for (const auto& e : v) {
                cfg.grid.push_back(json_value<std::size_t>(e, key));
            }
        } else if (key == "input") {
            cfg.input = json_value<std::string>(v, key);
        } else if (key == "output") {
            cfg.output = json_value<std::string>(v, key);
        } else if (key == "model") {
            cfg.model = json_value<std::string>(v, key);
        } else if (key == "synth") {
            try {
                cfg.synth = synth_config_from_json(v);
            } catch (const Error& e) {
                throw Error(ErrorCode::ConfigError, e.what());
            }
        } else {
            throw Error(ErrorCode::ConfigError, "unknown config key '" + key + "'");
        }
    }
}

int exit_code(ErrorCategory category) noexcept {
    switch (category) {
    case ErrorCategory::Config: return 2;
    case ErrorCategory::Data: return 3;
    case ErrorCategory::Numerical: return 4;
    }
    return 1;
}

void run(const RunConfig& cfg, std::ostream& out) {
    check_config(cfg);
    switch (cfg.command) {
    case Command::synth: return run_synth(cfg, out);
    case Command::clean: return run_clean(cfg, out);
    case Command::train: return run_train(cfg, out);
    case Command::forecast: return run_forecast(cfg, out);
    case Command::eval: return run_eval(cfg, out);
    case Command::sweep: return run_sweep(cfg, out);
    }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    const RunConfig defaults;
    CLI::App app{"Block regression traffic forecasting: synthesize, clean, train, forecast, evaluate, sweep."};
    app.name(args.empty() ? "blockreg" : std::filesystem::path(args.front()).filename().string());
    app.require_subcommand(1, 1);
    app.fallthrough();
    app.option_defaults()->always_capture_default();

    std::map<std::string, CLI::App*> subs;
    subs["synth"] = app.add_subcommand("synth", "Write a synthetic corpus CSV to --output");
    subs["clean"] = app.add_subcommand("clean", "Drop base stations with missing or invalid hours");
    subs["train"] = app.add_subcommand("train", "Train a model on the first --train-hours and write its JSON");
    subs["forecast"] = app.add_subcommand("forecast", "Forecast the --test-hours after the training span (CSV)");
    subs["eval"] = app.add_subcommand("eval", "Score a model by NRMSE; JSON report, CSV when --output ends in .csv");
    subs["sweep"] = app.add_subcommand("sweep", "Evaluate the block model over a grid of seasonalities");

    std::string input, output, model, config, kind = "br", mode = "one_step";
    std::size_t m = defaults.m, w = 3, ar = defaults.ar, ma = defaults.ma;
    std::size_t train_hours = defaults.split.train_hours, test_hours = defaults.split.test_hours;
    std::size_t threads = defaults.threads;
    std::uint64_t seed = defaults.seed;
    std::vector<std::size_t> grid = defaults.grid;

    auto* o_input = app.add_option("--input", input, "Corpus CSV (bs_id,hour,volume)");
    auto* o_output = app.add_option("--output", output, "Artifact path");
    auto* o_model = app.add_option("--model", model, "Model JSON; trained from --input when absent");
    auto* o_kind = app.add_option("--kind", kind, "Model kind")->check(CLI::IsMember({"br", "lr", "sa"}));
    auto* o_m = app.add_option("--m", m, "Seasonality in hours (br differencing lag, sa seasonal lag)")
                    ->check(CLI::PositiveNumber);
    auto* o_w = app.add_option("--w", w, "Window length")
                    ->check(CLI::PositiveNumber)
                    ->default_str("3 for br, 72 for lr");
    auto* o_ar = app.add_option("--ar", ar, "Seasonal ARIMA AR order")->check(CLI::NonNegativeNumber);
    auto* o_ma = app.add_option("--ma", ma, "Seasonal ARIMA MA order")->check(CLI::NonNegativeNumber);
    auto* o_train = app.add_option("--train-hours", train_hours, "Training hours")->check(CLI::PositiveNumber);
    auto* o_test = app.add_option("--test-hours", test_hours, "Test hours")->check(CLI::PositiveNumber);
    auto* o_mode =
        app.add_option("--mode", mode, "Forecast mode")->check(CLI::IsMember({"one_step", "recursive"}));
    auto* o_seed = app.add_option("--seed", seed, "Seed for all randomness");
    auto* o_threads = app.add_option("--threads", threads, "Worker thread cap")->check(CLI::PositiveNumber);
    auto* o_grid = app.add_option("--grid", grid, "Sweep seasonalities")
                       ->delimiter(',')
                       ->check(CLI::PositiveNumber)
                       ->default_str(grid_text(defaults.grid));
    app.add_option("--config", config, "JSON config; flags override it")->default_str("none");

    auto fail = [&](const Error& e) {
        json line = {{"error", std::string(to_string(e.category()))},
                     {"code", std::string(to_string(e.code()))},
                     {"message", e.what()}};
        err << line.dump() << '\n';
        return exit_code(e.category());
    };

    try {
        // CLI11 consumes a reversed argument list without the program name.
        std::vector<std::string> rev(args.empty() ? args.end() : args.begin() + 1, args.end());
        std::reverse(rev.begin(), rev.end());
        try {
            app.parse(rev);
        } catch (const CLI::CallForHelp&) {
            out << app.help();
            return 0;
        } catch (const CLI::CallForAllHelp&) {
            out << app.help("", CLI::AppFormatMode::All);
            return 0;
        } catch (const CLI::ParseError& e) {
            throw Error(ErrorCode::ConfigError, e.what());
        }

        RunConfig cfg;
        for (const auto& [name, sub] : subs) {
            if (sub->parsed()) cfg.command = command_names().at(name);
        }
        if (!config.empty()) {
            json j;
            try {
                std::ifstream in(config);
                if (!in) throw Error(ErrorCode::ConfigError, "cannot open config '" + config + "'");
                j = json::parse(in);
            } catch (const json::parse_error& e) {
                throw Error(ErrorCode::ConfigError, "config '" + config + "': " + e.what());
            }
            apply_config_json(cfg, j);
        }
        if (o_input->count()) cfg.input = input;
        if (o_output->count()) cfg.output = output;
        if (o_model->count()) cfg.model = model;
        if (o_kind->count()) cfg.kind = parse_model_kind(kind);
        if (o_m->count()) cfg.m = m;
        if (o_w->count()) cfg.w = w;
        if (o_ar->count()) cfg.ar = ar;
        if (o_ma->count()) cfg.ma = ma;
        if (o_train->count()) cfg.split.train_hours = train_hours;
        if (o_test->count()) cfg.split.test_hours = test_hours;
        if (o_mode->count()) cfg.mode = parse_forecast_mode(mode);
        if (o_seed->count()) cfg.seed = seed;
        if (o_threads->count()) cfg.threads = threads;
        if (o_grid->count()) cfg.grid = grid;

        run(cfg, out);
        return 0;
    } catch (const Error& e) {
        return fail(e);
    }
}

} // namespace blockreg
