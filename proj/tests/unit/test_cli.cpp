#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "blockreg/cli.hpp"
#include "blockreg/error.hpp"
#include "blockreg/io.hpp"

using namespace blockreg;
using nlohmann::json;

namespace {

struct Result {
    int code = 0;
    std::string out;
    std::string err;
};

Result cli(std::vector<std::string> args) {
    args.insert(args.begin(), "blockreg");
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::filesystem::path dir() {
    static const auto d = [] {
        auto p = std::filesystem::temp_directory_path() / "blockreg_cli_test";
        std::filesystem::remove_all(p);
        std::filesystem::create_directories(p);
        return p;
    }();
    return d;
}

std::string path(const std::string& name) {
    return (dir() / name).string();
}

const std::string& corpus() {
    static const std::string p = [] {
        const auto out = path("corpus.csv");
        const json cfg{{"synth", {{"n_bs", 40}}}};
        std::ofstream(path("synth.json")) << cfg.dump();
        REQUIRE(cli({"synth", "--config", path("synth.json"), "--output", out}).code == 0);
        return out;
    }();
    return p;
}

json read_json(const std::string& p) {
    return json::parse(read_file(p));
}

} // namespace

TEST_CASE("help lists every flag with its default") {
    const auto r = cli({"--help"});
    REQUIRE(r.code == 0);
    for (const char* flag : {"--input", "--output", "--model", "--kind", "--m", "--w", "--ar", "--ma",
                             "--train-hours", "--test-hours", "--mode", "--seed", "--threads", "--config"}) {
        CHECK(r.out.find(flag) != std::string::npos);
    }
    for (const char* def : {"[br]", "[24]", "[2]", "[1]", "[240]", "[96]", "[one_step]", "3 for br, 72 for lr"}) {
        CHECK(r.out.find(def) != std::string::npos);
    }
    for (const char* cmd : {"synth", "clean", "train", "forecast", "eval", "sweep"}) {
        CHECK(r.out.find(cmd) != std::string::npos);
    }
}

TEST_CASE("synth writes the configured corpus") {
    const auto r = cli({"synth", "--output", path("s.csv"), "--seed", "5"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("200 base stations x 336 hours") != std::string::npos);
    SynthConfig cfg;
    cfg.seed = 5;
    std::ostringstream expected;
    write_corpus(expected, synthesize(cfg));
    CHECK(read_file(path("s.csv")) == expected.str());
}

TEST_CASE("train with defaults writes a four-coefficient model") {
    const auto r = cli({"train", "--input", corpus(), "--output", path("m.json")});
    REQUIRE(r.code == 0);
    const auto j = read_json(path("m.json"));
    CHECK(j["params"] == 4);
    CHECK(j["theta"].size() == 3);
    CHECK(j["m"] == 24);
    CHECK(j["w"] == 3);
}

TEST_CASE("eval from a model file equals eval with inline training") {
    REQUIRE(cli({"train", "--input", corpus(), "--output", path("m2.json")}).code == 0);
    REQUIRE(cli({"eval", "--input", corpus(), "--model", path("m2.json"), "--output", path("a.json")}).code == 0);
    REQUIRE(cli({"eval", "--input", corpus(), "--output", path("b.json")}).code == 0);
    CHECK(read_file(path("a.json")) == read_file(path("b.json")));
    const auto j = read_json(path("a.json"));
    for (const char* key : {"config", "average", "excluded_count", "per_bs", "histogram"}) CHECK(j.contains(key));
}

TEST_CASE("repeated eval is byte-identical for any thread count") {
    for (const char* kind : {"br", "lr", "sa"}) {
        REQUIRE(cli({"eval", "--input", corpus(), "--kind", kind, "--output", path("r1.json")}).code == 0);
        REQUIRE(cli({"eval", "--input", corpus(), "--kind", kind, "--threads", "3", "--output", path("r2.json")})
                    .code == 0);
        CHECK(read_file(path("r1.json")) == read_file(path("r2.json")));
    }
}

TEST_CASE("eval writes CSV when asked") {
    const auto r = cli({"eval", "--input", corpus(), "--output", path("r.csv")});
    REQUIRE(r.code == 0);
    CHECK(read_file(path("r.csv")).rfind("bs_id,nrmse\n", 0) == 0);
    CHECK(r.out.find("average NRMSE") != std::string::npos);
}

TEST_CASE("sweep over the default grid has seven points") {
    const auto r = cli({"sweep", "--input", corpus(), "--output", path("sw.json")});
    REQUIRE(r.code == 0);
    const auto j = read_json(path("sw.json"));
    REQUIRE(j.size() == 7);
    CHECK(j[0]["m"] == 24);
    CHECK(j[6]["m"] == 168);
    REQUIRE(cli({"sweep", "--input", corpus(), "--grid", "48,24", "--output", path("sw2.json")}).code == 0);
    CHECK(read_json(path("sw2.json")).size() == 2);
}

TEST_CASE("forecast writes one row per BS and hour") {
    REQUIRE(cli({"forecast", "--input", corpus(), "--kind", "sa", "--mode", "recursive", "--output", path("f.csv")})
                .code == 0);
    const auto text = read_file(path("f.csv"));
    CHECK(text.rfind("bs_id,hour,actual,forecast,mode\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 40 * 96);
    CHECK(text.find(",recursive\n") != std::string::npos);
}

TEST_CASE("clean drops faulty stations") {
    std::ofstream(path("raw.csv")) << "bs_id,hour,volume\na,0,1\na,1,2\nb,0,NA\nb,1,2\nc,0,3\n";
    const auto r = cli({"clean", "--input", path("raw.csv"), "--output", path("clean.csv")});
    REQUIRE(r.code == 0);
    CHECK(read_file(path("clean.csv")) == "bs_id,hour,volume\na,0,1\na,1,2\n");
    CHECK(r.out.find("kept 1 of 3") != std::string::npos);
}

TEST_CASE("flags override the config file, which overrides defaults") {
    const json cfg{{"kind", "br"}, {"m", 48}, {"w", 2}};
    std::ofstream(path("cfg.json")) << cfg.dump();
    REQUIRE(cli({"train", "--input", corpus(), "--config", path("cfg.json"), "--output", path("c1.json")}).code == 0);
    auto j = read_json(path("c1.json"));
    CHECK(j["m"] == 48);
    CHECK(j["w"] == 2);
    REQUIRE(cli({"train", "--input", corpus(), "--config", path("cfg.json"), "--m", "72", "--output",
                 path("c2.json")})
                .code == 0);
    j = read_json(path("c2.json"));
    CHECK(j["m"] == 72);
    CHECK(j["w"] == 2);
}

TEST_CASE("lr uses its own default window") {
    REQUIRE(cli({"train", "--input", corpus(), "--kind", "lr", "--output", path("lr.json")}).code == 0);
    CHECK(read_json(path("lr.json"))["params"] == 73);
    REQUIRE(cli({"train", "--input", corpus(), "--kind", "sa", "--output", path("sa.json")}).code == 0);
    CHECK(read_json(path("sa.json"))["params"] == 5 * 40);
}

TEST_CASE("configuration problems exit 2 with a JSON error line") {
    for (const auto& args : std::vector<std::vector<std::string>>{
             {"eval", "--kind", "nn", "--input", "x", "--output", "y"},
             {"eval", "--bogus"},
             {},
             {"eval", "--m", "0", "--input", "x", "--output", "y"},
             {"eval", "--input", "x"},
         }) {
        const auto r = cli(args);
        CHECK(r.code == 2);
        const auto line = json::parse(r.err);
        CHECK(line["error"] == "ConfigError");
    }
    std::ofstream(path("bad.json")) << "{\"windw\": 3}";
    CHECK(cli({"eval", "--config", path("bad.json"), "--input", corpus(), "--output", path("x.json")}).code == 2);
}

TEST_CASE("data problems exit 3") {
    auto r = cli({"eval", "--input", path("missing.csv"), "--output", path("x.json")});
    CHECK(r.code == 3);
    CHECK(json::parse(r.err)["error"] == "DataError");
    std::ofstream(path("broken.csv")) << "bs_id,hour,volume\na,zero,1\n";
    r = cli({"eval", "--input", path("broken.csv"), "--output", path("x.json")});
    CHECK(r.code == 3);
    CHECK(json::parse(r.err)["code"] == "ParseError");
    CHECK_FALSE(std::filesystem::exists(path("x.json")));
}

TEST_CASE("a corpus no model can score is a data error") {
    std::ofstream(path("const.csv")) << [] {
        std::string s = "bs_id,hour,volume\n";
        for (int h = 0; h < 336; ++h) s += "a," + std::to_string(h) + ",1\n";
        return s;
    }();
    // A flat series has no seasonal variation, so its ARMA fit fails.
    REQUIRE(cli({"train", "--input", path("const.csv"), "--kind", "sa", "--output", path("flat.json")}).code == 0);
    CHECK(read_json(path("flat.json"))["failed"] == json::array({"a"}));
    const auto r = cli({"eval", "--input", path("const.csv"), "--kind", "sa", "--output", path("x.json")});
    CHECK(r.code == 3);
    CHECK(json::parse(r.err)["code"] == "EmptyCorpus");
}

TEST_CASE("error categories map to exit codes") {
    CHECK(exit_code(ErrorCategory::Config) == 2);
    CHECK(exit_code(ErrorCategory::Data) == 3);
    CHECK(exit_code(ErrorCategory::Numerical) == 4);
    CHECK(category_of(ErrorCode::NotConverged) == ErrorCategory::Numerical);
    CHECK(category_of(ErrorCode::SingularSystem) == ErrorCategory::Numerical);
}
