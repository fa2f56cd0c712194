#include <catch_amalgamated.hpp>

#include <sstream>

#include "blockreg/corpus.hpp"
#include "blockreg/error.hpp"
#include "oracles.hpp"

using namespace blockreg;

namespace {

RawTrafficMatrix parse(const std::string& text) {
    std::istringstream in(text);
    return read_corpus(in);
}

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::ConfigError;
}

} // namespace

TEST_CASE("complete file loads as a matrix in bs_id order") {
    const auto raw = parse("bs_id,hour,volume\n"
                           "b,0,5\nb,1,6\nb,2,7\nb,3,8\n"
                           "a,3,4\na,2,3\na,1,2\na,0,1\n");
    REQUIRE(raw.bs_ids == std::vector<std::string>{"a", "b"});
    REQUIRE(raw.n_hours == 4);
    REQUIRE(raw.start_hour == 0);
    for (std::size_t j = 0; j < 4; ++j) {
        CHECK(raw.at(0, j) == static_cast<double>(j + 1));
        CHECK(raw.at(1, j) == static_cast<double>(j + 5));
    }
}

TEST_CASE("duplicate (bs, hour) record is rejected") {
    CHECK(code_of([] { parse("bs_id,hour,volume\nbs_7,3,1\nbs_7,3,2\n"); }) == ErrorCode::InconsistentHours);
}

TEST_CASE("absent record and NA both become missing cells") {
    const auto raw = parse("bs_id,hour,volume\n"
                           "bs_1,4,1\nbs_1,5,1\nbs_1,6,1\n"
                           "bs_2,4,1\nbs_2,6,NA\n");
    REQUIRE(raw.n_hours == 3);
    REQUIRE(raw.start_hour == 4);
    CHECK_FALSE(raw.at(1, 1).has_value());
    CHECK_FALSE(raw.at(1, 2).has_value());
    CHECK(raw.at(0, 1).has_value());
}

TEST_CASE("malformed rows report their line number") {
    const std::vector<std::string> bad{
        "bs_id,hour,volume\nbs_1,0,1\nbs_1,x,1\n",
        "bs_id,hour,volume\nbs_1,0,1\nbs_1,1\n",
        "bs_id,hour,volume\nbs_1,0,1\nbs_1,1,1,1\n",
        "bs_id,hour,volume\nbs_1,0,1\nbs_1,-1,1\n",
        "bs_id,hour,volume\nbs_1,0,1\nbs_1,1,1.5kb\n",
    };
    for (const auto& text : bad) {
        try {
            parse(text);
            FAIL("accepted: " << text);
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::ParseError);
            CHECK(std::string(e.what()).find("line 3") != std::string::npos);
        }
    }
    CHECK(code_of([] { parse("id,hour,volume\n"); }) == ErrorCode::ParseError);
    CHECK(code_of([] { parse(""); }) == ErrorCode::ParseError);
}

TEST_CASE("CRLF line endings are accepted") {
    const auto raw = parse("bs_id,hour,volume\r\nbs_1,0,2.5\r\nbs_1,1,3\r\n");
    CHECK(raw.at(0, 0) == 2.5);
    CHECK(raw.n_hours == 2);
}

TEST_CASE("clean drops whole faulty rows and keeps the rest bitwise") {
    auto raw = to_raw(oracle::make_matrix({{1, 2, 3}, {4, -5, 6}, {7, 8, 9}}));
    const auto t = clean(raw);
    REQUIRE(t.bs_ids == std::vector<std::string>{"bs_000", "bs_002"});
    CHECK(t.values(0, 2) == 3);
    CHECK(t.values(1, 0) == 7);

    raw.at(0, 1) = std::nullopt;
    raw.at(2, 2) = std::numeric_limits<double>::infinity();
    CHECK(code_of([&] { clean(raw); }) == ErrorCode::EmptyCorpus);

    CHECK(code_of([] { clean(RawTrafficMatrix{}); }) == ErrorCode::EmptyCorpus);
}

TEST_CASE("clean is the identity on valid input and idempotent") {
    const auto t = synthesize({.n_bs = 5, .n_hours = 48});
    const auto once = clean(to_raw(t));
    CHECK(once.bs_ids == t.bs_ids);
    CHECK(once.values == t.values);
    const auto twice = clean(to_raw(once));
    CHECK(twice.values == once.values);
}

TEST_CASE("corpus written then loaded round-trips exactly") {
    auto t = synthesize({.n_bs = 7, .n_hours = 60, .seed = 11});
    t.start_hour = 100;
    t.values(2, 3) = 0.1 + 0.2;
    t.values(4, 5) = 1e-300;
    std::stringstream ss;
    write_corpus(ss, t);
    const auto back = clean(read_corpus(ss));
    CHECK(back.bs_ids == t.bs_ids);
    CHECK(back.start_hour == 100);
    CHECK(back.values == t.values);
}

TEST_CASE("writer sorts rows by bs_id then hour") {
    auto t = oracle::make_matrix({{1, 2}, {3, 4}});
    t.bs_ids = {"z", "a"};
    std::ostringstream out;
    write_corpus(out, t);
    CHECK(out.str() == "bs_id,hour,volume\na,0,3\na,1,4\nz,0,1\nz,1,2\n");
}

TEST_CASE("synthesize is deterministic, nonnegative and shaped") {
    SynthConfig cfg;
    const auto a = synthesize(cfg);
    const auto b = synthesize(cfg, 4);
    REQUIRE(a.n_bs() == 200);
    REQUIRE(a.n_hours() == 336);
    CHECK(a.values == b.values);
    CHECK(a.bs_ids == b.bs_ids);
    CHECK((a.values.array() >= 0.0).all());
    CHECK(a.bs_ids.front() == "bs_000");
    CHECK(a.bs_ids.back() == "bs_199");
    validate(a);

    cfg.seed = 2;
    CHECK(synthesize(cfg).values != a.values);
}

TEST_CASE("synthesize with zeroed randomness is exactly 24-periodic") {
    const auto t = synthesize({.n_bs = 10, .n_hours = 120, .day_intensity_std = 0, .noise_std = 0,
                               .burst_probability = 0});
    for (Eigen::Index i = 0; i < t.values.rows(); ++i) {
        for (Eigen::Index j = 0; j + 24 < t.values.cols(); ++j) {
            REQUIRE(t.values(i, j) == t.values(i, j + 24));
        }
    }
}

TEST_CASE("synthesize rejects out-of-range settings") {
    CHECK(code_of([] { synthesize({.n_bs = 0}); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([] { synthesize({.n_hours = 23}); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([] { synthesize({.noise_std = -1}); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([] { synthesize({.burst_probability = 1.5}); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("bursts only touch the late days") {
    SynthConfig base{.n_bs = 50, .n_hours = 336, .seed = 3, .burst_probability = 0};
    SynthConfig bursty = base;
    bursty.burst_probability = 1;
    const auto a = synthesize(base);
    const auto b = synthesize(bursty);
    // Same stream up to the burst draw, so the first 10 days are identical.
    CHECK(a.values.leftCols(240) == b.values.leftCols(240));
    CHECK(a.values != b.values);
}

TEST_CASE("daily profile has night trough and evening peak") {
    CHECK(daily_profile(20, 1.0) == Catch::Approx(2.0));
    CHECK(daily_profile(4, 1.0) < daily_profile(11, 1.0));
    CHECK(daily_profile(4, 0.0) == 1.0);
}

TEST_CASE("validate catches broken invariants") {
    auto t = oracle::make_matrix({{1, 2}, {3, 4}});
    validate(t);
    t.values(1, 1) = -1;
    CHECK(code_of([&] { validate(t); }) == ErrorCode::InvalidCorpus);
    t.values(1, 1) = 1;
    t.bs_ids[1] = t.bs_ids[0];
    CHECK(code_of([&] { validate(t); }) == ErrorCode::InvalidCorpus);
}
