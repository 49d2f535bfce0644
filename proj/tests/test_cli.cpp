#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>
#include <string>

#include "lossq/errors.hpp"
#include "lossq/runner.hpp"
#include "lossq/stats.hpp"

using namespace lossq;

namespace {

const char* kSimulateMinimal = R"({
  "mode": "simulate",
  "model": {
    "interarrival": {"family": "exponential", "rate": 1.0},
    "service_time": {"family": "deterministic", "value": 1.0},
    "arrival_batch": {"family": "deterministic", "value": 1.0},
    "service_batch": {"family": "deterministic", "value": 1.0},
    "capacity": 2.0
  }
})";

std::string with_patch(const std::string& body, const std::string& from, const std::string& to) {
    std::string out = body;
    const auto pos = out.find(from);
    REQUIRE(pos != std::string::npos);
    out.replace(pos, from.size(), to);
    return out;
}

struct RunOutput {
    int code = 0;
    std::string out;
    std::string err;
};

RunOutput run_config(const std::string& text) {
    const auto config = parse_config(text);
    std::ostringstream out, err;
    RunOutput result;
    result.code = run(config, out, err);
    result.out = out.str();
    result.err = err.str();
    return result;
}

}  // namespace

TEST_CASE("minimal simulate config gets the documented defaults") {
    const auto config = parse_config(kSimulateMinimal);
    CHECK(config.mode == RunMode::Simulate);
    CHECK(config.level == doctest::Approx(0.95));
    CHECK(config.alpha == doctest::Approx(0.01));
    CHECK(config.workers == 1);
    CHECK(config.seed == 1);
    CHECK(config.num_cycles == 100000);
    CHECK(config.sweep.empty());
    CHECK(config.format == OutputFormat::Report);
    CHECK_FALSE(config.out_path.has_value());
    CHECK(config.model.has_value());
    CHECK(config.model->policy == Policy::FullRejection);
}

TEST_CASE("strict parsing rejects unknown keys and bad values") {
    CHECK_THROWS_WITH_AS((void)parse_config("{\"mode\":\"simulate\",\"bogus\":1}"),
                         doctest::Contains("bogus"), ConfigError);
    CHECK_THROWS_WITH_AS(
        (void)parse_config(with_patch(kSimulateMinimal, "\"rate\": 1.0", "\"rate\": -1.0")),
        doctest::Contains("rate"), ConfigError);
    CHECK_THROWS_WITH_AS(
        (void)parse_config(with_patch(kSimulateMinimal, "\"rate\": 1.0",
                                      "\"rate\": 1.0, \"extra\": 2")),
        doctest::Contains("extra"), ConfigError);
    CHECK_THROWS_AS((void)parse_config("not json"), ConfigError);
    CHECK_THROWS_WITH_AS((void)parse_config("{\"model\":{}}"), doctest::Contains("mode"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(
        (void)parse_config(with_patch(kSimulateMinimal, "\"mode\": \"simulate\"",
                                      "\"mode\": \"simulate\", \"level\": 1.5")),
        doctest::Contains("level"), ConfigError);
}

TEST_CASE("subcommand mode must not contradict the file mode") {
    CHECK_NOTHROW((void)parse_config(kSimulateMinimal, RunMode::Simulate));
    CHECK_THROWS_WITH_AS((void)parse_config(kSimulateMinimal, RunMode::Oracle),
                         doctest::Contains("conflicts"), ConfigError);
    // Mode can come entirely from the subcommand.
    const auto no_mode = with_patch(kSimulateMinimal, "\"mode\": \"simulate\",", "");
    CHECK(parse_config(no_mode, RunMode::Simulate).mode == RunMode::Simulate);
}

TEST_CASE("lattice multipliers with a common factor normalize with a warning") {
    const auto text = with_patch(
        kSimulateMinimal, "\"arrival_batch\": {\"family\": \"deterministic\", \"value\": 1.0}",
        "\"arrival_batch\": {\"family\": \"lattice\", \"span\": 1.0, "
        "\"multipliers\": [2, 4], \"probs\": [0.5, 0.5]}");
    const auto config = parse_config(text);
    REQUIRE(config.warnings.size() == 1);
    CHECK(config.warnings[0].find("arrival_batch") != std::string::npos);
    const auto& lat = std::get<LatticeDiscrete>(config.model->arrival_batch);
    CHECK(lat.span == doctest::Approx(2.0));
    CHECK(lat.multipliers == std::vector<int>{1, 2});
}

TEST_CASE("theorem mode validation names the violated hypothesis") {
    std::string base = with_patch(kSimulateMinimal, "\"mode\": \"simulate\"",
                                  "\"mode\": \"verify-theorem\"");
    // As given: Poisson rate 1, a = b = 1, X = Y = 1 => all conditions hold.
    CHECK_NOTHROW(validate_mode_requirements(parse_config(base), 2.0));

    auto cfg = parse_config(with_patch(base, "{\"family\": \"exponential\", \"rate\": 1.0}",
                                       "{\"family\": \"erlang\", \"shape\": 2, \"rate\": 2.0}"));
    CHECK_THROWS_WITH_AS(validate_mode_requirements(cfg, 2.0), doctest::Contains("Poisson"),
                         ConfigError);

    cfg = parse_config(with_patch(base,
                                  "\"service_batch\": {\"family\": \"deterministic\", \"value\": 1.0}",
                                  "\"service_batch\": {\"family\": \"lattice\", \"span\": 1.0, "
                                  "\"multipliers\": [1, 2], \"probs\": [0.5, 0.5]}"));
    CHECK_THROWS_WITH_AS(validate_mode_requirements(cfg, 2.0), doctest::Contains("single value"),
                         ConfigError);

    cfg = parse_config(with_patch(base,
                                  "\"arrival_batch\": {\"family\": \"deterministic\", \"value\": 1.0}",
                                  "\"arrival_batch\": {\"family\": \"uniform\", \"lo\": 0.5, "
                                  "\"hi\": 1.5}"));
    CHECK_THROWS_WITH_AS(validate_mode_requirements(cfg, 2.0), doctest::Contains("lattice"),
                         ConfigError);

    cfg = parse_config(with_patch(base, "\"rate\": 1.0", "\"rate\": 0.5"));
    CHECK_THROWS_WITH_AS(validate_mode_requirements(cfg, 2.0), doctest::Contains("a*d/b"),
                         ConfigError);
}

TEST_CASE("lemma mode refuses a trivial service batch") {
    const auto text = with_patch(kSimulateMinimal, "\"mode\": \"simulate\"",
                                 "\"mode\": \"verify-lemma\"");
    CHECK_THROWS_WITH_AS(validate_mode_requirements(parse_config(text), 2.0),
                         doctest::Contains("Y_1 must be nontrivial"), ConfigError);
}

TEST_CASE("classify-dist requires a dist entry and reports the class") {
    CHECK_THROWS_WITH_AS((void)parse_config("{\"mode\":\"classify-dist\"}"),
                         doctest::Contains("dist"), ConfigError);
    const auto result = run_config(R"({
      "mode": "classify-dist",
      "dist": {"family": "hyperexp", "weights": [0.9, 0.1], "rates": [2.0, 0.25]}
    })");
    CHECK(result.code == 0);
    CHECK(result.out.find("nwue") != std::string::npos);
    CHECK(result.out.find("mrl(0)") != std::string::npos);
}

TEST_CASE("simulate produces one csv row per sweep point") {
    const auto result = run_config(R"({
      "mode": "simulate",
      "model": {
        "interarrival": {"family": "exponential", "rate": 1.0},
        "service_time": {"family": "deterministic", "value": 1.0},
        "arrival_batch": {"family": "deterministic", "value": 1.0},
        "service_batch": {"family": "deterministic", "value": 1.0},
        "capacity": 2.0,
        "policy": "partial"
      },
      "sweep": [1.0, 2.0, 4.0],
      "num_cycles": 2000,
      "seed": 9,
      "output": {"format": "csv"}
    })");
    CHECK(result.code == 0);
    std::istringstream lines(result.out);
    std::string line;
    std::size_t rows = 0;
    REQUIRE(std::getline(lines, line));
    CHECK(line == report_csv_header());
    while (std::getline(lines, line)) {
        ++rows;
        CHECK(line.find(",partial,2000,9,") != std::string::npos);
        CHECK(line.find(",na,") != std::string::npos);
    }
    CHECK(rows == 3);
}

TEST_CASE("csv output is byte-identical for any worker count") {
    const auto base = with_patch(kSimulateMinimal, "\"mode\": \"simulate\"",
                                 "\"mode\": \"simulate\", \"num_cycles\": 5000, "
                                 "\"seed\": 31, \"output\": {\"format\": \"csv\"}");
    auto config1 = parse_config(base);
    auto config8 = parse_config(base);
    config8.workers = 8;
    std::ostringstream out1, err1, out8, err8;
    CHECK(run(config1, out1, err1) == 0);
    CHECK(run(config8, out8, err8) == 0);
    CHECK(out1.str() == out8.str());
    CHECK(!out1.str().empty());
}

TEST_CASE("verify-theorem passes on the unit-batch equality case") {
    const auto text = R"({
      "mode": "verify-theorem",
      "model": {
        "interarrival": {"family": "exponential", "rate": 1.0},
        "service_time": {"family": "deterministic", "value": 1.0},
        "arrival_batch": {"family": "lattice", "span": 1.0, "multipliers": [1], "probs": [1.0]},
        "service_batch": {"family": "deterministic", "value": 1.0},
        "capacity": 1.0
      },
      "sweep": [1.0, 2.0],
      "num_cycles": 60000,
      "seed": 2025,
      "workers": 2,
      "output": {"format": "csv"}
    })";
    const auto result = run_config(text);
    CHECK(result.code == 0);
    CHECK(result.err.find("PASS") != std::string::npos);
    CHECK(result.out.find("consistent") != std::string::npos);
}

TEST_CASE("verify-lemma with too few cycles exits nonzero as inconclusive") {
    const auto text = R"({
      "mode": "verify-lemma",
      "model": {
        "interarrival": {"family": "hyperexp", "weights": [0.9, 0.1], "rates": [2.0, 0.25]},
        "service_time": {"family": "deterministic", "value": 1.0},
        "arrival_batch": {"family": "deterministic", "value": 1.0},
        "service_batch": {"family": "lattice", "span": 0.5, "multipliers": [1, 3], "probs": [0.5, 0.5]},
        "capacity": 2.0
      },
      "num_cycles": 3,
      "seed": 55
    })";
    const auto result = run_config(text);
    CHECK(result.code == 1);
    CHECK(result.err.find("inconclusive") != std::string::npos);
    CHECK(result.err.find("FAIL") != std::string::npos);
}

TEST_CASE("oracle mode emits the exact row and the theorem check") {
    const auto text = R"({
      "mode": "oracle",
      "model": {
        "interarrival": {"family": "exponential", "rate": 0.5},
        "service_time": {"family": "deterministic", "value": 1.0},
        "arrival_batch": {"family": "lattice", "span": 1.0, "multipliers": [1, 3], "probs": [0.5, 0.5]},
        "service_batch": {"family": "deterministic", "value": 1.0},
        "capacity": 4.0
      },
      "output": {"format": "csv"}
    })";
    const auto result = run_config(text);
    CHECK(result.code == 0);
    std::istringstream lines(result.out);
    std::string header, row;
    REQUIRE(std::getline(lines, header));
    CHECK(header == "lambda,b,d,k,ex1,ad_over_b,oracle_ml,truncation,theorem_check");
    REQUIRE(std::getline(lines, row));
    CHECK(row.rfind("0.5,1,1,4,2,", 0) == 0);
    CHECK(row.find("pass") != std::string::npos);
}

TEST_CASE("trace mode is restricted to sequential simulate runs") {
    auto config = parse_config(kSimulateMinimal);
    config.num_cycles = 10;
    std::ostringstream out, err, trace;
    CHECK(run(config, out, err, &trace) == 0);
    CHECK(trace.str().find("arrival") != std::string::npos);

    config.workers = 4;
    CHECK_THROWS_WITH_AS(run(config, out, err, &trace), doctest::Contains("workers"),
                         ConfigError);
}
