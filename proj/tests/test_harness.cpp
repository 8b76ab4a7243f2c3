#include "dpcc/harness/cli.hpp"
#include "dpcc/harness/config.hpp"
#include "dpcc/harness/csv.hpp"
#include "dpcc/harness/metrics.hpp"
#include "dpcc/harness/scenarios.hpp"

#include <doctest.h>

#include <clocale>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace dpcc;
using namespace dpcc::harness;

namespace fs = std::filesystem;

namespace {

EpisodeLog constant_log(double y, std::size_t n, std::optional<std::size_t> switch_at = std::nullopt) {
    EpisodeLog log;
    for (std::size_t i = 0; i < n; ++i) {
        EpisodeRecord r;
        r.step = static_cast<std::int64_t>(i);
        r.t = static_cast<double>(i) * 0.02;
        r.y = y;
        if (switch_at && i == *switch_at)
            r.flags |= flags::Switch;
        if (switch_at && i >= *switch_at)
            r.mode = ControlMode::Ddpc;
        log.records.push_back(r);
    }
    return log;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("dpcc_test_" + name);
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST_CASE("config text: comments, whitespace, errors") {
    const auto kv = parse_config_text("# header\n  lambda = 0.01   # trailing\n\nn=12\r\n");
    REQUIRE(kv.size() == 2);
    CHECK(kv[0] == std::pair<std::string, std::string>{"lambda", "0.01"});
    CHECK(kv[1].second == "12");
    CHECK_THROWS_AS(parse_config_text("lambda 0.01\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("bogus = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("lambda =\n"), ConfigError);
    try {
        parse_config_text("n = 3\nnope\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_override("lambda"), ConfigError);
    CHECK_THROWS_AS(read_config_file("/nonexistent/dpcc.cfg"), ConfigError);
}

TEST_CASE("resolution order: preset, file, then overrides") {
    const auto cfg = resolve(Scenario::DdpcRefChange, parse_config_text("reference = 0.1\nlambda = 0.5\n"),
                             {parse_override("lambda=0.25")});
    CHECK(cfg.runtime.reference == 0.1);
    CHECK(*cfg.runtime.reference2 == 0.25);
    CHECK(cfg.runtime.lambda == 0.25);
    const auto nocomp = resolve(Scenario::DdpcNoComp, {}, {});
    CHECK_FALSE(nocomp.runtime.compensate);
    const auto pid = resolve(Scenario::Pid, {}, {});
    CHECK_FALSE(pid.runtime.ddpc_enabled);
    CHECK(pid.runtime.pid_gains.kp == 9.0);
    CHECK(pid.runtime.pid_gains.ki == 3.0);
    CHECK(pid.runtime.pid_gains.kd == 7.5);
    CHECK(pid.runtime.ts == 0.02);
    CHECK(pid.runtime.reference == 0.2);
    CHECK_THROWS_AS(resolve(Scenario::DdpcRefChange, {}, {parse_override("reference2=0.45")}), std::invalid_argument);
    CHECK_THROWS_AS(resolve(Scenario::DdpcComp, {}, {parse_override("lambda=abc")}), ConfigError);
    CHECK_THROWS_AS(parse_scenario("fuzzy"), ConfigError);
}

TEST_CASE("channel keys apply to both directions and delay profiles seed them") {
    const auto cfg = resolve(Scenario::DelayProbe, {}, {parse_override("delay_profile=gz-0800"),
                                                        parse_override("loss_prob=0.002")});
    CHECK(cfg.runtime.uplink.base_delay == 0.0185);
    CHECK(cfg.runtime.downlink.jitter_kind == transport::JitterKind::Exponential);
    CHECK(cfg.runtime.uplink.nominal_mean() == doctest::Approx(0.0218));
    CHECK(cfg.runtime.downlink.loss_prob == 0.002);
    // Explicit channel keys win regardless of order.
    const auto cfg2 = resolve(Scenario::DelayProbe, parse_config_text("base_delay = 0.001\ndelay_profile = gz-0800\n"), {});
    CHECK(cfg2.runtime.uplink.base_delay == 0.001);
    CHECK_THROWS_AS(resolve(Scenario::DelayProbe, {}, {parse_override("delay_profile=mars")}), ConfigError);
}

TEST_CASE("resolved config round-trips to the identical run") {
    const auto cfg = resolve(Scenario::DdpcComp, {}, {parse_override("duration=3"), parse_override("n=6"),
                                                      parse_override("j=30"), parse_override("seed=17"),
                                                      parse_override("lambda=0.0123456789")});
    const std::string text = to_config_text(cfg);
    const auto back = resolve(Scenario::DdpcComp, parse_config_text(text), {});
    CHECK(to_config_text(back) == text);
    CHECK(episode_csv(run_scenario(back)) == episode_csv(run_scenario(cfg)));
    for (const std::string& key : known_keys())
        CHECK(text.find("\n" + key + " = ") != std::string::npos);
}

TEST_CASE("numbers are formatted shortest round-trip and independent of the C locale") {
    for (double v : {0.1, 0.2, 1.0 / 3.0, 1e-300, -2.5e17, 0.0})
        CHECK(parse_double(format_double(v)) == v);
    CHECK(format_double(0.02) == "0.02");
    std::setlocale(LC_ALL, "de_DE.UTF-8");  // harmless when unavailable
    CHECK(format_double(0.5) == "0.5");
    CHECK(parse_double("0.5") == 0.5);
    std::setlocale(LC_ALL, "C");
    CHECK_THROWS_AS(parse_double("0,5"), std::invalid_argument);
    CHECK(parse_uint("0x10") == 16);
    CHECK_THROWS_AS(parse_int("12x"), std::invalid_argument);
}

TEST_CASE("episode CSV schema and round trip") {
    EpisodeLog log = constant_log(0.2, 3, 1);
    log.records[2].flags |= flags::Loss | flags::Clamp;
    log.records[2].tau = 4;
    log.records[2].t_delay = 0.04;
    const std::string csv = episode_csv(log);
    CHECK(csv.rfind("step,t,y,u,tau,t_delay,mode,flags\n", 0) == 0);
    CHECK(csv.find("2,0.04,0.2,0,4,0.04,ddpc,loss|clamp\n") != std::string::npos);
    std::istringstream in(csv);
    const EpisodeLog back = read_episode_csv(in);
    CHECK(episode_csv(back) == csv);
}

TEST_CASE("metrics: exact tracking, constant offset, settling") {
    auto m = compute_metrics(constant_log(0.2, 100), {0.2, 0.2});
    CHECK(m.rms_error == 0);
    REQUIRE(m.settle_time);
    CHECK(*m.settle_time == 0);
    CHECK_FALSE(m.switch_time);

    m = compute_metrics(constant_log(0.21, 100), {0.2, 0.2});
    CHECK(m.rms_error == doctest::Approx(0.01));
    CHECK_FALSE(m.settle_time);

    // Scored from the switch on, against the post-switch reference.
    EpisodeLog log = constant_log(0.25, 100, 40);
    for (std::size_t i = 0; i < 40; ++i)
        log.records[i].y = 0.15;
    log.records[50].y = 0.2;  // one excursion 10 periods after the switch
    m = compute_metrics(log, {0.15, 0.25});
    CHECK(*m.switch_time == doctest::Approx(0.8));
    CHECK(*m.settle_time == doctest::Approx(11 * 0.02));
    CHECK(m.rms_error == doctest::Approx(0.05 / std::sqrt(60.0)));
    CHECK_THROWS_AS(compute_metrics(EpisodeLog{}, {}), std::invalid_argument);
}

TEST_CASE("metrics csv writes NA for absent values") {
    std::ostringstream out;
    write_metrics_csv(out, compute_metrics(constant_log(0.21, 10), {0.2, 0.2}));
    CHECK(out.str().find(",NA,") != std::string::npos);
}

TEST_CASE("delay probe: configured mean, zero jitter, loss interval") {
    auto cfg = resolve(Scenario::DelayProbe, {}, {parse_override("delay_profile=gz-0800")});
    auto report = scenario_delay_probe(cfg);
    CHECK(report.count == 10000);
    CHECK(*report.mean >= 0.0207);
    CHECK(*report.mean <= 0.0229);

    cfg = resolve(Scenario::DelayProbe, {}, {parse_override("jitter_kind=none"), parse_override("loss_prob=0")});
    report = scenario_delay_probe(cfg);
    CHECK(*report.max == *report.min);
    CHECK(*report.mean == doctest::Approx(*report.min));
    CHECK(report.delivered == report.count);

    cfg = resolve(Scenario::DelayProbe, {}, {});
    report = scenario_delay_probe(cfg);
    CHECK(std::abs(report.loss_rate - 0.004) <= 0.002);
    CHECK(report.loss_ci_low <= 0.004);
    CHECK(report.loss_ci_high >= 0.004);
}

TEST_CASE("Wilson interval brackets the estimate") {
    const auto ci = wilson_interval(40, 10000);
    CHECK(ci.low < 0.004);
    CHECK(ci.high > 0.004);
    CHECK(wilson_interval(0, 100).low == 0);
}

TEST_CASE("cli: unknown scenario fails and lists valid names") {
    std::ostringstream out, err;
    CHECK(run_cli({"run", "--scenario", "bogus", "--out", scratch("bogus").string()}, out, err) != 0);
    CHECK(err.str().find("ddpc-refchange") != std::string::npos);
    CHECK(run_cli({"run"}, out, err) == kExitUsage);
    CHECK(run_cli({"run", "--scenario", "pid", "--override", "nokey=1"}, out, err) == kExitUsage);
    CHECK(run_cli({"run", "--scenario", "pid", "--config", "/nonexistent.cfg"}, out, err) == kExitUsage);
}

TEST_CASE("cli: run writes episode, metrics and resolved config; DDPC_OUT_DIR is the default root") {
    const fs::path root = scratch("root");
    setenv("DDPC_OUT_DIR", root.c_str(), 1);
    std::ostringstream out, err;
    REQUIRE(run_cli({"run", "--scenario", "pid", "--seed", "7", "--override", "duration=2"}, out, err) == 0);
    const fs::path dir = root / "pid-seed7";
    CHECK(fs::exists(dir / "episode.csv"));
    CHECK(fs::exists(dir / "metrics.csv"));
    CHECK(fs::exists(dir / "config.cfg"));
    CHECK(slurp(dir / "config.cfg").find("seed = 7") != std::string::npos);
    unsetenv("DDPC_OUT_DIR");

    // Feeding the resolved config back reproduces the episode byte for byte.
    const fs::path again = scratch("again");
    REQUIRE(run_cli({"run", "--scenario", "pid", "--config", (dir / "config.cfg").string(), "--out", again.string()},
                    out, err) == 0);
    CHECK(slurp(again / "episode.csv") == slurp(dir / "episode.csv"));
}
