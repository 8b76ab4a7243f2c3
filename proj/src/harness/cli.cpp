#include "dpcc/harness/cli.hpp"

#include "dpcc/harness/config.hpp"
#include "dpcc/harness/csv.hpp"
#include "dpcc/harness/metrics.hpp"
#include "dpcc/harness/scenarios.hpp"
#include "dpcc/transport/udp_link.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <ostream>
#include <thread>

namespace dpcc::harness {

namespace fs = std::filesystem;

namespace {

struct CommonArgs {
    std::string scenario = "ddpc-comp";
    std::string config_path;
    std::string out_dir;
    std::string seed;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonArgs& a, bool scenario_required) {
    auto* s = cmd->add_option("--scenario", a.scenario, "one of: " + scenario_names());
    if (scenario_required)
        s->required();
    cmd->add_option("--config", a.config_path, "flat key = value config file");
    cmd->add_option("--seed", a.seed, "run seed (wins over the config file)");
    cmd->add_option("--override,-o", a.overrides, "key=value, applied after the config file")
        ->allow_extra_args(false);
}

ScenarioConfig load(const CommonArgs& a) {
    const KeyValues file = a.config_path.empty() ? KeyValues{} : read_config_file(a.config_path);
    KeyValues overrides;
    for (const std::string& o : a.overrides)
        overrides.push_back(parse_override(o));
    if (!a.seed.empty())
        overrides.emplace_back("seed", a.seed);
    return resolve(parse_scenario(a.scenario), file, overrides);
}

fs::path output_dir(const CommonArgs& a, const ScenarioConfig& cfg) {
    if (!a.out_dir.empty())
        return a.out_dir;
    const char* root = std::getenv("DDPC_OUT_DIR");
    const fs::path base = root && *root ? fs::path(root) : fs::path("runs");
    return base / (std::string(to_string(cfg.scenario)) + "-seed" + std::to_string(cfg.seed));
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot write " + path.string());
    f << content;
}

template <typename Fn>
std::string render(Fn&& fn) {
    std::ostringstream s;
    fn(s);
    return s.str();
}

void write_episode(const fs::path& dir, const ScenarioConfig& cfg, const EpisodeLog& log) {
    write_file(dir / "episode.csv", episode_csv(log));
    if (!log.records.empty()) {
        const Metrics m = compute_metrics(log, ReferenceTrajectory::from(cfg.runtime));
        write_file(dir / "metrics.csv", render([&](std::ostream& o) { write_metrics_csv(o, m); }));
    } else {
        write_file(dir / "metrics.csv", "steps\n0\n");
    }
}

int cmd_run(const CommonArgs& a, std::ostream& out) {
    const ScenarioConfig cfg = load(a);
    const fs::path dir = output_dir(a, cfg);
    fs::create_directories(dir);
    write_file(dir / "config.cfg", to_config_text(cfg));
    if (cfg.scenario == Scenario::DelayProbe) {
        const ProbeReport report = scenario_delay_probe(cfg);
        write_file(dir / "episode.csv",
                   render([&](std::ostream& o) { write_probe_csv(o, report, cfg.runtime.ts); }));
        write_file(dir / "metrics.csv", render([&](std::ostream& o) { write_probe_report(o, report); }));
        out << "delay-probe: " << report.delivered << "/" << report.count << " delivered, mean "
            << (report.mean ? format_double(*report.mean) : "NA") << " s -> " << dir.string() << "\n";
        return kExitOk;
    }
    const EpisodeLog log = run_scenario(cfg);
    write_episode(dir, cfg, log);
    out << to_string(cfg.scenario) << ": " << log.records.size() << " periods -> " << dir.string() << "\n";
    return kExitOk;
}

RealtimeOptions wall_clock_options(const std::atomic<bool>* stop) {
    RealtimeOptions o;
    o.clock = transport::wall_clock_us;
    o.sleep_until = [](std::int64_t t) {
        const std::int64_t now = transport::wall_clock_us();
        if (t > now)
            std::this_thread::sleep_for(std::chrono::microseconds(t - now));
    };
    o.stop = stop;
    return o;
}

int cmd_cloud(const CommonArgs& a, std::ostream& out) {
    const ScenarioConfig cfg = load(a);
    transport::UdpLink link(cfg.runtime.cloud.port, transport::wall_clock_us);
    out << "cloud listening on port " << link.local_port() << "\n" << std::flush;
    const std::uint64_t sent = serve_cloud(cfg.runtime, cfg.seed, link, wall_clock_options(nullptr));
    out << "cloud sent " << sent << " datagrams\n";
    return kExitOk;
}

int cmd_edge(const CommonArgs& a, std::ostream& out) {
    const ScenarioConfig cfg = load(a);
    transport::UdpLink link(cfg.runtime.edge.port, transport::wall_clock_us);
    link.set_peer(cfg.runtime.cloud);
    const EpisodeLog log = run_edge(cfg.runtime, cfg.seed, link, wall_clock_options(nullptr));
    const fs::path dir = output_dir(a, cfg);
    fs::create_directories(dir);
    write_file(dir / "config.cfg", to_config_text(cfg));
    write_episode(dir, cfg, log);
    out << "edge: " << log.records.size() << " periods -> " << dir.string() << "\n";
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Cloud-edge data-driven predictive control testbed", "dpcc"};
    app.require_subcommand(1);
    CommonArgs run_args, cloud_args, edge_args;
    auto* run = app.add_subcommand("run", "run one scenario in co-simulation");
    add_common(run, run_args, true);
    run->add_option("--out", run_args.out_dir, "output directory (default $DDPC_OUT_DIR/<scenario>-seed<n>)");
    auto* cloud = app.add_subcommand("cloud", "serve the cloud controller over UDP");
    add_common(cloud, cloud_args, false);
    auto* edge = app.add_subcommand("edge", "run the edge plant over UDP against a cloud peer");
    add_common(edge, edge_args, false);
    edge->add_option("--out", edge_args.out_dir, "output directory");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "dpcc: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (run->parsed())
            return cmd_run(run_args, out);
        if (cloud->parsed())
            return cmd_cloud(cloud_args, out);
        return cmd_edge(edge_args, out);
    } catch (const ConfigError& e) {
        err << "dpcc: config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        err << "dpcc: invalid configuration: " << e.what() << "\n";
        return kExitUsage;
    } catch (const EpisodeFailure& e) {
        err << "dpcc: episode failed: " << e.what() << "\n";
        return kExitEpisodeFailure;
    } catch (const std::exception& e) {
        err << "dpcc: " << e.what() << "\n";
        return kExitEpisodeFailure;
    }
}

}  // namespace dpcc::harness
