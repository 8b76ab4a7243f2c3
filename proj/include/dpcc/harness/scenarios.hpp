#pragma once

// Scenario entry points: closed-loop episodes and the delay probe.

#include "dpcc/harness/config.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dpcc::harness {

/// Closed-loop scenarios; throws std::invalid_argument for delay-probe.
EpisodeLog run_scenario(const ScenarioConfig& cfg);

/// Same episode with the target changed to reference2 at the switch instant.
EpisodeLog scenario_ddpc_refchange(ScenarioConfig cfg);

struct ProbeRecord {
    std::int64_t index = 0;
    std::int64_t sent_us = 0;
    std::optional<double> delay;  // s; absent when lost
};

struct ProbeReport {
    std::string profile;
    std::int64_t count = 0;
    std::int64_t delivered = 0;
    double loss_rate = 0;
    /// Wilson 99% interval for the loss probability.
    double loss_ci_low = 0, loss_ci_high = 0;
    std::optional<double> mean, max, min;
    double configured_mean = 0;
    double configured_loss = 0;
    std::vector<ProbeRecord> records;
};

/// Sends cfg.probe_count timestamped probes, one per Ts, through the
/// configured channel (simulated, or loopback UDP when probe_transport = udp)
/// and reports the one-way delay statistics.
ProbeReport scenario_delay_probe(const ScenarioConfig& cfg);

struct Interval {
    double low, high;
};
/// Wilson score interval for k successes in n trials at normal quantile z.
Interval wilson_interval(std::int64_t k, std::int64_t n, double z = 2.5758293035489004);

/// Probe rows in the episode schema (mode "probe", y = u = 0).
void write_probe_csv(std::ostream& out, const ProbeReport& report, double ts);
void write_probe_report(std::ostream& out, const ProbeReport& report);

}  // namespace dpcc::harness
