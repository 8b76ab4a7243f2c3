#pragma once

// Episode metrics, computed purely from the log.

#include "dpcc/runtime.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>

namespace dpcc::harness {

/// Reference before and from the switch instant on.
struct ReferenceTrajectory {
    double before = 0.2;
    double after = 0.2;

    static ReferenceTrajectory from(const RuntimeConfig& cfg) {
        return {cfg.reference, cfg.reference2.value_or(cfg.reference)};
    }
};

inline constexpr double kSettleBand = 0.02;

struct Metrics {
    std::int64_t steps = 0;
    /// Start of the scored segment: the switch instant, or 0 without a switch.
    std::optional<double> switch_time;
    double rms_error = 0;
    /// Seconds after the segment start until y enters and stays in the band.
    std::optional<double> settle_time;
    double overshoot = 0;
    std::int64_t clamp_count = 0;
    std::int64_t loss_count = 0;
    std::int64_t fit_failure_count = 0;
    std::int64_t unbound_count = 0;
    std::optional<double> delay_mean, delay_max, delay_min;
};

/// Throws std::invalid_argument on an empty log.
Metrics compute_metrics(const EpisodeLog& log, const ReferenceTrajectory& ref,
                        double band = kSettleBand);

/// Header line plus one value line; absent values are written as NA.
void write_metrics_csv(std::ostream& out, const Metrics& m);

}  // namespace dpcc::harness
