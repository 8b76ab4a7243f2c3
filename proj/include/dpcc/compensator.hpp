#pragma once

// Edge-side delay compensation: pick the entry of the received predictive
// sequence that corresponds to the current period, and walk the stored
// sequence forward while no new sequence arrives.

#include "dpcc/predictor.hpp"

#include <cstdint>
#include <optional>

namespace dpcc {

/// Measured delay in whole sampling periods, nearest integer with ties rounded up.
std::int64_t delay_units(double t_delay, double ts);
std::int64_t delay_units_us(std::int64_t t_delay_us, std::int64_t ts_us);

struct CompensatorState {
    double ts = 0.02;
    std::optional<ControlSequence<double>> last_sequence;
    Eigen::Index last_selected_index = 0;
    std::int64_t consecutive_losses = 0;
    std::int64_t clamp_count = 0;
};

struct Selection {
    double u = 0;
    Eigen::Index index = 0;
    bool clamped = false;
};

/// Entry min(tau, N-1) of seq; stores seq as the fallback and clears the loss run.
Selection select_input(CompensatorState& state, const ControlSequence<double>& seq, std::int64_t tau);

/// Next stored entry after a period without a sequence, or nullopt on cold start.
std::optional<double> on_loss(CompensatorState& state);

}  // namespace dpcc
