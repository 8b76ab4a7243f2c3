#include "dpcc/compensator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dpcc {

std::int64_t delay_units(double t_delay, double ts) {
    if (!(t_delay >= 0) || !(ts > 0))
        throw std::invalid_argument("delay_units: need t_delay >= 0 and Ts > 0");
    // The slack absorbs representation error in ratios such as 0.05 / 0.02.
    return static_cast<std::int64_t>(std::floor(t_delay / ts + 0.5 + 1e-9));
}

std::int64_t delay_units_us(std::int64_t t_delay_us, std::int64_t ts_us) {
    if (t_delay_us < 0 || ts_us <= 0)
        throw std::invalid_argument("delay_units_us: need t_delay >= 0 and Ts > 0");
    return (2 * t_delay_us + ts_us) / (2 * ts_us);
}

Selection select_input(CompensatorState& state, const ControlSequence<double>& seq, std::int64_t tau) {
    if (seq.size() < 1)
        throw DimensionError("select_input: empty control sequence");
    if (tau < 0)
        throw std::invalid_argument("select_input: negative delay units");
    Selection sel;
    const Eigen::Index last = seq.size() - 1;
    sel.clamped = tau > last;
    sel.index = sel.clamped ? last : static_cast<Eigen::Index>(tau);
    sel.u = seq.values(sel.index);
    if (sel.clamped)
        ++state.clamp_count;
    state.last_sequence = seq;
    state.last_selected_index = sel.index;
    state.consecutive_losses = 0;
    return sel;
}

std::optional<double> on_loss(CompensatorState& state) {
    if (!state.last_sequence)
        return std::nullopt;
    const Eigen::Index last = state.last_sequence->size() - 1;
    const std::int64_t wanted = state.last_selected_index + state.consecutive_losses + 1;
    ++state.consecutive_losses;
    return state.last_sequence->values(std::min<std::int64_t>(wanted, last));
}

}  // namespace dpcc
