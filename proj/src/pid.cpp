#include "dpcc/pid.hpp"

#include <algorithm>
#include <stdexcept>

namespace dpcc {

void PidState::validate() const {
    if (!(ts > 0))
        throw std::invalid_argument("PID: Ts must be positive");
    if (!(output_min < output_max))
        throw std::invalid_argument("PID: output_min must be below output_max");
}

PidOutput pid_step(const PidState& state, double reference, double measurement) {
    state.validate();
    const double error = reference - measurement;
    const double integral = state.integral + error * state.ts;
    const double raw = state.gains.kp * error + state.gains.ki * integral +
                       state.gains.kd * (error - state.prev_error) / state.ts;

    PidOutput out;
    out.state = state;
    out.state.prev_error = error;
    if (raw >= state.output_min && raw <= state.output_max)
        out.state.integral = integral;
    out.command = std::clamp(raw, state.output_min, state.output_max);
    return out;
}

}  // namespace dpcc
