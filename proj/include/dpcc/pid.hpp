#pragma once

namespace dpcc {

struct PidGains {
    double kp = 9.0;
    double ki = 3.0;
    double kd = 7.5;
};

/// Positional discrete PID with backward-difference derivative on error and
/// conditional-integration anti-windup.
struct PidState {
    PidGains gains;
    double ts = 0.02;
    double output_min = -1.0;
    double output_max = 1.0;
    double integral = 0;    // accumulated error * Ts
    double prev_error = 0;

    void validate() const;
};

struct PidOutput {
    double command = 0;
    PidState state;
};

PidOutput pid_step(const PidState& state, double reference, double measurement);

}  // namespace dpcc
