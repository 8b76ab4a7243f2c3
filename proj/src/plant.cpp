#include "dpcc/plant.hpp"

#include "dpcc/random.hpp"

#include <algorithm>
#include <cmath>

namespace dpcc {

void BallBeamParams::validate() const {
    const bool ok = beam_length > 0 && gear_radius > 0 && ball_radius > 0 && ball_inertia > 0 &&
                    ball_mass > 0 && gravity > 0;
    if (!ok)
        throw std::invalid_argument("ball-beam parameters must all be strictly positive");
}

BallBeamParams default_params() { return BallBeamParams{}; }

void PlantConfig::validate() const {
    params.validate();
    if (actuator == Actuator::Servo && !(servo_wn > 0 && servo_zeta >= 0))
        throw std::invalid_argument("servo_wn must be positive and servo_zeta nonnegative");
    if (!(beam_angle_limit > 0))
        throw std::invalid_argument("beam_angle_limit must be positive");
    if (substeps < 1)
        throw std::invalid_argument("substeps must be >= 1");
}

double ball_acceleration(const PlantState& s, const BallBeamParams& p) {
    const double ratio = p.gear_radius / p.beam_length;
    const double alpha = s.theta * ratio;
    const double alpha_dot = s.theta_dot * ratio;
    return (p.ball_mass * s.gamma * alpha_dot * alpha_dot - p.ball_mass * p.gravity * std::sin(alpha)) /
           p.rolling_mass();
}

namespace {

Eigen::Vector4d derivative(const Eigen::Vector4d& x, double u, const PlantConfig& cfg) {
    const PlantState s = PlantState::from(x);
    double theta_ddot = u;
    if (cfg.actuator == Actuator::Servo)
        theta_ddot = cfg.servo_wn * cfg.servo_wn * (u - s.theta) -
                     2.0 * cfg.servo_zeta * cfg.servo_wn * s.theta_dot;
    return {s.gamma_dot, ball_acceleration(s, cfg.params), s.theta_dot, theta_ddot};
}

}  // namespace

PlantState step_nonlinear(const PlantState& s, double u, const PlantConfig& cfg, double ts) {
    if (!(ts > 0))
        throw std::invalid_argument("step_nonlinear: Ts must be positive");
    const double h = ts / cfg.substeps;
    Eigen::Vector4d x = s.vector();
    for (int i = 0; i < cfg.substeps; ++i) {
        const Eigen::Vector4d k1 = derivative(x, u, cfg);
        const Eigen::Vector4d k2 = derivative(x + 0.5 * h * k1, u, cfg);
        const Eigen::Vector4d k3 = derivative(x + 0.5 * h * k2, u, cfg);
        const Eigen::Vector4d k4 = derivative(x + h * k3, u, cfg);
        x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    PlantState next = PlantState::from(x);

    const double theta_limit = cfg.beam_angle_limit * cfg.params.beam_length / cfg.params.gear_radius;
    if (std::abs(next.theta) > theta_limit) {
        next.theta = std::copysign(theta_limit, next.theta);
        next.theta_dot = 0;
    }
    // Inelastic stops at the rail ends.
    if (next.gamma < 0 || next.gamma > cfg.params.beam_length) {
        next.gamma = std::clamp(next.gamma, 0.0, cfg.params.beam_length);
        next.gamma_dot = 0;
    }
    return next;
}

PlantState step_linear(const PlantState& s, double u, const LinearModel<double>& model) {
    if (!model.discrete)
        throw std::invalid_argument("step_linear: model must be discrete");
    return PlantState::from(model.A * s.vector() + model.B * u);
}

double measure(const PlantState& s, double noise_std, Rng& rng) {
    if (noise_std < 0)
        throw std::invalid_argument("measure: noise_std must be nonnegative");
    if (noise_std == 0)
        return s.gamma;
    return s.gamma + noise_std * rng.normal();
}

}  // namespace dpcc
