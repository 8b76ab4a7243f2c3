#pragma once

// Ball-beam plant: Lagrangian dynamics, the linearized state-space model and
// zero-order-hold discretization.

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <stdexcept>

namespace dpcc {

class Rng;

struct BallBeamParams {
    double beam_length = 0.4;      // L, m
    double gear_radius = 0.04;     // d, m
    double ball_radius = 0.015;    // R, m
    double ball_inertia = 9.9e-6;  // Jb, kg m^2
    double ball_mass = 0.11;       // m, kg
    double gravity = 9.81;         // g, m/s^2

    /// Jb / R^2 + m, the effective rolling mass.
    double rolling_mass() const { return ball_inertia / (ball_radius * ball_radius) + ball_mass; }
    /// m g / (Jb/R^2 + m): ball acceleration per radian of beam angle.
    double beam_gain() const { return ball_mass * gravity / rolling_mass(); }
    /// m d g / (L (Jb/R^2 + m)): ball acceleration per radian of gear angle.
    double gear_gain() const { return beam_gain() * gear_radius / beam_length; }

    void validate() const;
};

BallBeamParams default_params();

struct PlantState {
    double gamma = 0;      // ball position, m
    double gamma_dot = 0;  // ball velocity, m/s
    double theta = 0;      // gear angle, rad
    double theta_dot = 0;  // gear angular velocity, rad/s

    Eigen::Vector4d vector() const { return {gamma, gamma_dot, theta, theta_dot}; }
    static PlantState from(const Eigen::Vector4d& x) { return {x(0), x(1), x(2), x(3)}; }
    bool finite() const { return vector().allFinite(); }
};

enum class Actuator {
    /// theta'' = u, the state-space model verbatim.
    DoubleIntegrator,
    /// Position servo: theta'' = wn^2 (u - theta) - 2 zeta wn theta'.
    Servo,
};

struct PlantConfig {
    BallBeamParams params;
    Actuator actuator = Actuator::Servo;
    double servo_wn = 30.0;
    double servo_zeta = 0.9;
    double beam_angle_limit = 0.25;  // |alpha| bound, rad
    int substeps = 1;

    void validate() const;
};

template <typename Scalar = double>
struct LinearModel {
    Eigen::Matrix<Scalar, 4, 4> A = Eigen::Matrix<Scalar, 4, 4>::Zero();
    Eigen::Matrix<Scalar, 4, 1> B = Eigen::Matrix<Scalar, 4, 1>::Zero();
    Eigen::Matrix<Scalar, 1, 4> C = Eigen::Matrix<Scalar, 1, 4>::Zero();
    bool discrete = false;
    Scalar ts = 0;
};

/// Continuous model about alpha = 0 with theta'' = u.
template <typename Scalar = double>
LinearModel<Scalar> linearize(const BallBeamParams& p) {
    LinearModel<Scalar> m;
    m.A(0, 1) = 1;
    m.A(1, 2) = static_cast<Scalar>(-p.gear_gain());
    m.A(2, 3) = 1;
    m.B(3) = 1;
    m.C(0) = 1;
    return m;
}

/// Continuous model for the configured actuator.
template <typename Scalar = double>
LinearModel<Scalar> linearize(const PlantConfig& cfg) {
    LinearModel<Scalar> m = linearize<Scalar>(cfg.params);
    if (cfg.actuator == Actuator::Servo) {
        const Scalar wn = static_cast<Scalar>(cfg.servo_wn);
        m.A(3, 2) = -wn * wn;
        m.A(3, 3) = -2 * static_cast<Scalar>(cfg.servo_zeta) * wn;
        m.B(3) = wn * wn;
    }
    return m;
}

/// Exact zero-order-hold discretization from the augmented matrix
/// M = [A B; 0 0] Ts: Ad, Bd are blocks of exp(M). A nilpotent M is summed as
/// its finite Taylor series; anything else goes through Eigen's matrix exponential.
template <typename Scalar>
LinearModel<Scalar> discretize(const LinearModel<Scalar>& model, Scalar ts) {
    if (model.discrete)
        throw std::invalid_argument("discretize: model is already discrete");
    if (!(ts > 0))
        throw std::invalid_argument("discretize: Ts must be positive");
    using Aug = Eigen::Matrix<Scalar, 5, 5>;
    Aug m = Aug::Zero();
    m.template topLeftCorner<4, 4>() = model.A * ts;
    m.template topRightCorner<4, 1>() = model.B * ts;

    Aug power = Aug::Identity();
    Aug sum = Aug::Identity();
    bool nilpotent = false;
    Scalar factorial = 1;
    for (int k = 1; k <= 5; ++k) {
        power = (power * m).eval();
        if (power.isZero(0)) {
            nilpotent = true;
            break;
        }
        factorial *= static_cast<Scalar>(k);
        sum += power / factorial;
    }
    const Aug e = nilpotent ? sum : Aug(m.exp());

    LinearModel<Scalar> d;
    d.A = e.template topLeftCorner<4, 4>();
    d.B = e.template topRightCorner<4, 1>();
    d.C = model.C;
    d.discrete = true;
    d.ts = ts;
    return d;
}

/// gamma'' from the Lagrangian equation of motion.
double ball_acceleration(const PlantState& s, const BallBeamParams& p);

/// One control period of the nonlinear plant under gear-angle command u,
/// integrated with classic RK4 (cfg.substeps steps per period), followed by
/// the beam-angle stop and the rail-end clamp on the ball.
PlantState step_nonlinear(const PlantState& s, double u, const PlantConfig& cfg, double ts);

/// Same step on the linear model of the configured actuator.
PlantState step_linear(const PlantState& s, double u, const LinearModel<double>& discrete_model);

/// y = gamma + N(0, noise_std^2).
double measure(const PlantState& s, double noise_std, Rng& rng);

}  // namespace dpcc
