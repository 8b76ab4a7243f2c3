#include "dpcc/plant.hpp"
#include "dpcc/random.hpp"

#include <doctest.h>

#include <cmath>

using namespace dpcc;

TEST_CASE("Table II parameters give the documented linear gain") {
    const BallBeamParams p = default_params();
    CHECK(p.rolling_mass() == doctest::Approx(9.9e-6 / (0.015 * 0.015) + 0.11));
    CHECK(p.gear_gain() == doctest::Approx(0.7007).epsilon(1e-4));
    const auto m = linearize<double>(p);
    CHECK(m.A(0, 1) == 1);
    CHECK(m.A(1, 2) == doctest::Approx(-0.7007).epsilon(1e-4));
    CHECK(m.A(2, 3) == 1);
    CHECK(m.B(3) == 1);
    CHECK(m.C(0) == 1);
    CHECK(m.A.cwiseAbs().sum() == doctest::Approx(2 + p.gear_gain()));
}

TEST_CASE("invalid parameters are rejected") {
    BallBeamParams p;
    p.ball_mass = 0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    PlantConfig c;
    c.substeps = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    CHECK_THROWS_AS(discretize(linearize<double>(default_params()), 0.0), std::invalid_argument);
    Rng rng(1);
    CHECK_THROWS_AS(measure(PlantState{}, -1.0, rng), std::invalid_argument);
}

TEST_CASE("oracle: nilpotent ZOH discretization equals the closed-form chain of integrators") {
    const double ts = 0.02;
    const double k = -default_params().gear_gain();
    const auto d = discretize(linearize<double>(default_params()), ts);
    Eigen::Matrix4d a;
    a << 1, ts, k * ts * ts / 2, k * ts * ts * ts / 6,
         0, 1, k * ts, k * ts * ts / 2,
         0, 0, 1, ts,
         0, 0, 0, 1;
    Eigen::Vector4d b(k * std::pow(ts, 4) / 24, k * ts * ts * ts / 6, ts * ts / 2, ts);
    CHECK((d.A - a).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK((d.B - b).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK(d.discrete);
    CHECK_THROWS_AS(discretize(d, ts), std::invalid_argument);
}

TEST_CASE("oracle: servo discretization matches a fine RK4 integration of the linear model") {
    const PlantConfig cfg;
    const auto c = linearize<double>(cfg);
    const double ts = 0.02;
    const auto d = discretize(c, ts);
    Eigen::Vector4d x(0.1, -0.05, 0.3, 0.2);
    const double u = 0.4;
    const int steps = 2000;
    const double h = ts / steps;
    const auto f = [&](const Eigen::Vector4d& s) -> Eigen::Vector4d { return c.A * s + c.B * u; };
    Eigen::Vector4d y = x;
    for (int i = 0; i < steps; ++i) {
        const Eigen::Vector4d k1 = f(y), k2 = f(y + h / 2 * k1), k3 = f(y + h / 2 * k2), k4 = f(y + h * k3);
        y += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    CHECK(((d.A * x + d.B * u) - y).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("property: nonlinear step converges to the linear model for small angles") {
    PlantConfig cfg;
    cfg.substeps = 20;
    const auto d = discretize(linearize<double>(cfg), 0.02);
    Rng rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        PlantState s{0.2 + rng.uniform(-0.01, 0.01), rng.uniform(-1e-3, 1e-3), rng.uniform(-1e-3, 1e-3),
                     rng.uniform(-1e-3, 1e-3)};
        const double u = rng.uniform(-1e-3, 1e-3);
        const PlantState nl = step_nonlinear(s, u, cfg, 0.02);
        const PlantState ln = step_linear(s, u, d);
        // What remains is the quadratic Coriolis term m*gamma*alpha'^2.
        CHECK((nl.vector() - ln.vector()).cwiseAbs().maxCoeff() <= 1e-7);
    }
}

TEST_CASE("equilibrium at any ball position with a level beam") {
    const PlantConfig cfg;
    const PlantState s{0.17, 0, 0, 0};
    const PlantState n = step_nonlinear(s, 0.0, cfg, 0.02);
    CHECK((n.vector() - s.vector()).norm() == 0.0);
    CHECK(ball_acceleration(PlantState{0.2, 0, 0.1, 0}, cfg.params) < 0);
}

TEST_CASE("rail ends and beam stops clamp the state") {
    PlantConfig cfg;
    PlantState s{0.001, -1.0, 0, 0};
    const PlantState n = step_nonlinear(s, 0.0, cfg, 0.02);
    CHECK(n.gamma == 0.0);
    CHECK(n.gamma_dot == 0.0);
    cfg.actuator = Actuator::DoubleIntegrator;
    PlantState t{0.2, 0, 2.49, 10.0};
    const PlantState m = step_nonlinear(t, 100.0, cfg, 0.02);
    CHECK(m.theta == doctest::Approx(cfg.beam_angle_limit * cfg.params.beam_length / cfg.params.gear_radius));
    CHECK(m.theta_dot == 0.0);
}

TEST_CASE("measurement noise is seeded and optional") {
    Rng a(4), b(4);
    const PlantState s{0.2, 0, 0, 0};
    CHECK(measure(s, 0.0, a) == 0.2);
    Rng a2(4);
    CHECK(measure(s, 1e-3, a2) == measure(s, 1e-3, b));
}
