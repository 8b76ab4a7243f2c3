#include "dpcc/compensator.hpp"

#include <doctest.h>

using namespace dpcc;

namespace {

ControlSequence<double> ramp(Eigen::Index n, double offset = 0) {
    ControlSequence<double> s;
    s.values = Vector<double>::LinSpaced(n, offset, offset + static_cast<double>(n - 1));
    return s;
}

}  // namespace

TEST_CASE("delay units round to nearest with ties up") {
    CHECK(delay_units(0.0, 0.02) == 0);
    CHECK(delay_units(0.009, 0.02) == 0);
    CHECK(delay_units(0.01, 0.02) == 1);
    CHECK(delay_units(0.05, 0.02) == 3);
    CHECK(delay_units(0.0218, 0.02) == 1);
    CHECK(delay_units(0.07, 0.02) == 4);
    CHECK(delay_units_us(10'000, 20'000) == 1);
    CHECK(delay_units_us(9'999, 20'000) == 0);
    CHECK(delay_units_us(50'000, 20'000) == 3);
    CHECK_THROWS_AS(delay_units(-0.01, 0.02), std::invalid_argument);
    CHECK_THROWS_AS(delay_units_us(10, 0), std::invalid_argument);
}

TEST_CASE("property: delay_units is monotone and agrees with the microsecond form") {
    std::int64_t prev = 0;
    for (std::int64_t us = 0; us <= 200'000; us += 7) {
        const auto t = delay_units_us(us, 20'000);
        CHECK(t >= prev);
        prev = t;
        CHECK(delay_units(static_cast<double>(us) * 1e-6, 0.02) == t);
    }
}

TEST_CASE("select_input picks entry tau and clamps to N - 1") {
    CompensatorState st;
    const auto seq = ramp(5);
    CHECK(select_input(st, seq, 0).u == 0);
    CHECK(select_input(st, seq, 3).u == 3);
    const auto sel = select_input(st, seq, 9);
    CHECK(sel.u == 4);
    CHECK(sel.clamped);
    CHECK(st.clamp_count == 1);
    CHECK_THROWS_AS(select_input(st, seq, -1), std::invalid_argument);
}

TEST_CASE("property: select_input never reads out of bounds") {
    for (Eigen::Index n = 1; n <= 8; ++n)
        for (std::int64_t tau = 0; tau < 20; ++tau) {
            CompensatorState st;
            const auto sel = select_input(st, ramp(n), tau);
            CHECK(sel.index >= 0);
            CHECK(sel.index < n);
            CHECK(sel.clamped == (tau >= n));
        }
}

TEST_CASE("loss walks the stored sequence forward and recovers on a new sequence") {
    CompensatorState st;
    CHECK_FALSE(on_loss(st).has_value());
    select_input(st, ramp(5), 1);
    CHECK(*on_loss(st) == 2);
    CHECK(*on_loss(st) == 3);
    CHECK(*on_loss(st) == 4);
    CHECK(*on_loss(st) == 4);  // burst longer than N: last entry
    CHECK(st.consecutive_losses == 4);
    const auto sel = select_input(st, ramp(5, 100), 0);
    CHECK(sel.u == 100);
    CHECK(st.consecutive_losses == 0);
    CHECK(*on_loss(st) == 101);
}
