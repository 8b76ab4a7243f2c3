// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "dpcc/harness/config.hpp"
#include "dpcc/harness/csv.hpp"
#include "dpcc/harness/metrics.hpp"
#include "dpcc/harness/scenarios.hpp"
#include "dpcc/plant.hpp"
#include "dpcc/predictor.hpp"
#include "dpcc/random.hpp"
#include "dpcc/transport/bind.hpp"
#include "dpcc/transport/wire.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace dpcc;
using namespace dpcc::harness;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

constexpr int kSeeds = 10;

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

ScenarioConfig scenario(Scenario s, std::uint64_t seed, std::vector<std::string> overrides = {}) {
    KeyValues o;
    for (const auto& text : overrides)
        o.push_back(parse_override(text));
    o.push_back(parse_override("seed=" + std::to_string(seed)));
    return resolve(s, {}, o);
}

Metrics episode_metrics(const ScenarioConfig& cfg) {
    return compute_metrics(run_scenario(cfg), ReferenceTrajectory::from(cfg.runtime));
}

Outcome predictor_exactness() {
    const auto start = std::chrono::steady_clock::now();
    Rng rng(1);
    const auto model = discretize(linearize<double>(PlantConfig{}), 0.02);
    const HankelShape shape{15, 60};
    const Eigen::Index n = shape.horizon;
    const Eigen::Index length = shape.capacity() + 4 * n;
    Vector<double> u(length), y(length);
    Eigen::Vector4d x = Eigen::Vector4d::Zero();
    for (Eigen::Index k = 0; k < length; ++k) {
        u(k) = rng.uniform(-1, 1);
        y(k) = (model.C * x)(0);
        x = model.A * x + model.B * u(k);
    }
    DataWindow<double> w(shape);
    for (Eigen::Index k = 0; k < shape.capacity(); ++k)
        w.push(u(k), y(k));
    const auto c = fit_predictor(make_hankel_set(w), 0.0, FitMethod::PseudoInverse);
    double worst = 0;
    for (Eigen::Index s = shape.capacity(); s + n <= length; s += n / 2) {
        Vector<double> wp(2 * n);
        wp << y.segment(s - n, n), u.segment(s - n, n);
        const Vector<double> truth = y.segment(s, n);
        worst = std::max(worst, (predict_outputs(c, wp, u.segment(s, n)) - truth).norm() / truth.norm());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {worst <= 1e-6 && secs <= 1.0, fmt("max relative error %.2e, %.3f s", worst, secs)};
}

Outcome control_optimality() {
    Rng rng(2);
    double worst_grad = 0, worst_iter = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.next_u64() % 14);
        PredictorCoefficients<double> c;
        c.Lw.resize(n, 2 * n);
        c.Lu.resize(n, n);
        for (Eigen::Index i = 0; i < c.Lw.size(); ++i)
            c.Lw.data()[i] = rng.normal();
        for (Eigen::Index i = 0; i < c.Lu.size(); ++i)
            c.Lu.data()[i] = rng.normal();
        Vector<double> wp(2 * n), rf(n);
        for (Eigen::Index i = 0; i < 2 * n; ++i)
            wp(i) = rng.normal();
        for (Eigen::Index i = 0; i < n; ++i)
            rf(i) = rng.uniform(-1, 1);
        const double lambda = std::pow(10.0, rng.uniform(-3, 1));
        const Vector<double> uf = optimal_control(c, wp, rf, lambda).values;

        const double h = 1e-6;
        for (Eigen::Index i = 0; i < n; ++i) {
            Vector<double> up = uf, dn = uf;
            up(i) += h;
            dn(i) -= h;
            const double g = (tracking_cost(c, wp, rf, up, lambda) - tracking_cost(c, wp, rf, dn, lambda)) / (2 * h);
            worst_grad = std::max(worst_grad, std::abs(g));
        }

        // Steepest descent with exact line search on the quadratic J.
        const Matrix<double> hess = c.Lu.transpose() * c.Lu + lambda * Matrix<double>::Identity(n, n);
        const Vector<double> b = c.Lu.transpose() * (rf - c.Lw * wp);
        Vector<double> v = Vector<double>::Zero(n);
        Vector<double> r = b;
        for (int it = 0; it < 200000 && r.norm() > 1e-14 * (1 + b.norm()); ++it) {
            const Vector<double> hr = hess * r;
            v += (r.squaredNorm() / r.dot(hr)) * r;
            r = b - hess * v;
        }
        worst_iter = std::max(worst_iter, (uf - v).cwiseAbs().maxCoeff() / std::max(1.0, v.cwiseAbs().maxCoeff()));
    }
    return {worst_grad <= 1e-6 && worst_iter <= 1e-8,
            fmt("max |dJ/du| %.2e, max deviation from iterative minimizer %.2e", worst_grad, worst_iter)};
}

Outcome settles(Scenario s, double horizon) {
    int ok = 0;
    double worst = 0;
    for (int seed = 1; seed <= kSeeds; ++seed) {
        const Metrics m = episode_metrics(scenario(s, seed));
        if (m.settle_time && *m.settle_time <= horizon) {
            ++ok;
            worst = std::max(worst, *m.settle_time);
        }
    }
    return {ok == kSeeds, fmt("%.0f/10 seeds settled, slowest %.2f s", ok, worst)};
}

Outcome compensation_benefit() {
    int ok = 0;
    double worst_ratio = 0;
    std::string per_seed;
    const std::vector<std::string> channel{"base_delay=0.02", "jitter_kind=uniform", "jitter=0.005",
                                           "loss_prob=0.004"};
    for (int seed = 1; seed <= kSeeds; ++seed) {
        const double comp = episode_metrics(scenario(Scenario::DdpcComp, seed, channel)).rms_error;
        const double nocomp = episode_metrics(scenario(Scenario::DdpcNoComp, seed, channel)).rms_error;
        const double ratio = comp / nocomp;
        ok += comp <= nocomp;
        worst_ratio = std::max(worst_ratio, ratio);
        per_seed += fmt(" %.3f", ratio);
    }
    return {ok == kSeeds, fmt("comp <= nocomp in %.0f/10 seeds, worst rms ratio %.3f;", ok, worst_ratio) +
                              " ratios" + per_seed};
}

Outcome pid_baseline() {
    const Metrics m = episode_metrics(scenario(Scenario::Pid, 1));
    return {m.settle_time.has_value(), m.settle_time ? fmt("settled after %.2f s", *m.settle_time) : "did not settle"};
}

Outcome delay_probe() {
    bool ok = true;
    std::string detail;
    for (const char* profile : {"bj-0800", "gz-0800", "bj-1100", "gz-1100", "bj-1400", "gz-1400", "bj-1700", "gz-1700"}) {
        const auto r = scenario_delay_probe(
            scenario(Scenario::DelayProbe, 1, {std::string("delay_profile=") + profile, "probe_count=10000"}));
        const double err = std::abs(*r.mean - r.configured_mean) / r.configured_mean;
        ok = ok && err <= 0.05;
        detail += std::string(" ") + profile + fmt(" %.2f%%", 100 * err);
    }
    for (double p : {0.002, 0.004, 0.006}) {
        const auto r = scenario_delay_probe(
            scenario(Scenario::DelayProbe, 3, {"loss_prob=" + format_double(p), "probe_count=10000"}));
        const bool in = r.loss_ci_low <= p && p <= r.loss_ci_high;
        ok = ok && in;
        detail += fmt(" loss %.3f->%.4f", p, r.loss_rate) + (in ? "" : "(outside CI)");
    }
    return {ok, "mean error" + detail};
}

Outcome transport_safety() {
    using namespace dpcc::transport;
    int crashes = 0;
    Rng rng(8);
    WireMessage m;
    m.kind = MessageKind::ControlSequence;
    m.payload = {0.1, 0.2, 0.3};
    const Bytes good = encode(m);
    for (int i = 0; i < 100000; ++i) {
        Bytes b;
        if (i % 2 == 0) {
            b.resize(rng.next_u64() % 96);
            for (auto& byte : b)
                byte = static_cast<std::uint8_t>(rng.next_u64());
        } else {
            b = good;
            b.resize(rng.next_u64() % (good.size() + 8));
            for (int f = 0; f < 3 && !b.empty(); ++f)
                b[rng.next_u64() % b.size()] = static_cast<std::uint8_t>(rng.next_u64());
        }
        try {
            const DecodeResult r = decode(b);
            if (r.ok() && encode(r.message) != Bytes(b.begin(), b.end()))
                ++crashes;
        } catch (...) {
            ++crashes;
        }
    }

    const auto edge = NetworkTuple::parse("192.168.0.10:40000");
    const auto cloud = NetworkTuple::parse("10.0.0.1:9000");
    const auto req = bind_initiate({}, edge, cloud, 7, 1, 0);
    const BindState bound = bind_accept({}, *req.message, cloud, 1, 0).state;
    WireMessage data;
    data.kind = MessageKind::Measurement;
    data.session_id = 7;
    data.sender = edge;
    data.payload = {0, 0};
    const bool at129 = verify_and_accept(bound, data, edge, 129'000'000).accepted();
    const bool at131 = !verify_and_accept(bound, data, edge, 131'000'000).accepted();
    auto other = edge;
    other.port = 40001;
    const bool port = verify_and_accept(bound, data, other, 1'000'000).reason == RejectReason::PortMismatch;
    return {crashes == 0 && at129 && at131 && port,
            fmt("%.0f failures in 1e5 fuzz inputs", crashes) + "; 129 s " + (at129 ? "accepted" : "REJECTED") +
                ", 131 s " + (at131 ? "rejected" : "ACCEPTED") + ", port mismatch " +
                (port ? "rejected" : "ACCEPTED")};
}

Outcome determinism() {
    const auto cfg = scenario(Scenario::DdpcComp, 42);
    const std::string a = episode_csv(run_scenario(cfg));
    const std::string b = episode_csv(run_scenario(cfg));
    return {a == b && !a.empty(), fmt("%.0f bytes, ", static_cast<double>(a.size())) + (a == b ? "identical" : "DIFFER")};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"predictor exactness", predictor_exactness},
        {"control optimality", control_optimality},
        {"ddpc-comp settles", [] { return settles(Scenario::DdpcComp, 15.0); }},
        {"compensation benefit", compensation_benefit},
        {"reference change settles", [] { return settles(Scenario::DdpcRefChange, 15.0); }},
        {"pid baseline settles", pid_baseline},
        {"delay probe statistics", delay_probe},
        {"transport safety", transport_safety},
        {"determinism", determinism},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
