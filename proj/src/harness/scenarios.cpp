#include "dpcc/harness/scenarios.hpp"

#include "dpcc/compensator.hpp"
#include "dpcc/harness/csv.hpp"
#include "dpcc/transport/udp_link.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace dpcc::harness {

EpisodeLog run_scenario(const ScenarioConfig& cfg) {
    if (cfg.scenario == Scenario::DelayProbe)
        throw std::invalid_argument("run_scenario: delay-probe produces a probe report, not an episode");
    if (cfg.scenario == Scenario::DdpcRefChange)
        return scenario_ddpc_refchange(cfg);
    return run_episode(cfg.runtime, cfg.seed);
}

EpisodeLog scenario_ddpc_refchange(ScenarioConfig cfg) {
    if (!cfg.runtime.reference2)
        throw ConfigError("ddpc-refchange needs reference2");
    cfg.runtime.ddpc_enabled = true;
    return run_episode(cfg.runtime, cfg.seed);
}

Interval wilson_interval(std::int64_t k, std::int64_t n, double z) {
    if (n <= 0)
        throw std::invalid_argument("wilson_interval: n must be positive");
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(k) / nn;
    const double z2 = z * z;
    const double centre = (p + z2 / (2 * nn)) / (1 + z2 / nn);
    const double half = z * std::sqrt(p * (1 - p) / nn + z2 / (4 * nn * nn)) / (1 + z2 / nn);
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

namespace {

transport::WireMessage probe_message(const ScenarioConfig& cfg, std::int64_t i, std::int64_t now_us) {
    transport::WireMessage m;
    m.kind = transport::MessageKind::Measurement;
    m.sender = cfg.runtime.edge;
    m.session_id = cfg.runtime.session_id;
    m.seq_no = static_cast<std::uint64_t>(i) + 1;
    m.timestamp_us = now_us;
    m.payload = {0.0, static_cast<double>(i)};
    return m;
}

void collect(ProbeReport& report, const std::vector<transport::Datagram>& arrivals) {
    for (const auto& d : arrivals) {
        const auto decoded = transport::decode(d.bytes);
        if (!decoded.ok())
            continue;
        const auto i = static_cast<std::int64_t>(decoded.message.seq_no) - 1;
        if (i < 0 || i >= report.count || report.records[i].delay)
            continue;
        report.records[i].delay = static_cast<double>(d.delivery_us - decoded.message.timestamp_us) * 1e-6;
    }
}

}  // namespace

ProbeReport scenario_delay_probe(const ScenarioConfig& cfg) {
    cfg.validate();
    const transport::ChannelModel& model = cfg.runtime.uplink;
    ProbeReport report;
    report.profile = cfg.delay_profile;
    report.count = cfg.probe_count;
    report.configured_mean = model.nominal_mean();
    report.configured_loss = model.loss_prob;
    report.records.resize(static_cast<std::size_t>(cfg.probe_count));
    const std::int64_t ts_us = cfg.runtime.ts_us();

    if (cfg.probe_transport == ProbeTransport::Simulated) {
        transport::ChannelModel m = model;
        m.seed = uplink_seed(cfg.seed);
        transport::SimulatedChannel channel(m);
        for (std::int64_t i = 0; i < cfg.probe_count; ++i) {
            report.records[i] = {i, i * ts_us, std::nullopt};
            channel.send(transport::encode(probe_message(cfg, i, i * ts_us)), cfg.runtime.edge, i * ts_us);
            collect(report, channel.deliver(i * ts_us));
        }
        collect(report, channel.deliver(INT64_MAX));
    } else {
        transport::UdpLink receiver(cfg.probe_port, transport::wall_clock_us);
        transport::UdpLink sender(0, transport::wall_clock_us);
        sender.set_peer(transport::NetworkTuple::parse("127.0.0.1:" + std::to_string(receiver.local_port())));
        const auto start = std::chrono::steady_clock::now();
        for (std::int64_t i = 0; i < cfg.probe_count; ++i) {
            std::this_thread::sleep_until(start + std::chrono::microseconds(i * ts_us));
            const std::int64_t now = transport::wall_clock_us();
            report.records[i] = {i, now, std::nullopt};
            sender.send(transport::encode(probe_message(cfg, i, now)), now);
            collect(report, receiver.receive(now));
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(200));
        collect(report, receiver.receive(transport::wall_clock_us()));
    }

    double sum = 0;
    for (const ProbeRecord& r : report.records) {
        if (!r.delay)
            continue;
        ++report.delivered;
        sum += *r.delay;
        report.max = std::max(report.max.value_or(*r.delay), *r.delay);
        report.min = std::min(report.min.value_or(*r.delay), *r.delay);
    }
    if (report.delivered > 0)
        report.mean = sum / static_cast<double>(report.delivered);
    const std::int64_t lost = report.count - report.delivered;
    report.loss_rate = static_cast<double>(lost) / static_cast<double>(report.count);
    const Interval ci = wilson_interval(lost, report.count);
    report.loss_ci_low = ci.low;
    report.loss_ci_high = ci.high;
    return report;
}

void write_probe_csv(std::ostream& out, const ProbeReport& report, double ts) {
    out << kEpisodeHeader << '\n';
    for (const ProbeRecord& r : report.records) {
        out << r.index << ',' << format_double(static_cast<double>(r.index) * ts) << ",0,0,";
        if (r.delay)
            out << delay_units(*r.delay, ts) << ',' << format_double(*r.delay) << ",probe,\n";
        else
            out << "0,nan,probe,loss\n";
    }
}

void write_probe_report(std::ostream& out, const ProbeReport& report) {
    const auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string("NA"); };
    out << "profile,count,delivered,loss_rate,loss_ci_low,loss_ci_high,delay_mean,delay_max,delay_min,"
           "configured_mean,configured_loss\n";
    out << report.profile << ',' << report.count << ',' << report.delivered << ','
        << format_double(report.loss_rate) << ',' << format_double(report.loss_ci_low) << ','
        << format_double(report.loss_ci_high) << ',' << opt(report.mean) << ',' << opt(report.max) << ','
        << opt(report.min) << ',' << format_double(report.configured_mean) << ','
        << format_double(report.configured_loss) << '\n';
}

}  // namespace dpcc::harness
