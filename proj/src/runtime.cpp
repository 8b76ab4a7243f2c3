#include "dpcc/runtime.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dpcc {

using transport::BindPhase;
using transport::Datagram;
using transport::MessageKind;
using transport::WireMessage;

const char* to_string(PlantModel model) {
    return model == PlantModel::Linear ? "linear" : "nonlinear";
}

const char* to_string(ControlMode mode) {
    return mode == ControlMode::Ddpc ? "ddpc" : "bootstrap";
}

namespace {

constexpr std::pair<unsigned, const char*> kFlagNames[] = {
    {flags::Loss, "loss"},       {flags::Clamp, "clamp"},          {flags::Switch, "switch"},
    {flags::Unbound, "unbound"}, {flags::FitFailure, "fit-failure"}, {flags::Cold, "cold"},
};

}  // namespace

std::string flags_to_string(unsigned f) {
    std::string out;
    for (const auto& [bit, name] : kFlagNames) {
        if (!(f & bit))
            continue;
        if (!out.empty())
            out += '|';
        out += name;
    }
    return out;
}

unsigned flags_from_string(std::string_view text) {
    unsigned f = 0;
    while (!text.empty()) {
        const auto bar = text.find('|');
        const std::string_view name = text.substr(0, bar);
        bool known = false;
        for (const auto& [bit, n] : kFlagNames)
            if (name == n) {
                f |= bit;
                known = true;
            }
        if (!known)
            throw std::invalid_argument("unknown flag '" + std::string(name) + "'");
        text = bar == std::string_view::npos ? std::string_view{} : text.substr(bar + 1);
    }
    return f;
}

std::int64_t RuntimeConfig::ts_us() const { return std::llround(ts * 1e6); }

std::int64_t RuntimeConfig::steps() const { return std::llround(duration / ts); }

void RuntimeConfig::validate() const {
    if (!(ts > 0) || ts_us() < 1)
        throw std::invalid_argument("ts must be at least one microsecond");
    if (shape.horizon < 1 || shape.columns < 1)
        throw std::invalid_argument("n and j must be >= 1");
    if (!(lambda > 0))
        throw std::invalid_argument("lambda must be positive");
    if (!(ridge >= 0))
        throw std::invalid_argument("ridge must be nonnegative");
    plant.validate();
    const double length = plant.params.beam_length;
    if (!(reference >= 0 && reference <= length))
        throw std::invalid_argument("reference must lie on the beam [0, " + std::to_string(length) + "]");
    if (reference2 && !(*reference2 >= 0 && *reference2 <= length))
        throw std::invalid_argument("reference2 must lie on the beam [0, " + std::to_string(length) + "]");
    if (!(gamma0 >= 0 && gamma0 <= length))
        throw std::invalid_argument("gamma0 must lie on the beam");
    if (!(u_min < u_max))
        throw std::invalid_argument("u_min must be below u_max");
    if (pid_direction != 1.0 && pid_direction != -1.0)
        throw std::invalid_argument("pid_direction must be 1 or -1");
    if (!(dither >= 0) || !(ddpc_dither >= 0))
        throw std::invalid_argument("dither amplitudes must be nonnegative");
    if (!(noise_std >= 0))
        throw std::invalid_argument("noise_std must be nonnegative");
    if (!(duration >= 0))
        throw std::invalid_argument("duration must be nonnegative");
    if (max_fit_failures < 0)
        throw std::invalid_argument("max_fit_failures must be nonnegative");
    if (!(bind_retry > 0))
        throw std::invalid_argument("bind_retry must be positive");
    uplink.validate();
    downlink.validate();
    PidState{pid_gains, ts, u_min, u_max}.validate();
}

std::uint64_t uplink_seed(std::uint64_t seed) { return mix_seed(seed, 1); }
std::uint64_t downlink_seed(std::uint64_t seed) { return mix_seed(seed, 2); }

// ---------------------------------------------------------------- cloud

CloudSession::CloudSession(const RuntimeConfig& config, std::uint64_t seed)
    : config_(config), rng_(mix_seed(seed, 3)), window_(config.shape),
      rf_(Vector<double>::Constant(config.shape.horizon, config.reference)) {
    pid_.gains = config.pid_gains;
    pid_.ts = config.ts;
    pid_.output_min = config.u_min;
    pid_.output_max = config.u_max;
}

std::optional<WireMessage> CloudSession::on_datagram(const Datagram& d, std::int64_t now_us) {
    const auto decoded = transport::decode(d.bytes);
    if (!decoded.ok()) {
        ++rejected_;
        return std::nullopt;
    }
    const WireMessage& msg = decoded.message;
    if (!transport::verify_and_accept(bind_, msg, d.source, now_us).accepted()) {
        ++rejected_;
        return std::nullopt;
    }
    switch (msg.kind) {
    case MessageKind::BindRequest: {
        if (msg.session_id != bind_.session_id || !bind_.peer || !(*bind_.peer == msg.sender))
            freshness_.reset();
        auto step = transport::bind_accept(bind_, msg, config_.cloud, ++seq_no_, now_us);
        bind_ = step.state;
        return step.message;
    }
    case MessageKind::Measurement:
        if (!freshness_.accept(msg.seq_no)) {
            ++rejected_;
            return std::nullopt;
        }
        return on_measurement(msg, now_us);
    case MessageKind::BindAck:
    case MessageKind::ControlSequence:
        break;
    }
    ++rejected_;
    return std::nullopt;
}

WireMessage CloudSession::on_measurement(const WireMessage& msg, std::int64_t now_us) {
    if (msg.payload.size() != 2)
        throw DimensionError("on_measurement: payload must be [u, y]");
    const double u = msg.payload[0];
    const double y = msg.payload[1];
    window_.push(u, y);
    ++received_;
    last_fit_failed_ = false;

    const Eigen::Index n = config_.shape.horizon;
    if (mode_ == ControlMode::Bootstrap && config_.ddpc_enabled &&
        received_ >= config_.shape.capacity() + 1) {
        mode_ = ControlMode::Ddpc;
        switch_step_ = now_us;
        if (config_.reference2)
            rf_.setConstant(*config_.reference2);
    }

    Vector<double> values(n);
    if (mode_ == ControlMode::Bootstrap) {
        auto out = pid_step(pid_, rf_(0), y);
        pid_ = out.state;
        double command = config_.pid_direction * out.command;
        if (config_.dither > 0)
            command += rng_.uniform(-config_.dither, config_.dither);
        values.setConstant(std::clamp(command, config_.u_min, config_.u_max));
    } else {
        try {
            coeffs_ = fit_predictor(make_hankel_set(window_), config_.ridge);
            consecutive_fit_failures_ = 0;
        } catch (const SingularSystemError& e) {
            ++fit_failures_total_;
            last_fit_failed_ = true;
            if (!coeffs_ || ++consecutive_fit_failures_ > config_.max_fit_failures)
                throw EpisodeFailure(std::string("predictor fit failed: ") + e.what());
        }
        values = optimal_control(*coeffs_, past_vector(window_), rf_, config_.lambda).values;
        if (config_.ddpc_dither > 0)
            for (Eigen::Index i = 0; i < n; ++i)
                values(i) += rng_.uniform(-config_.ddpc_dither, config_.ddpc_dither);
    }

    WireMessage reply;
    reply.kind = MessageKind::ControlSequence;
    reply.sender = config_.cloud;
    reply.session_id = bind_.session_id;
    reply.seq_no = ++seq_no_;
    reply.timestamp_us = now_us;
    reply.payload.assign(values.data(), values.data() + values.size());
    return reply;
}

// ----------------------------------------------------------------- edge

EdgeSession::EdgeSession(const RuntimeConfig& config, std::uint64_t seed)
    : config_(config), noise_(mix_seed(seed, 4)) {
    comp_.ts = config.ts;
    plant_.gamma = config.gamma0;
    if (config.plant_model == PlantModel::Linear)
        linear_ = discretize(linearize<double>(config.plant), config.ts);
}

void EdgeSession::on_datagram(const Datagram& d, std::int64_t now_us) {
    const auto decoded = transport::decode(d.bytes);
    if (!decoded.ok() || !transport::verify_and_accept(bind_, decoded.message, d.source, now_us).accepted()) {
        ++rejected_;
        return;
    }
    const WireMessage& msg = decoded.message;
    if (msg.kind == MessageKind::BindAck) {
        bind_ = transport::bind_complete(bind_, msg, now_us);
        return;
    }
    if (msg.kind != MessageKind::ControlSequence || !freshness_.accept(msg.seq_no)) {
        ++rejected_;
        return;
    }
    ControlSequence<double> seq;
    seq.values = Eigen::Map<const Vector<double>>(msg.payload.data(), msg.payload.size());
    seq.origin_time_us = msg.timestamp_us;
    seq.step_index = static_cast<std::int64_t>(msg.seq_no);
    pending_ = std::move(seq);
}

double EdgeSession::select(std::int64_t now_us, EdgeTick& out) {
    const std::int64_t ts_us = config_.ts_us();
    if (pending_) {
        ControlSequence<double> seq = std::move(*pending_);
        pending_.reset();
        const std::int64_t age = std::max<std::int64_t>(0, now_us - seq.origin_time_us);
        out.t_delay = static_cast<double>(age) * 1e-6;
        const std::int64_t tau = config_.compensate ? delay_units_us(age, ts_us) : 0;
        const Selection sel = select_input(comp_, seq, tau);
        out.tau = sel.index;
        if (sel.clamped)
            out.flags |= flags::Clamp;
        return sel.u;
    }
    out.flags |= flags::Loss;
    if (!comp_.last_sequence) {
        out.flags |= flags::Cold;
        return last_u_;
    }
    out.t_delay = static_cast<double>(now_us - comp_.last_sequence->origin_time_us) * 1e-6;
    if (!config_.compensate) {
        out.tau = comp_.last_selected_index;
        return last_u_;
    }
    const double u = *on_loss(comp_);
    out.tau = std::min<std::int64_t>(comp_.last_selected_index + comp_.consecutive_losses,
                                     comp_.last_sequence->size() - 1);
    return u;
}

PlantState EdgeSession::step_plant(double u) const {
    if (config_.plant_model == PlantModel::Linear)
        return step_linear(plant_, u, linear_);
    return step_nonlinear(plant_, u, config_.plant, config_.ts);
}

EdgeTick EdgeSession::tick(std::int64_t now_us) {
    EdgeTick out;
    const auto retry_us = std::llround(config_.bind_retry * 1e6);
    if (!bind_.bound(now_us)) {
        if (bind_.phase != BindPhase::AwaitingAck || now_us - bind_.requested_at_us >= retry_us) {
            auto step = transport::bind_initiate(bind_, config_.edge, config_.cloud, config_.session_id,
                                                 ++seq_no_, now_us);
            bind_ = step.state;
            if (step.message)
                out.outgoing.push_back(*step.message);
        }
    } else {
        auto step = transport::bind_refresh(bind_, config_.edge, seq_no_ + 1, now_us);
        if (step.message) {
            ++seq_no_;
            out.outgoing.push_back(*step.message);
        }
        bind_ = step.state;
    }

    out.u = std::clamp(select(now_us, out), config_.u_min, config_.u_max);
    out.y = measure(plant_, config_.noise_std, noise_);
    plant_ = step_plant(out.u);
    last_u_ = out.u;

    if (bind_.bound(now_us)) {
        WireMessage m;
        m.kind = MessageKind::Measurement;
        m.sender = config_.edge;
        m.session_id = bind_.session_id;
        m.seq_no = ++seq_no_;
        m.timestamp_us = now_us;
        m.payload = {out.u, out.y};
        out.outgoing.push_back(std::move(m));
    } else {
        out.flags |= flags::Unbound;
    }
    return out;
}

// ---------------------------------------------------------- co-simulation

EpisodeLog run_episode(const RuntimeConfig& config, std::uint64_t seed) {
    config.validate();
    transport::ChannelModel up = config.uplink;
    transport::ChannelModel down = config.downlink;
    up.seed = uplink_seed(seed);
    down.seed = downlink_seed(seed);
    transport::SimulatedChannel uplink(up);
    transport::SimulatedChannel downlink(down);
    transport::SimulatedLink cloud_link(downlink, uplink, config.cloud);
    transport::SimulatedLink edge_link(uplink, downlink, config.edge);

    CloudSession cloud(config, seed);
    EdgeSession edge(config, seed);
    EpisodeLog log;
    const std::int64_t steps = config.steps();
    const std::int64_t ts_us = config.ts_us();
    log.records.reserve(static_cast<std::size_t>(steps));

    for (std::int64_t k = 0; k < steps; ++k) {
        const std::int64_t now = k * ts_us;
        unsigned extra = 0;
        const ControlMode mode_before = cloud.mode();
        for (const Datagram& d : cloud_link.receive(now)) {
            const std::int64_t before = cloud.received();
            if (auto reply = cloud.on_datagram(d, now))
                cloud_link.send(transport::encode(*reply), now);
            if (cloud.received() > before) {
                log.cloud_window_pairs.emplace_back(cloud.window().inputs()(cloud.window().size() - 1),
                                                    cloud.window().outputs()(cloud.window().size() - 1));
                if (cloud.last_fit_failed())
                    extra |= flags::FitFailure;
            }
        }
        if (mode_before != cloud.mode())
            extra |= flags::Switch;
        for (const Datagram& d : edge_link.receive(now))
            edge.on_datagram(d, now);
        EdgeTick t = edge.tick(now);
        for (const WireMessage& m : t.outgoing)
            edge_link.send(transport::encode(m), now);
        if (!edge.plant_state().finite())
            throw EpisodeFailure("plant state diverged at t = " + std::to_string(static_cast<double>(now) / 1e6));

        EpisodeRecord r;
        r.step = k;
        r.t = static_cast<double>(now) / 1e6;
        r.y = t.y;
        r.u = t.u;
        r.tau = t.tau;
        r.t_delay = t.t_delay;
        r.mode = cloud.mode();
        r.flags = t.flags | extra;
        log.records.push_back(r);
    }
    log.uplink_sent = uplink.sent();
    log.uplink_dropped = uplink.dropped();
    log.downlink_sent = downlink.sent();
    log.downlink_dropped = downlink.dropped();
    return log;
}

// ------------------------------------------------------------ wall clock

std::uint64_t serve_cloud(const RuntimeConfig& config, std::uint64_t seed, transport::DatagramLink& link,
                          const RealtimeOptions& options) {
    config.validate();
    CloudSession cloud(config, seed);
    std::uint64_t sent = 0;
    std::optional<std::int64_t> started;
    const std::int64_t lifetime_us = std::llround(config.duration * 1e6) + 5'000'000;
    for (;;) {
        if (options.stop && options.stop->load())
            break;
        const std::int64_t now = options.clock();
        if (started && now - *started > lifetime_us)
            break;
        for (const Datagram& d : link.receive(now)) {
            auto reply = cloud.on_datagram(d, now);
            if (!reply)
                continue;
            if (!started)
                started = now;
            link.send(transport::encode(*reply), now);
            ++sent;
        }
        options.sleep_until(now + options.poll_us);
    }
    return sent;
}

EpisodeLog run_edge(const RuntimeConfig& config, std::uint64_t seed, transport::DatagramLink& link,
                    const RealtimeOptions& options) {
    config.validate();
    EdgeSession edge(config, seed);
    EpisodeLog log;
    const std::int64_t t0 = options.clock();
    const std::int64_t ts_us = config.ts_us();
    for (std::int64_t k = 0; k < config.steps(); ++k) {
        if (options.stop && options.stop->load())
            break;
        options.sleep_until(t0 + k * ts_us);
        const std::int64_t now = options.clock();
        for (const Datagram& d : link.receive(now))
            edge.on_datagram(d, now);
        EdgeTick t = edge.tick(now);
        for (const WireMessage& m : t.outgoing)
            link.send(transport::encode(m), now);
        if (!edge.plant_state().finite())
            throw EpisodeFailure("plant state diverged");
        EpisodeRecord r;
        r.step = k;
        r.t = static_cast<double>(k * ts_us) / 1e6;
        r.y = t.y;
        r.u = t.u;
        r.tau = t.tau;
        r.t_delay = t.t_delay;
        // The edge cannot see the cloud mode; a non-constant sequence marks data-driven control.
        r.mode = edge.compensator().last_sequence && !edge.compensator().last_sequence->values.isConstant(
                                                         edge.compensator().last_sequence->values(0))
                     ? ControlMode::Ddpc
                     : ControlMode::Bootstrap;
        r.flags = t.flags;
        if (r.mode == ControlMode::Ddpc && (log.records.empty() || log.records.back().mode != ControlMode::Ddpc))
            r.flags |= flags::Switch;
        log.records.push_back(r);
    }
    return log;
}

}  // namespace dpcc
