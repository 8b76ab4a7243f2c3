#include "dpcc/transport/bind.hpp"

namespace dpcc::transport {

const char* to_string(BindPhase phase) {
    switch (phase) {
    case BindPhase::Unbound: return "UNBOUND";
    case BindPhase::AwaitingAck: return "AWAITING_ACK";
    case BindPhase::Bound: return "BOUND";
    }
    return "?";
}

const char* to_string(RejectReason reason) {
    switch (reason) {
    case RejectReason::None: return "none";
    case RejectReason::PortMismatch: return "port-mismatch";
    case RejectReason::UnknownSession: return "unknown-session";
    case RejectReason::Unbound: return "unbound";
    }
    return "?";
}

namespace {

WireMessage bind_message(MessageKind kind, const NetworkTuple& local, std::uint64_t session_id,
                         std::uint64_t seq_no, std::int64_t now_us) {
    WireMessage m;
    m.kind = kind;
    m.sender = local;
    m.session_id = session_id;
    m.seq_no = seq_no;
    m.timestamp_us = now_us;
    return m;
}

}  // namespace

BindStep bind_initiate(const BindState& state, const NetworkTuple& local, const NetworkTuple& peer,
                       std::uint64_t session_id, std::uint64_t seq_no, std::int64_t now_us) {
    BindStep step{std::nullopt, state};
    if (state.bound(now_us))
        return step;
    step.state.phase = BindPhase::AwaitingAck;
    step.state.peer = peer;
    step.state.session_id = session_id;
    step.state.requested_at_us = now_us;
    step.message = bind_message(MessageKind::BindRequest, local, session_id, seq_no, now_us);
    return step;
}

BindStep bind_refresh(const BindState& state, const NetworkTuple& local, std::uint64_t seq_no,
                      std::int64_t now_us, std::int64_t keepalive_us) {
    BindStep step{std::nullopt, state};
    if (!state.bound(now_us) || now_us - state.bound_at_us < keepalive_us)
        return step;
    // One request per keepalive interval until the ack arrives.
    if (state.requested_at_us > state.bound_at_us && now_us - state.requested_at_us < keepalive_us / 12)
        return step;
    step.state.requested_at_us = now_us;
    step.message = bind_message(MessageKind::BindRequest, local, state.session_id, seq_no, now_us);
    return step;
}

BindState bind_complete(const BindState& state, const WireMessage& ack, std::int64_t now_us) {
    BindState next = state;
    if (ack.kind != MessageKind::BindAck || ack.session_id != state.session_id)
        return next;
    if (state.phase == BindPhase::AwaitingAck || state.phase == BindPhase::Bound) {
        next.phase = BindPhase::Bound;
        next.bound_at_us = now_us;
    }
    return next;
}

BindStep bind_accept(const BindState& state, const WireMessage& request, const NetworkTuple& local,
                     std::uint64_t seq_no, std::int64_t now_us) {
    BindStep step{std::nullopt, state};
    if (request.kind != MessageKind::BindRequest)
        return step;
    step.state.phase = BindPhase::Bound;
    step.state.peer = request.sender;
    step.state.session_id = request.session_id;
    step.state.bound_at_us = now_us;
    step.message = bind_message(MessageKind::BindAck, local, request.session_id, seq_no, now_us);
    return step;
}

Verdict verify_and_accept(const BindState& state, const WireMessage& msg,
                          const NetworkTuple& observed_source, std::int64_t now_us) {
    if (msg.sender.port != observed_source.port)
        return {RejectReason::PortMismatch};
    switch (msg.kind) {
    case MessageKind::BindRequest:
        // A live bind is only replaced by its own session or by the same peer.
        if (state.bound(now_us) && msg.session_id != state.session_id &&
            !(state.peer && *state.peer == msg.sender))
            return {RejectReason::UnknownSession};
        return {};
    case MessageKind::BindAck:
        if (state.phase == BindPhase::Unbound)
            return {RejectReason::Unbound};
        if (msg.session_id != state.session_id)
            return {RejectReason::UnknownSession};
        return {};
    case MessageKind::Measurement:
    case MessageKind::ControlSequence:
        break;
    }
    if (!state.bound(now_us))
        return {RejectReason::Unbound};
    if (msg.session_id != state.session_id)
        return {RejectReason::UnknownSession};
    if (state.peer && state.peer->port != msg.sender.port)
        return {RejectReason::PortMismatch};
    return {};
}

}  // namespace dpcc::transport
