#pragma once

// Session establishment: the edge registers its internal tuple with a
// BIND_REQ, the cloud learns the peer and answers BIND_ACK, every later
// datagram is checked against the registered port and session, and a bind
// lapses after its lifetime unless refreshed.

#include "dpcc/transport/wire.hpp"

#include <cstdint>
#include <optional>

namespace dpcc::transport {

inline constexpr std::int64_t kBindLifetimeUs = 130'000'000;
inline constexpr std::int64_t kBindKeepaliveUs = 120'000'000;

enum class BindPhase { Unbound, AwaitingAck, Bound };

const char* to_string(BindPhase phase);

struct BindState {
    BindPhase phase = BindPhase::Unbound;
    std::optional<NetworkTuple> peer;
    std::uint64_t session_id = 0;
    std::int64_t bound_at_us = 0;
    std::int64_t requested_at_us = 0;
    std::int64_t lifetime_us = kBindLifetimeUs;

    bool expired(std::int64_t now_us) const {
        return phase == BindPhase::Bound && now_us - bound_at_us >= lifetime_us;
    }
    bool bound(std::int64_t now_us) const { return phase == BindPhase::Bound && !expired(now_us); }
};

struct BindStep {
    std::optional<WireMessage> message;
    BindState state;
};

/// Edge side. Emits a BIND_REQ carrying the local (internal) tuple when the
/// state is UNBOUND or its bind has expired; a live bind is left untouched.
/// `peer` is the cloud tuple the request is addressed to.
BindStep bind_initiate(const BindState& state, const NetworkTuple& local, const NetworkTuple& peer,
                       std::uint64_t session_id, std::uint64_t seq_no, std::int64_t now_us);

/// Edge side keepalive: a live bind older than `keepalive_us` gets a fresh
/// BIND_REQ while staying BOUND until the acknowledgement lands.
BindStep bind_refresh(const BindState& state, const NetworkTuple& local, std::uint64_t seq_no,
                      std::int64_t now_us, std::int64_t keepalive_us = kBindKeepaliveUs);

/// Edge side: BIND_ACK for the pending session completes the bind.
BindState bind_complete(const BindState& state, const WireMessage& ack, std::int64_t now_us);

/// Cloud side: register (or refresh) the peer from a BIND_REQ and build the ack.
BindStep bind_accept(const BindState& state, const WireMessage& request, const NetworkTuple& local,
                     std::uint64_t seq_no, std::int64_t now_us);

enum class RejectReason { None, PortMismatch, UnknownSession, Unbound };

const char* to_string(RejectReason reason);

struct Verdict {
    RejectReason reason = RejectReason::None;
    bool accepted() const { return reason == RejectReason::None; }
};

/// Port and session check for an incoming datagram. Bind-phase messages pass
/// without a live bind (BIND_REQ always; BIND_ACK while awaiting it); a cloud
/// that already holds a live bind only takes refresh requests from the same
/// session. Data messages need a live bind, the registered session and a
/// sender port equal to the observed source port.
Verdict verify_and_accept(const BindState& state, const WireMessage& msg,
                          const NetworkTuple& observed_source, std::int64_t now_us);

/// Per-sender high-watermark on seq_no; rejects duplicates and stale datagrams.
class FreshnessFilter {
public:
    bool accept(std::uint64_t seq_no) {
        if (seen_ && seq_no <= highest_)
            return false;
        seen_ = true;
        highest_ = seq_no;
        return true;
    }
    std::uint64_t highest() const { return highest_; }
    void reset() { seen_ = false; highest_ = 0; }

private:
    bool seen_ = false;
    std::uint64_t highest_ = 0;
};

}  // namespace dpcc::transport
