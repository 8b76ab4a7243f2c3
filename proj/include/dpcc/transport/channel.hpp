#pragma once

// Seeded datagram channel with per-datagram loss and delay, plus the
// transport-agnostic link interface the sessions talk through.

#include "dpcc/random.hpp"
#include "dpcc/transport/wire.hpp"

#include <cstdint>
#include <functional>
#include <queue>
#include <vector>

namespace dpcc::transport {

enum class JitterKind { None, Uniform, Exponential };

const char* to_string(JitterKind kind);
JitterKind parse_jitter_kind(std::string_view text);

struct ChannelModel {
    double base_delay = 0.02;  // s
    JitterKind jitter_kind = JitterKind::Uniform;
    double jitter = 0.005;     // uniform half-width or exponential mean, s
    double loss_prob = 0.004;
    std::uint64_t seed = 0;

    void validate() const;
    /// Mean one-way delay before clamping at zero.
    double nominal_mean() const;
};

struct Datagram {
    Bytes bytes;
    NetworkTuple source;
    std::int64_t sent_us = 0;
    std::int64_t delivery_us = 0;
};

struct SendOutcome {
    bool dropped = false;
    std::int64_t delivery_us = 0;
};

/// Decisions are a pure function of (seed, send order): each send draws the
/// loss decision and, if delivered, one delay sample.
class SimulatedChannel {
public:
    explicit SimulatedChannel(const ChannelModel& model);

    SendOutcome send(Bytes bytes, const NetworkTuple& source, std::int64_t now_us);
    /// Everything due at or before now_us, ordered by delivery time then send order.
    std::vector<Datagram> deliver(std::int64_t now_us);

    /// One delay draw in microseconds, max(0, base + jitter).
    std::int64_t sample_delay_us();

    const ChannelModel& model() const { return model_; }
    std::uint64_t sent() const { return sent_; }
    std::uint64_t dropped() const { return dropped_; }
    std::size_t in_flight() const { return queue_.size(); }

private:
    struct Pending {
        std::int64_t delivery_us;
        std::uint64_t order;
        Datagram datagram;
    };
    struct Later {
        bool operator()(const Pending& a, const Pending& b) const {
            return a.delivery_us != b.delivery_us ? a.delivery_us > b.delivery_us : a.order > b.order;
        }
    };

    ChannelModel model_;
    Rng rng_;
    std::priority_queue<Pending, std::vector<Pending>, Later> queue_;
    std::uint64_t sent_ = 0;
    std::uint64_t dropped_ = 0;
};

/// One endpoint's view of the network: send to the peer, drain what arrived.
class DatagramLink {
public:
    virtual ~DatagramLink() = default;
    virtual void send(const Bytes& bytes, std::int64_t send_time_us) = 0;
    virtual std::vector<Datagram> receive(std::int64_t now_us) = 0;
};

/// Endpoint over a pair of simulated channels (outgoing, incoming).
class SimulatedLink final : public DatagramLink {
public:
    SimulatedLink(SimulatedChannel& outgoing, SimulatedChannel& incoming, const NetworkTuple& local)
        : out_(outgoing), in_(incoming), local_(local) {}

    void send(const Bytes& bytes, std::int64_t send_time_us) override {
        out_.get().send(bytes, local_, send_time_us);
    }
    std::vector<Datagram> receive(std::int64_t now_us) override { return in_.get().deliver(now_us); }

private:
    std::reference_wrapper<SimulatedChannel> out_;
    std::reference_wrapper<SimulatedChannel> in_;
    NetworkTuple local_;
};

}  // namespace dpcc::transport
