#pragma once

// DatagramLink over a real UDP socket (IPv4). A background thread receives
// into a single-consumer queue drained by the session loop.

#include "dpcc/transport/channel.hpp"

#include <atomic>
#include <cstdint>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <thread>

namespace dpcc::transport {

class UdpLink final : public DatagramLink {
public:
    using Clock = std::function<std::int64_t()>;

    /// Binds 0.0.0.0:local_port (0 picks an ephemeral port).
    UdpLink(std::uint16_t local_port, Clock clock);
    ~UdpLink() override;

    UdpLink(const UdpLink&) = delete;
    UdpLink& operator=(const UdpLink&) = delete;

    /// Destination for send(); a cloud learns it from the first datagram
    /// when none is configured.
    void set_peer(const NetworkTuple& peer);
    std::optional<NetworkTuple> peer() const;
    std::uint16_t local_port() const { return local_port_; }

    void send(const Bytes& bytes, std::int64_t send_time_us) override;
    std::vector<Datagram> receive(std::int64_t now_us) override;

    std::uint64_t send_errors() const { return send_errors_; }

private:
    void receive_loop();

    int fd_ = -1;
    std::uint16_t local_port_ = 0;
    Clock clock_;
    mutable std::mutex mutex_;
    std::deque<Datagram> inbox_;
    std::optional<NetworkTuple> peer_;
    std::atomic<bool> stop_{false};
    std::atomic<std::uint64_t> send_errors_{0};
    std::thread receiver_;
};

/// Microseconds since the Unix epoch from the system clock; both ends of a
/// real deployment are assumed to share a synchronized wall clock.
std::int64_t wall_clock_us();

}  // namespace dpcc::transport
