#include "dpcc/transport/udp_link.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <stdexcept>
#include <string>
#include <system_error>

namespace dpcc::transport {

namespace {

sockaddr_in to_sockaddr(const NetworkTuple& t) {
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(t.port);
    std::memcpy(&addr.sin_addr.s_addr, t.host.data(), 4);
    return addr;
}

NetworkTuple from_sockaddr(const sockaddr_in& addr) {
    NetworkTuple t;
    std::memcpy(t.host.data(), &addr.sin_addr.s_addr, 4);
    t.port = ntohs(addr.sin_port);
    return t;
}

}  // namespace

std::int64_t wall_clock_us() {
    using namespace std::chrono;
    return duration_cast<microseconds>(system_clock::now().time_since_epoch()).count();
}

UdpLink::UdpLink(std::uint16_t local_port, Clock clock) : clock_(std::move(clock)) {
    fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
    if (fd_ < 0)
        throw std::system_error(errno, std::generic_category(), "socket");
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_ANY);
    addr.sin_port = htons(local_port);
    if (::bind(fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) < 0) {
        const int err = errno;
        ::close(fd_);
        throw std::system_error(err, std::generic_category(), "bind port " + std::to_string(local_port));
    }
    socklen_t len = sizeof addr;
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    local_port_ = ntohs(addr.sin_port);
    receiver_ = std::thread([this] { receive_loop(); });
}

UdpLink::~UdpLink() {
    stop_ = true;
    if (receiver_.joinable())
        receiver_.join();
    ::close(fd_);
}

void UdpLink::set_peer(const NetworkTuple& peer) {
    std::lock_guard lock(mutex_);
    peer_ = peer;
}

std::optional<NetworkTuple> UdpLink::peer() const {
    std::lock_guard lock(mutex_);
    return peer_;
}

void UdpLink::send(const Bytes& bytes, std::int64_t /*send_time_us*/) {
    const auto dest = peer();
    if (!dest) {
        ++send_errors_;
        return;
    }
    const sockaddr_in addr = to_sockaddr(*dest);
    const auto n = ::sendto(fd_, bytes.data(), bytes.size(), 0,
                            reinterpret_cast<const sockaddr*>(&addr), sizeof addr);
    if (n < 0 || static_cast<std::size_t>(n) != bytes.size())
        ++send_errors_;
}

std::vector<Datagram> UdpLink::receive(std::int64_t /*now_us*/) {
    std::lock_guard lock(mutex_);
    std::vector<Datagram> out(std::make_move_iterator(inbox_.begin()),
                              std::make_move_iterator(inbox_.end()));
    inbox_.clear();
    return out;
}

void UdpLink::receive_loop() {
    std::vector<std::uint8_t> buffer(65536);
    while (!stop_) {
        pollfd pfd{fd_, POLLIN, 0};
        if (::poll(&pfd, 1, 20) <= 0 || !(pfd.revents & POLLIN))
            continue;
        sockaddr_in from{};
        socklen_t len = sizeof from;
        const auto n = ::recvfrom(fd_, buffer.data(), buffer.size(), 0,
                                  reinterpret_cast<sockaddr*>(&from), &len);
        if (n < 0)
            continue;
        Datagram d;
        d.bytes.assign(buffer.begin(), buffer.begin() + n);
        d.source = from_sockaddr(from);
        d.delivery_us = clock_();
        std::lock_guard lock(mutex_);
        if (!peer_)
            peer_ = d.source;
        inbox_.push_back(std::move(d));
    }
}

}  // namespace dpcc::transport
