#pragma once

// Fixed little-endian datagram layout:
//   0-3   magic "DPCC"        4   version        5   kind
//   6-9   sender IPv4         10-11 sender port
//   12-19 session id          20-27 sequence number
//   28-35 timestamp (us)      36-37 payload count n
//   38..  n IEEE-754 doubles

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dpcc::transport {

inline constexpr std::array<std::uint8_t, 4> kMagic{0x44, 0x50, 0x43, 0x43};
inline constexpr std::uint8_t kWireVersion = 1;
inline constexpr std::size_t kHeaderSize = 38;
inline constexpr std::size_t kMaxPayload = 0xFFFF;

struct NetworkTuple {
    std::array<std::uint8_t, 4> host{};
    std::uint16_t port = 0;

    friend bool operator==(const NetworkTuple&, const NetworkTuple&) = default;
    std::string to_string() const;
    /// "a.b.c.d:port"; throws std::invalid_argument on malformed input or port 0.
    static NetworkTuple parse(std::string_view text);
};

enum class MessageKind : std::uint8_t {
    BindRequest = 0,
    BindAck = 1,
    Measurement = 2,
    ControlSequence = 3,
};

const char* to_string(MessageKind kind);

struct WireMessage {
    std::uint8_t version = kWireVersion;
    MessageKind kind = MessageKind::BindRequest;
    std::uint64_t session_id = 0;
    std::uint64_t seq_no = 0;
    std::int64_t timestamp_us = 0;
    NetworkTuple sender;
    std::vector<double> payload;

    // Payload compared bitwise so NaN payloads still round-trip as equal.
    friend bool operator==(const WireMessage& a, const WireMessage& b);
};

using Bytes = std::vector<std::uint8_t>;

struct EncodeError : std::length_error {
    using std::length_error::length_error;
};

/// Throws EncodeError when the payload count does not fit 16 bits.
Bytes encode(const WireMessage& msg);

enum class DecodeError {
    None,
    BadMagic,
    BadVersion,
    Truncated,
    BadKind,
    PayloadLengthMismatch,
};

const char* to_string(DecodeError err);

struct DecodeResult {
    DecodeError error = DecodeError::None;
    WireMessage message;

    bool ok() const { return error == DecodeError::None; }
};

/// Total on arbitrary bytes: every failure maps to one DecodeError value.
/// Kind-specific payload sizes are enforced (bind: 0, measurement: 2,
/// control sequence: >= 1).
DecodeResult decode(std::span<const std::uint8_t> bytes);

}  // namespace dpcc::transport
