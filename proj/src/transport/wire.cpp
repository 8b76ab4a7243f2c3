#include "dpcc/transport/wire.hpp"

#include <algorithm>
#include <bit>
#include <charconv>

namespace dpcc::transport {

namespace {

template <typename T>
void put(Bytes& out, T value) {
    using U = std::make_unsigned_t<T>;
    auto bits = static_cast<U>(value);
    for (std::size_t i = 0; i < sizeof(T); ++i)
        out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

template <typename T>
T get(std::span<const std::uint8_t> in, std::size_t offset) {
    using U = std::make_unsigned_t<T>;
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
        bits |= static_cast<U>(static_cast<U>(in[offset + i]) << (8 * i));
    return static_cast<T>(bits);
}

bool payload_size_ok(MessageKind kind, std::size_t n) {
    switch (kind) {
    case MessageKind::BindRequest:
    case MessageKind::BindAck:
        return n == 0;
    case MessageKind::Measurement:
        return n == 2;
    case MessageKind::ControlSequence:
        return n >= 1;
    }
    return false;
}

}  // namespace

std::string NetworkTuple::to_string() const {
    return std::to_string(host[0]) + "." + std::to_string(host[1]) + "." + std::to_string(host[2]) +
           "." + std::to_string(host[3]) + ":" + std::to_string(port);
}

NetworkTuple NetworkTuple::parse(std::string_view text) {
    NetworkTuple t;
    const char* p = text.data();
    const char* end = text.data() + text.size();
    for (int i = 0; i < 4; ++i) {
        unsigned octet = 0;
        auto [next, ec] = std::from_chars(p, end, octet);
        if (ec != std::errc{} || octet > 255 || next == end || *next != (i < 3 ? '.' : ':'))
            throw std::invalid_argument("malformed network tuple: " + std::string(text));
        t.host[i] = static_cast<std::uint8_t>(octet);
        p = next + 1;
    }
    unsigned port = 0;
    auto [next, ec] = std::from_chars(p, end, port);
    if (ec != std::errc{} || next != end || port == 0 || port > 0xFFFF)
        throw std::invalid_argument("malformed network tuple: " + std::string(text));
    t.port = static_cast<std::uint16_t>(port);
    return t;
}

const char* to_string(MessageKind kind) {
    switch (kind) {
    case MessageKind::BindRequest: return "BIND_REQ";
    case MessageKind::BindAck: return "BIND_ACK";
    case MessageKind::Measurement: return "MEASUREMENT";
    case MessageKind::ControlSequence: return "CONTROL_SEQ";
    }
    return "?";
}

const char* to_string(DecodeError err) {
    switch (err) {
    case DecodeError::None: return "none";
    case DecodeError::BadMagic: return "bad-magic";
    case DecodeError::BadVersion: return "bad-version";
    case DecodeError::Truncated: return "truncated";
    case DecodeError::BadKind: return "bad-kind";
    case DecodeError::PayloadLengthMismatch: return "payload-length-mismatch";
    }
    return "?";
}

bool operator==(const WireMessage& a, const WireMessage& b) {
    auto same_bits = [](double x, double y) {
        return std::bit_cast<std::uint64_t>(x) == std::bit_cast<std::uint64_t>(y);
    };
    return a.version == b.version && a.kind == b.kind && a.session_id == b.session_id &&
           a.seq_no == b.seq_no && a.timestamp_us == b.timestamp_us && a.sender == b.sender &&
           std::equal(a.payload.begin(), a.payload.end(), b.payload.begin(), b.payload.end(), same_bits);
}

Bytes encode(const WireMessage& msg) {
    if (msg.payload.size() > kMaxPayload)
        throw EncodeError("encode: payload of " + std::to_string(msg.payload.size()) +
                          " values exceeds 16-bit count");
    Bytes out;
    out.reserve(kHeaderSize + 8 * msg.payload.size());
    out.insert(out.end(), kMagic.begin(), kMagic.end());
    out.push_back(msg.version);
    out.push_back(static_cast<std::uint8_t>(msg.kind));
    out.insert(out.end(), msg.sender.host.begin(), msg.sender.host.end());
    put<std::uint16_t>(out, msg.sender.port);
    put<std::uint64_t>(out, msg.session_id);
    put<std::uint64_t>(out, msg.seq_no);
    put<std::int64_t>(out, msg.timestamp_us);
    put<std::uint16_t>(out, static_cast<std::uint16_t>(msg.payload.size()));
    for (double v : msg.payload)
        put<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
    return out;
}

DecodeResult decode(std::span<const std::uint8_t> bytes) {
    DecodeResult r;
    auto fail = [&r](DecodeError e) {
        r.error = e;
        return r;
    };
    const std::size_t have = bytes.size();
    const std::size_t magic_seen = std::min(have, kMagic.size());
    if (!std::equal(bytes.begin(), bytes.begin() + magic_seen, kMagic.begin()))
        return fail(DecodeError::BadMagic);
    if (have < 5)
        return fail(DecodeError::Truncated);
    if (bytes[4] != kWireVersion)
        return fail(DecodeError::BadVersion);
    if (have < 6)
        return fail(DecodeError::Truncated);
    if (bytes[5] > static_cast<std::uint8_t>(MessageKind::ControlSequence))
        return fail(DecodeError::BadKind);
    if (have < kHeaderSize)
        return fail(DecodeError::Truncated);

    WireMessage& m = r.message;
    m.version = bytes[4];
    m.kind = static_cast<MessageKind>(bytes[5]);
    std::copy_n(bytes.begin() + 6, 4, m.sender.host.begin());
    m.sender.port = get<std::uint16_t>(bytes, 10);
    m.session_id = get<std::uint64_t>(bytes, 12);
    m.seq_no = get<std::uint64_t>(bytes, 20);
    m.timestamp_us = get<std::int64_t>(bytes, 28);
    const std::size_t n = get<std::uint16_t>(bytes, 36);
    const std::size_t expected = kHeaderSize + 8 * n;
    if (have < expected)
        return fail(DecodeError::Truncated);
    if (have > expected || !payload_size_ok(m.kind, n))
        return fail(DecodeError::PayloadLengthMismatch);
    m.payload.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        m.payload[i] = std::bit_cast<double>(get<std::uint64_t>(bytes, kHeaderSize + 8 * i));
    return r;
}

}  // namespace dpcc::transport
