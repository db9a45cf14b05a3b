#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "core/value.hpp"

namespace agentest::runtime {

// Wire frame: 4-byte big-endian length N, then N bytes of JSON
//   {"kind": "message"|"migrate"|"ack"|"nack",
//    "body": base64(canonical bytes), "mac": hex(HMAC-SHA256(body bytes))}
enum class FrameKind { message, migrate, ack, nack };

inline constexpr std::size_t k_max_frame = 16u << 20;

std::string_view to_string(FrameKind k);

struct Frame {
    FrameKind kind = FrameKind::message;
    Value body;
};

// Complete frame including the length prefix.
Bytes encode_frame(FrameKind kind, const Value& body, const Bytes& secret);

// Parses and authenticates a complete frame (prefix included).
// Throws Error(bad_frame) for malformed input, Error(mac_invalid) for a bad MAC.
Frame decode_frame(const Bytes& frame, const Bytes& secret);

// Length announced by a 4-byte prefix; throws bad_frame above k_max_frame.
std::size_t frame_length(const std::uint8_t* prefix);

Bytes nack_frame(std::string_view code, std::string_view detail, const Bytes& secret);
Bytes ack_frame(const Value& body, const Bytes& secret);

// Returns the ack body, or rethrows a nack as the Error it encodes.
Value expect_ack(const Frame& f);

} // namespace agentest::runtime
