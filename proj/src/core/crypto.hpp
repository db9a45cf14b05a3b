#pragma once

#include <span>
#include <string>
#include <string_view>

#include "core/value.hpp"

namespace agentest::crypto {

Bytes hmac_sha256(std::span<const std::uint8_t> key, std::span<const std::uint8_t> data);
bool constant_time_equal(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);

std::string to_hex(std::span<const std::uint8_t> data);
Bytes from_hex(std::string_view hex);

std::string base64_encode(std::span<const std::uint8_t> data);
Bytes base64_decode(std::string_view text);

Bytes random_bytes(std::size_t n);
// Hex string carrying `bits` random bits (rounded up to whole bytes).
std::string random_token(std::size_t bits = 128);

inline std::span<const std::uint8_t> as_bytes(std::string_view s)
{
    return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

} // namespace agentest::crypto
