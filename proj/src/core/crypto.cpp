#include "core/crypto.hpp"

#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/rand.h>

#include "core/error.hpp"

namespace agentest::crypto {

Bytes hmac_sha256(std::span<const std::uint8_t> key, std::span<const std::uint8_t> data)
{
    Bytes out(EVP_MAX_MD_SIZE);
    unsigned int len = 0;
    static const std::uint8_t empty = 0;
    const auto* d = data.empty() ? &empty : data.data();
    if (!HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), d, data.size(), out.data(), &len))
        fail(Errc::internal, "HMAC-SHA256 failed");
    out.resize(len);
    return out;
}

bool constant_time_equal(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b)
{
    if (a.size() != b.size())
        return false;
    return a.empty() || CRYPTO_memcmp(a.data(), b.data(), a.size()) == 0;
}

std::string to_hex(std::span<const std::uint8_t> data)
{
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(data.size() * 2);
    for (auto b : data) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0x0f]);
    }
    return out;
}

Bytes from_hex(std::string_view hex)
{
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    if (hex.size() % 2 != 0)
        fail(Errc::parse_error, "odd-length hex string");
    Bytes out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        int hi = nibble(hex[2 * i]);
        int lo = nibble(hex[2 * i + 1]);
        if (hi < 0 || lo < 0)
            fail(Errc::parse_error, "invalid hex digit");
        out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return out;
}

std::string base64_encode(std::span<const std::uint8_t> data)
{
    std::string out(4 * ((data.size() + 2) / 3), '\0');
    if (data.empty())
        return out;
    int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), data.data(),
                            static_cast<int>(data.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

Bytes base64_decode(std::string_view text)
{
    if (text.size() % 4 != 0)
        fail(Errc::parse_error, "base64 length is not a multiple of 4");
    if (text.empty())
        return {};
    Bytes out(3 * text.size() / 4);
    int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                            static_cast<int>(text.size()));
    if (n < 0)
        fail(Errc::parse_error, "invalid base64");
    // EVP_DecodeBlock keeps the zero bytes that padding stands for.
    std::size_t pad = 0;
    if (text.back() == '=') ++pad;
    if (text.size() > 1 && text[text.size() - 2] == '=') ++pad;
    out.resize(static_cast<std::size_t>(n) - pad);
    return out;
}

Bytes random_bytes(std::size_t n)
{
    Bytes out(n);
    if (n > 0 && RAND_bytes(out.data(), static_cast<int>(n)) != 1)
        fail(Errc::internal, "RAND_bytes failed");
    return out;
}

std::string random_token(std::size_t bits)
{
    return to_hex(random_bytes((bits + 7) / 8));
}

} // namespace agentest::crypto
