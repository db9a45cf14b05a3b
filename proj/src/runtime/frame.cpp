#include "runtime/frame.hpp"

#include "core/crypto.hpp"
#include "core/error.hpp"

namespace agentest::runtime {

std::string_view to_string(FrameKind k)
{
    switch (k) {
    case FrameKind::message: return "message";
    case FrameKind::migrate: return "migrate";
    case FrameKind::ack: return "ack";
    case FrameKind::nack: return "nack";
    }
    return "?";
}

namespace {

FrameKind kind_from(std::string_view s)
{
    if (s == "message") return FrameKind::message;
    if (s == "migrate") return FrameKind::migrate;
    if (s == "ack") return FrameKind::ack;
    if (s == "nack") return FrameKind::nack;
    fail(Errc::bad_frame, "unknown frame kind '" + std::string(s) + "'");
}

} // namespace

Bytes encode_frame(FrameKind kind, const Value& body, const Bytes& secret)
{
    Bytes raw = encode_canonical(body);
    nlohmann::json j{
        {"kind", std::string(to_string(kind))},
        {"body", crypto::base64_encode(raw)},
        {"mac", crypto::to_hex(crypto::hmac_sha256(secret, raw))},
    };
    std::string text = j.dump();
    if (text.size() > k_max_frame)
        fail(Errc::bad_frame, "frame of " + std::to_string(text.size()) + " bytes exceeds the 16 MiB limit");
    Bytes out(4 + text.size());
    auto n = static_cast<std::uint32_t>(text.size());
    out[0] = static_cast<std::uint8_t>(n >> 24);
    out[1] = static_cast<std::uint8_t>(n >> 16);
    out[2] = static_cast<std::uint8_t>(n >> 8);
    out[3] = static_cast<std::uint8_t>(n);
    std::copy(text.begin(), text.end(), out.begin() + 4);
    return out;
}

std::size_t frame_length(const std::uint8_t* p)
{
    std::size_t n = (std::size_t(p[0]) << 24) | (std::size_t(p[1]) << 16) | (std::size_t(p[2]) << 8) | p[3];
    if (n > k_max_frame)
        fail(Errc::bad_frame, "announced frame length " + std::to_string(n) + " exceeds the 16 MiB limit");
    return n;
}

Frame decode_frame(const Bytes& frame, const Bytes& secret)
{
    if (frame.size() < 4)
        fail(Errc::bad_frame, "truncated length prefix");
    std::size_t n = frame_length(frame.data());
    if (frame.size() != n + 4)
        fail(Errc::bad_frame, "length prefix says " + std::to_string(n) + " bytes, got " + std::to_string(frame.size() - 4));

    nlohmann::json j;
    try {
        j = nlohmann::json::parse(frame.begin() + 4, frame.end());
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::bad_frame, std::string("frame is not JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("kind") || !j.contains("body") || !j.contains("mac") ||
        !j["kind"].is_string() || !j["body"].is_string() || !j["mac"].is_string())
        fail(Errc::bad_frame, "frame must carry string fields kind, body and mac");

    Frame f;
    f.kind = kind_from(j["kind"].get<std::string>());
    Bytes raw, mac;
    try {
        raw = crypto::base64_decode(j["body"].get<std::string>());
        mac = crypto::from_hex(j["mac"].get<std::string>());
    } catch (const Error& e) {
        fail(Errc::bad_frame, e.detail());
    }
    if (!crypto::constant_time_equal(mac, crypto::hmac_sha256(secret, raw)))
        fail(Errc::mac_invalid, "frame MAC does not verify");
    try {
        f.body = decode_canonical(raw);
    } catch (const Error& e) {
        fail(Errc::bad_frame, e.detail());
    }
    return f;
}

Bytes nack_frame(std::string_view code, std::string_view detail, const Bytes& secret)
{
    Value body = Value::map();
    body["code"] = code;
    body["detail"] = detail;
    return encode_frame(FrameKind::nack, body, secret);
}

Bytes ack_frame(const Value& body, const Bytes& secret)
{
    return encode_frame(FrameKind::ack, body.is_null() ? Value::map() : body, secret);
}

Value expect_ack(const Frame& f)
{
    if (f.kind == FrameKind::ack)
        return f.body;
    if (f.kind == FrameKind::nack) {
        Errc code = errc_from_name(f.body.get_string("code"));
        fail(code == Errc::ok ? Errc::internal : code, f.body.get_string("detail"));
    }
    fail(Errc::bad_frame, "expected ack or nack, got " + std::string(to_string(f.kind)));
}

} // namespace agentest::runtime
