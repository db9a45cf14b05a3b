#include "core/value.hpp"

#include <bit>
#include <cstring>

#include "core/crypto.hpp"
#include "core/error.hpp"

namespace agentest {

namespace {

[[noreturn]] void wrong_kind(const char* wanted, Value::Kind got)
{
    fail(Errc::type_mismatch, std::string("expected ") + wanted + ", got " + kind_name(got));
}

} // namespace

const char* kind_name(Value::Kind kind) noexcept
{
    switch (kind) {
    case Value::Kind::null: return "null";
    case Value::Kind::boolean: return "bool";
    case Value::Kind::integer: return "integer";
    case Value::Kind::real: return "real";
    case Value::Kind::string: return "string";
    case Value::Kind::bytes: return "bytes";
    case Value::Kind::list: return "list";
    case Value::Kind::map: return "map";
    }
    return "?";
}

bool Value::as_bool() const
{
    if (auto* b = std::get_if<bool>(&v_)) return *b;
    wrong_kind("bool", kind());
}

std::int64_t Value::as_int() const
{
    if (auto* i = std::get_if<std::int64_t>(&v_)) return *i;
    wrong_kind("integer", kind());
}

double Value::as_number() const
{
    if (auto* i = std::get_if<std::int64_t>(&v_)) return static_cast<double>(*i);
    if (auto* d = std::get_if<double>(&v_)) return *d;
    wrong_kind("number", kind());
}

const std::string& Value::as_string() const
{
    if (auto* s = std::get_if<std::string>(&v_)) return *s;
    wrong_kind("string", kind());
}

const Bytes& Value::as_bytes() const
{
    if (auto* b = std::get_if<Bytes>(&v_)) return *b;
    wrong_kind("bytes", kind());
}

const Value::List& Value::as_list() const
{
    if (auto* l = std::get_if<List>(&v_)) return *l;
    wrong_kind("list", kind());
}

Value::List& Value::as_list()
{
    if (auto* l = std::get_if<List>(&v_)) return *l;
    wrong_kind("list", kind());
}

const Value::Map& Value::as_map() const
{
    if (auto* m = std::get_if<Map>(&v_)) return *m;
    wrong_kind("map", kind());
}

Value::Map& Value::as_map()
{
    if (auto* m = std::get_if<Map>(&v_)) return *m;
    wrong_kind("map", kind());
}

Value& Value::operator[](std::string_view key)
{
    if (is_null())
        v_ = Map{};
    auto& m = as_map();
    auto it = m.find(key);
    if (it == m.end())
        it = m.emplace(std::string(key), Value{}).first;
    return it->second;
}

const Value* Value::find(std::string_view key) const
{
    auto* m = std::get_if<Map>(&v_);
    if (!m)
        return nullptr;
    auto it = m->find(key);
    return it == m->end() ? nullptr : &it->second;
}

const Value* Value::find_path(std::string_view dotted) const
{
    const Value* cur = this;
    while (cur) {
        auto dot = dotted.find('.');
        cur = cur->find(dotted.substr(0, dot));
        if (dot == std::string_view::npos)
            return cur;
        dotted.remove_prefix(dot + 1);
    }
    return nullptr;
}

std::string Value::get_string(std::string_view key, std::string_view fallback) const
{
    auto* v = find(key);
    return v && v->is_string() ? v->as_string() : std::string(fallback);
}

std::int64_t Value::get_int(std::string_view key, std::int64_t fallback) const
{
    auto* v = find(key);
    return v && v->is_int() ? v->as_int() : fallback;
}

bool Value::get_bool(std::string_view key, bool fallback) const
{
    auto* v = find(key);
    return v && v->is_bool() ? v->as_bool() : fallback;
}

void Value::push_back(Value v)
{
    if (is_null())
        v_ = List{};
    as_list().push_back(std::move(v));
}

std::size_t Value::size() const
{
    switch (kind()) {
    case Kind::list: return as_list().size();
    case Kind::map: return as_map().size();
    case Kind::string: return as_string().size();
    case Kind::bytes: return as_bytes().size();
    default: return 0;
    }
}

std::string Value::debug_string() const
{
    return to_json(*this).dump();
}

// ---------------------------------------------------------------------------
// canonical binary codec

namespace {

enum Tag : std::uint8_t {
    tag_null = 'N',
    tag_false = 'F',
    tag_true = 'T',
    tag_int = 'i',
    tag_real = 'd',
    tag_string = 's',
    tag_bytes = 'b',
    tag_list = 'l',
    tag_map = 'm',
};

constexpr std::size_t k_max_depth = 128;

void put_u32(Bytes& out, std::uint32_t v)
{
    for (int shift = 24; shift >= 0; shift -= 8)
        out.push_back(static_cast<std::uint8_t>(v >> shift));
}

void put_u64(Bytes& out, std::uint64_t v)
{
    for (int shift = 56; shift >= 0; shift -= 8)
        out.push_back(static_cast<std::uint8_t>(v >> shift));
}

void put_len(Bytes& out, std::size_t n)
{
    if (n > 0xffffffffu)
        fail(Errc::invalid_argument, "value too large to encode");
    put_u32(out, static_cast<std::uint32_t>(n));
}

void put_chars(Bytes& out, std::string_view s)
{
    put_len(out, s.size());
    out.insert(out.end(), s.begin(), s.end());
}

void encode_item(Bytes& out, const Value& v, std::size_t depth)
{
    if (depth > k_max_depth)
        fail(Errc::invalid_argument, "value nested too deeply");
    switch (v.kind()) {
    case Value::Kind::null: out.push_back(tag_null); break;
    case Value::Kind::boolean: out.push_back(v.as_bool() ? tag_true : tag_false); break;
    case Value::Kind::integer:
        out.push_back(tag_int);
        put_u64(out, static_cast<std::uint64_t>(v.as_int()));
        break;
    case Value::Kind::real:
        out.push_back(tag_real);
        put_u64(out, std::bit_cast<std::uint64_t>(v.as_number()));
        break;
    case Value::Kind::string:
        out.push_back(tag_string);
        put_chars(out, v.as_string());
        break;
    case Value::Kind::bytes: {
        const auto& b = v.as_bytes();
        out.push_back(tag_bytes);
        put_len(out, b.size());
        out.insert(out.end(), b.begin(), b.end());
        break;
    }
    case Value::Kind::list:
        out.push_back(tag_list);
        put_len(out, v.as_list().size());
        for (const auto& item : v.as_list())
            encode_item(out, item, depth + 1);
        break;
    case Value::Kind::map:
        out.push_back(tag_map);
        put_len(out, v.as_map().size());
        for (const auto& [key, item] : v.as_map()) {
            put_chars(out, key);
            encode_item(out, item, depth + 1);
        }
        break;
    }
}

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

    bool done() const { return pos_ == in_.size(); }

    std::uint8_t byte()
    {
        need(1);
        return in_[pos_++];
    }

    std::uint64_t u64()
    {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v = (v << 8) | in_[pos_++];
        return v;
    }

    std::size_t len()
    {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v = (v << 8) | in_[pos_++];
        return v;
    }

    std::span<const std::uint8_t> take(std::size_t n)
    {
        need(n);
        auto s = in_.subspan(pos_, n);
        pos_ += n;
        return s;
    }

    std::string chars()
    {
        auto s = take(len());
        return {s.begin(), s.end()};
    }

private:
    void need(std::size_t n) const
    {
        if (in_.size() - pos_ < n)
            fail(Errc::parse_error, "truncated canonical value");
    }

    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

Value decode_item(Reader& r, std::size_t depth)
{
    if (depth > k_max_depth)
        fail(Errc::parse_error, "canonical value nested too deeply");
    switch (r.byte()) {
    case tag_null: return {};
    case tag_false: return false;
    case tag_true: return true;
    case tag_int: return static_cast<std::int64_t>(r.u64());
    case tag_real: return std::bit_cast<double>(r.u64());
    case tag_string: return r.chars();
    case tag_bytes: {
        auto s = r.take(r.len());
        return Bytes(s.begin(), s.end());
    }
    case tag_list: {
        auto n = r.len();
        Value::List items;
        for (std::size_t i = 0; i < n; ++i)
            items.push_back(decode_item(r, depth + 1));
        return items;
    }
    case tag_map: {
        auto n = r.len();
        Value::Map items;
        std::string prev;
        for (std::size_t i = 0; i < n; ++i) {
            auto key = r.chars();
            if (i > 0 && !(prev < key))
                fail(Errc::parse_error, "map keys not in canonical order");
            auto item = decode_item(r, depth + 1);
            items.emplace_hint(items.end(), key, std::move(item));
            prev = std::move(key);
        }
        return items;
    }
    default:
        fail(Errc::parse_error, "unknown canonical tag");
    }
}

} // namespace

Bytes encode_canonical(const Value& value)
{
    Bytes out;
    out.push_back(k_canonical_version);
    encode_item(out, value, 0);
    return out;
}

Value decode_canonical(std::span<const std::uint8_t> bytes)
{
    Reader r(bytes);
    if (r.byte() != k_canonical_version)
        fail(Errc::parse_error, "unsupported canonical format version");
    auto v = decode_item(r, 0);
    if (!r.done())
        fail(Errc::parse_error, "trailing bytes after canonical value");
    return v;
}

// ---------------------------------------------------------------------------
// JSON bridge. Byte strings surface as base64 text and do not round-trip.

nlohmann::json to_json(const Value& value)
{
    switch (value.kind()) {
    case Value::Kind::null: return nullptr;
    case Value::Kind::boolean: return value.as_bool();
    case Value::Kind::integer: return value.as_int();
    case Value::Kind::real: return value.as_number();
    case Value::Kind::string: return value.as_string();
    case Value::Kind::bytes: return crypto::base64_encode(value.as_bytes());
    case Value::Kind::list: {
        auto arr = nlohmann::json::array();
        for (const auto& item : value.as_list())
            arr.push_back(to_json(item));
        return arr;
    }
    case Value::Kind::map: {
        auto obj = nlohmann::json::object();
        for (const auto& [k, item] : value.as_map())
            obj[k] = to_json(item);
        return obj;
    }
    }
    return nullptr;
}

Value from_json(const nlohmann::json& json)
{
    using T = nlohmann::json::value_t;
    switch (json.type()) {
    case T::null: return {};
    case T::boolean: return json.get<bool>();
    case T::number_integer: return json.get<std::int64_t>();
    case T::number_unsigned: {
        auto u = json.get<std::uint64_t>();
        if (u > static_cast<std::uint64_t>(INT64_MAX))
            fail(Errc::parse_error, "integer out of range");
        return static_cast<std::int64_t>(u);
    }
    case T::number_float: return json.get<double>();
    case T::string: return json.get<std::string>();
    case T::array: {
        Value::List items;
        for (const auto& item : json)
            items.push_back(from_json(item));
        return items;
    }
    case T::object: {
        Value::Map items;
        for (const auto& [k, item] : json.items())
            items.emplace(k, from_json(item));
        return items;
    }
    case T::binary: {
        const auto& b = json.get_binary();
        return Bytes(b.begin(), b.end());
    }
    default:
        fail(Errc::parse_error, "unsupported JSON value");
    }
}

} // namespace agentest
