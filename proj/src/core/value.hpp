#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace agentest {

using Bytes = std::vector<std::uint8_t>;

// Structured payload value: primitives, byte strings, lists and string-keyed
// maps. Map keys are kept sorted, which the canonical encoding relies on.
class Value {
public:
    using List = std::vector<Value>;
    using Map = std::map<std::string, Value, std::less<>>;

    enum class Kind { null, boolean, integer, real, string, bytes, list, map };

    Value() = default;
    Value(std::nullptr_t) {}
    Value(bool b) : v_(b) {}
    Value(int i) : v_(static_cast<std::int64_t>(i)) {}
    Value(long i) : v_(static_cast<std::int64_t>(i)) {}
    Value(long long i) : v_(static_cast<std::int64_t>(i)) {}
    Value(unsigned i) : v_(static_cast<std::int64_t>(i)) {}
    Value(unsigned long i) : v_(static_cast<std::int64_t>(i)) {}
    Value(unsigned long long i) : v_(static_cast<std::int64_t>(i)) {}
    Value(double d) : v_(d) {}
    Value(const char* s) : v_(std::string(s)) {}
    Value(std::string s) : v_(std::move(s)) {}
    Value(std::string_view s) : v_(std::string(s)) {}
    Value(Bytes b) : v_(std::move(b)) {}
    Value(List l) : v_(std::move(l)) {}
    Value(Map m) : v_(std::move(m)) {}

    static Value map() { return Value(Map{}); }
    static Value list() { return Value(List{}); }

    Kind kind() const noexcept { return static_cast<Kind>(v_.index()); }
    bool is_null() const noexcept { return kind() == Kind::null; }
    bool is_bool() const noexcept { return kind() == Kind::boolean; }
    bool is_int() const noexcept { return kind() == Kind::integer; }
    bool is_real() const noexcept { return kind() == Kind::real; }
    bool is_number() const noexcept { return is_int() || is_real(); }
    bool is_string() const noexcept { return kind() == Kind::string; }
    bool is_bytes() const noexcept { return kind() == Kind::bytes; }
    bool is_list() const noexcept { return kind() == Kind::list; }
    bool is_map() const noexcept { return kind() == Kind::map; }

    bool as_bool() const;
    std::int64_t as_int() const;
    double as_number() const;
    const std::string& as_string() const;
    const Bytes& as_bytes() const;
    const List& as_list() const;
    List& as_list();
    const Map& as_map() const;
    Map& as_map();

    // Map access. operator[] turns a null value into an empty map.
    Value& operator[](std::string_view key);
    const Value* find(std::string_view key) const;
    bool contains(std::string_view key) const { return find(key) != nullptr; }
    // Dotted lookup through nested maps ("a.b.c"); nullptr when any hop is missing.
    const Value* find_path(std::string_view dotted) const;

    std::string get_string(std::string_view key, std::string_view fallback = {}) const;
    std::int64_t get_int(std::string_view key, std::int64_t fallback = 0) const;
    bool get_bool(std::string_view key, bool fallback = false) const;

    void push_back(Value v);
    std::size_t size() const;

    friend bool operator==(const Value& a, const Value& b) { return a.v_ == b.v_; }

    std::string debug_string() const;

private:
    std::variant<std::monostate, bool, std::int64_t, double, std::string, Bytes, List, Map> v_;
};

const char* kind_name(Value::Kind kind) noexcept;

// Canonical self-describing binary layout: a format version byte, then one
// tagged item. Map keys are emitted in lexicographic byte order so equal values
// always encode to identical bytes.
inline constexpr std::uint8_t k_canonical_version = 1;
Bytes encode_canonical(const Value& value);
Value decode_canonical(std::span<const std::uint8_t> bytes);

nlohmann::json to_json(const Value& value);
Value from_json(const nlohmann::json& json);

} // namespace agentest
