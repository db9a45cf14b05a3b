#include <doctest.h>

#include "core/clock.hpp"
#include "core/crypto.hpp"
#include "core/error.hpp"
#include "core/rational.hpp"
#include "core/value.hpp"

using namespace agentest;

TEST_SUITE("core")
{
    TEST_CASE("canonical encoding round-trips every kind")
    {
        Value v = Value::map();
        v["n"] = nullptr;
        v["b"] = true;
        v["i"] = -42;
        v["r"] = 0.125;
        v["s"] = "héllo";
        v["y"] = Bytes{0, 1, 255};
        v["l"] = Value(Value::List{1, "two", Value::list()});
        v["m"]["deep"]["x"] = 1;
        auto bytes = encode_canonical(v);
        CHECK(bytes.front() == k_canonical_version);
        CHECK(decode_canonical(bytes) == v);
    }

    TEST_CASE("map insertion order does not change the bytes")
    {
        Value a = Value::map();
        a["z"] = 1;
        a["a"] = 2;
        Value b = Value::map();
        b["a"] = 2;
        b["z"] = 1;
        CHECK(encode_canonical(a) == encode_canonical(b));
    }

    TEST_CASE("truncated or trailing bytes are rejected")
    {
        Value v = Value::map();
        v["k"] = "value";
        auto bytes = encode_canonical(v);
        auto cut = bytes;
        cut.pop_back();
        CHECK_THROWS_AS(decode_canonical(cut), Error);
        auto extra = bytes;
        extra.push_back(0);
        CHECK_THROWS_AS(decode_canonical(extra), Error);
        CHECK_THROWS_AS(decode_canonical(Bytes{}), Error);
    }

    TEST_CASE("json bridge")
    {
        auto j = nlohmann::json::parse(R"({"a":[1,2.5,"x",null,true],"b":{"c":-3}})");
        Value v = from_json(j);
        CHECK(v.find_path("b.c")->as_int() == -3);
        CHECK(v.find("a")->as_list()[1].is_real());
        CHECK(to_json(v) == j);
    }

    TEST_CASE("value accessors")
    {
        Value v = Value::map();
        v["a"]["b"] = "x";
        CHECK(v.find_path("a.b")->as_string() == "x");
        CHECK(v.find_path("a.c") == nullptr);
        CHECK(v.get_string("missing", "fb") == "fb");
        CHECK(v.get_int("a", 7) == 7);
        CHECK_THROWS_AS(v.as_int(), Error);
    }

    TEST_CASE("rational arithmetic stays in lowest terms")
    {
        Rational a(2, 4);
        CHECK(a.num() == 1);
        CHECK(a.den() == 2);
        CHECK(Rational(1, -3).num() == -1);
        CHECK(Rational(1, 3) + Rational(1, 6) == Rational(1, 2));
        CHECK(Rational(3, 4) * Rational(2, 3) == Rational(1, 2));
        CHECK(Rational(1, 2) / Rational(1, 4) == Rational(2));
        CHECK(Rational(1, 3) < Rational(1, 2));
        CHECK(Rational::parse("3/2") == Rational(3, 2));
        CHECK(Rational::parse("0.25") == Rational(1, 4));
        CHECK(Rational::parse("7") == Rational(7));
        CHECK(Rational(5, 10).to_string() == "1/2");
        CHECK_THROWS_AS(Rational(1, 0), Error);
        CHECK_THROWS_AS(Rational::parse("x/2"), Error);
    }

    TEST_CASE("round half away from zero")
    {
        CHECK(round_half_away(Rational(5, 2)) == 3);
        CHECK(round_half_away(Rational(-5, 2)) == -3);
        CHECK(round_half_away(Rational(7, 3)) == 2);
        CHECK(round_half_away(Rational(149, 2)) == 75);
        CHECK(round_half_away(Rational(0)) == 0);
    }

    TEST_CASE("hmac-sha256 known vector")
    {
        auto mac = crypto::hmac_sha256(crypto::as_bytes("Jefe"), crypto::as_bytes("what do ya want for nothing?"));
        CHECK(crypto::to_hex(mac) == "5bdcc146bf60754e6a042426089575c75a003f089d2739839dec58b964ec3843");
    }

    TEST_CASE("hex, base64 and tokens")
    {
        Bytes b{0xde, 0xad, 0xbe, 0xef, 0x00};
        CHECK(crypto::from_hex(crypto::to_hex(b)) == b);
        CHECK(crypto::base64_encode(crypto::as_bytes("foobar")) == "Zm9vYmFy");
        CHECK(crypto::base64_decode("Zm9vYg==") == Bytes{'f', 'o', 'o', 'b'});
        auto t1 = crypto::random_token(128);
        auto t2 = crypto::random_token(128);
        CHECK(t1.size() == 32);
        CHECK(t1 != t2);
        CHECK(crypto::constant_time_equal(crypto::as_bytes("abc"), crypto::as_bytes("abc")));
        CHECK_FALSE(crypto::constant_time_equal(crypto::as_bytes("abc"), crypto::as_bytes("abd")));
        CHECK_FALSE(crypto::constant_time_equal(crypto::as_bytes("abc"), crypto::as_bytes("ab")));
    }

    TEST_CASE("error code names round-trip")
    {
        for (Errc c : {Errc::version_conflict, Errc::mac_invalid, Errc::live_session_exists, Errc::timeout}) {
            CHECK(errc_from_name(errc_name(c)) == c);
            CHECK(errc_name(c).find('_') == std::string_view::npos);
        }
        Error e(Errc::out_of_order, "late");
        CHECK(e.code_name() == "out-of-order");
        CHECK(e.detail() == "late");
    }

    TEST_CASE("simulated clock moves only when told")
    {
        SimulatedClock c(100);
        CHECK(c.now_ms() == 100);
        c.sleep_for_ms(50);
        CHECK(c.now_ms() == 150);
        c.advance(-10);
        CHECK(c.now_ms() == 150);
        c.set(5);
        CHECK(c.now_ms() == 5);
        CHECK(c.simulated());
        CHECK_FALSE(SystemClock().simulated());
    }
}
