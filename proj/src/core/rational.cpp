#include "core/rational.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "core/error.hpp"

namespace agentest {

namespace {

using wide = __int128;

wide gcd_wide(wide a, wide b)
{
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
        wide t = a % b;
        a = b;
        b = t;
    }
    return a;
}

Rational make(wide num, wide den)
{
    if (den == 0)
        fail(Errc::invalid_argument, "rational with zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    wide g = gcd_wide(num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
    if (num > INT64_MAX || num < INT64_MIN || den > INT64_MAX)
        fail(Errc::invalid_argument, "rational overflow");
    return Rational(static_cast<std::int64_t>(num), static_cast<std::int64_t>(den));
}

std::int64_t parse_int(std::string_view s)
{
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || s.empty())
        fail(Errc::parse_error, "invalid number '" + std::string(s) + "'");
    return v;
}

} // namespace

Rational::Rational(std::int64_t num, std::int64_t den)
{
    if (den == 0)
        fail(Errc::invalid_argument, "rational with zero denominator");
    std::int64_t g = std::gcd(num, den);
    if (g == 0) g = 1;
    num /= g;
    den /= g;
    if (den < 0) {
        num = -num;
        den = -den;
    }
    num_ = num;
    den_ = den;
}

std::string Rational::to_string() const
{
    if (den_ == 1)
        return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
}

Rational Rational::parse(std::string_view text)
{
    if (auto slash = text.find('/'); slash != std::string_view::npos)
        return Rational(parse_int(text.substr(0, slash)), parse_int(text.substr(slash + 1)));
    if (auto dot = text.find('.'); dot != std::string_view::npos) {
        auto frac = text.substr(dot + 1);
        if (frac.size() > 9)
            fail(Errc::parse_error, "too many decimal places in '" + std::string(text) + "'");
        bool negative = !text.empty() && text.front() == '-';
        auto whole = text.substr(0, dot);
        std::int64_t w = (whole.empty() || whole == "-") ? 0 : parse_int(whole);
        std::int64_t f = frac.empty() ? 0 : parse_int(frac);
        std::int64_t scale = 1;
        for (std::size_t i = 0; i < frac.size(); ++i)
            scale *= 10;
        wide num = static_cast<wide>(w < 0 ? -w : w) * scale + f;
        return make(negative ? -num : num, scale);
    }
    return Rational(parse_int(text));
}

Rational Rational::from_double(double d)
{
    if (!std::isfinite(d))
        fail(Errc::invalid_argument, "non-finite number");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9f", d);
    std::string s(buf);
    while (!s.empty() && s.back() == '0')
        s.pop_back();
    if (!s.empty() && s.back() == '.')
        s.pop_back();
    return parse(s);
}

Rational operator+(const Rational& a, const Rational& b)
{
    return make(static_cast<wide>(a.num_) * b.den_ + static_cast<wide>(b.num_) * a.den_,
                static_cast<wide>(a.den_) * b.den_);
}

Rational operator-(const Rational& a, const Rational& b)
{
    return make(static_cast<wide>(a.num_) * b.den_ - static_cast<wide>(b.num_) * a.den_,
                static_cast<wide>(a.den_) * b.den_);
}

Rational operator*(const Rational& a, const Rational& b)
{
    return make(static_cast<wide>(a.num_) * b.num_, static_cast<wide>(a.den_) * b.den_);
}

Rational operator/(const Rational& a, const Rational& b)
{
    return make(static_cast<wide>(a.num_) * b.den_, static_cast<wide>(a.den_) * b.num_);
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b)
{
    wide l = static_cast<wide>(a.num_) * b.den_;
    wide r = static_cast<wide>(b.num_) * a.den_;
    if (l < r) return std::strong_ordering::less;
    if (l > r) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
}

std::int64_t round_half_away(const Rational& r)
{
    wide n = r.num();
    wide d = r.den();
    wide mag = ((n < 0 ? -n : n) * 2 + d) / (2 * d);
    return static_cast<std::int64_t>(n < 0 ? -mag : mag);
}

} // namespace agentest
