#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace agentest {

// Exact fraction with a positive denominator, always in lowest terms.
// Scores and question weights use it so grading never depends on float rounding.
class Rational {
public:
    constexpr Rational() = default;
    Rational(std::int64_t num, std::int64_t den = 1);

    std::int64_t num() const noexcept { return num_; }
    std::int64_t den() const noexcept { return den_; }

    double to_double() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }
    // "n" for integers, otherwise "n/d".
    std::string to_string() const;
    // Accepts "n", "n/d" and plain decimals such as "0.25".
    static Rational parse(std::string_view text);
    // Exact value of a decimal literal as printed with up to 9 fractional digits.
    static Rational from_double(double d);

    friend Rational operator+(const Rational& a, const Rational& b);
    friend Rational operator-(const Rational& a, const Rational& b);
    friend Rational operator*(const Rational& a, const Rational& b);
    friend Rational operator/(const Rational& a, const Rational& b);
    Rational& operator+=(const Rational& o) { return *this = *this + o; }

    friend bool operator==(const Rational&, const Rational&) = default;
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

private:
    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

// Round a non-negative-or-negative rational to the nearest integer, halves away from zero.
std::int64_t round_half_away(const Rational& r);

} // namespace agentest
