#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace blindctl {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

/**
Arbitrary-precision rational, always in lowest terms with positive
denominator. Carries discount factors, reduction targets and file values
exactly; all numeric work happens on doubles derived from these.
*/
class Rational {
public:
    Rational() : value_(0) {}
    Rational(long long n) : value_(n) {}
    Rational(const BigInt& num, const BigInt& den);
    explicit Rational(BigRational v) : value_(std::move(v)) {}

    /** Parses "p/q", an integer, or a decimal (optionally with exponent).
        Returns nullopt on malformed input. Decimals are converted exactly. */
    static std::optional<Rational> parse(std::string_view text);

    /** Canonical text form: "p/q", or just "p" when the denominator is 1. */
    std::string str() const;

    /// Nearest double (round half to even), computed by integer division.
    double to_double() const;
    BigInt numerator() const { return boost::multiprecision::numerator(value_); }
    BigInt denominator() const { return boost::multiprecision::denominator(value_); }
    const BigRational& raw() const { return value_; }

    Rational operator-() const { return Rational(BigRational(-value_)); }
    Rational& operator+=(const Rational& o) { value_ += o.value_; return *this; }
    Rational& operator-=(const Rational& o) { value_ -= o.value_; return *this; }
    Rational& operator*=(const Rational& o) { value_ *= o.value_; return *this; }
    Rational& operator/=(const Rational& o);

    friend Rational operator+(Rational a, const Rational& b) { return a += b; }
    friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
    friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
    friend Rational operator/(Rational a, const Rational& b) { return a /= b; }
    friend bool operator==(const Rational& a, const Rational& b) { return a.value_ == b.value_; }
    friend bool operator!=(const Rational& a, const Rational& b) { return a.value_ != b.value_; }
    friend bool operator<(const Rational& a, const Rational& b) { return a.value_ < b.value_; }
    friend bool operator<=(const Rational& a, const Rational& b) { return a.value_ <= b.value_; }
    friend bool operator>(const Rational& a, const Rational& b) { return a.value_ > b.value_; }
    friend bool operator>=(const Rational& a, const Rational& b) { return a.value_ >= b.value_; }

private:
    BigRational value_;
};

}  // namespace blindctl
