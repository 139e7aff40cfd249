#include "blindctl/rational.hpp"

#include <cctype>
#include <cmath>
#include <stdexcept>

namespace blindctl {

namespace {

bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
}

BigInt pow10(long e) {
    BigInt r = 1;
    for (long i = 0; i < e; ++i) r *= 10;
    return r;
}

/// cpp_int reads a leading zero as an octal prefix; strip them first.
BigInt from_digits(std::string digits) {
    size_t first = digits.find_first_not_of('0');
    if (first == std::string::npos) return BigInt(0);
    return BigInt(digits.substr(first));
}

}  // namespace

Rational::Rational(const BigInt& num, const BigInt& den) {
    if (den == 0) throw std::invalid_argument("Rational: zero denominator");
    if (den < 0)
        value_ = BigRational(-num, -den);
    else
        value_ = BigRational(num, den);
}

Rational& Rational::operator/=(const Rational& o) {
    if (o.value_ == 0) throw std::invalid_argument("Rational: division by zero");
    value_ /= o.value_;
    return *this;
}

std::optional<Rational> Rational::parse(std::string_view text) {
    if (text.empty()) return std::nullopt;
    bool negative = false;
    if (text.front() == '+' || text.front() == '-') {
        negative = text.front() == '-';
        text.remove_prefix(1);
    }
    if (text.empty()) return std::nullopt;

    if (auto slash = text.find('/'); slash != std::string_view::npos) {
        std::string_view num = text.substr(0, slash);
        std::string_view den = text.substr(slash + 1);
        if (!all_digits(num) || !all_digits(den)) return std::nullopt;
        BigInt n = from_digits(std::string(num));
        BigInt d = from_digits(std::string(den));
        if (d == 0) return std::nullopt;
        if (negative) n = -n;
        return Rational(n, d);
    }

    // Decimal form: digits[.digits][(e|E)[sign]digits]
    std::string_view mantissa = text;
    long exponent = 0;
    if (auto epos = text.find_first_of("eE"); epos != std::string_view::npos) {
        mantissa = text.substr(0, epos);
        std::string_view es = text.substr(epos + 1);
        bool eneg = false;
        if (!es.empty() && (es.front() == '+' || es.front() == '-')) {
            eneg = es.front() == '-';
            es.remove_prefix(1);
        }
        if (!all_digits(es) || es.size() > 6) return std::nullopt;
        exponent = std::stol(std::string(es));
        if (eneg) exponent = -exponent;
    }

    std::string digits;
    long frac_digits = 0;
    if (auto dot = mantissa.find('.'); dot != std::string_view::npos) {
        std::string_view whole = mantissa.substr(0, dot);
        std::string_view frac = mantissa.substr(dot + 1);
        if (whole.empty() && frac.empty()) return std::nullopt;
        if (!whole.empty() && !all_digits(whole)) return std::nullopt;
        if (!frac.empty() && !all_digits(frac)) return std::nullopt;
        digits = std::string(whole) + std::string(frac);
        frac_digits = static_cast<long>(frac.size());
    } else {
        if (!all_digits(mantissa)) return std::nullopt;
        digits = std::string(mantissa);
    }
    if (digits.empty()) return std::nullopt;

    BigInt n = from_digits(digits);
    if (negative) n = -n;
    long net = exponent - frac_digits;
    if (net >= 0) return Rational(n * pow10(net), 1);
    return Rational(n, pow10(-net));
}

std::string Rational::str() const {
    BigInt d = denominator();
    if (d == 1) return numerator().str();
    return numerator().str() + "/" + d.str();
}

double Rational::to_double() const {
    if (value_ == 0) return 0.0;
    BigInt a = boost::multiprecision::abs(numerator());
    BigInt b = denominator();
    bool neg = value_ < 0;

    // Scale a/b into [1, 2), tracking the binary exponent.
    long e = static_cast<long>(boost::multiprecision::msb(a)) -
             static_cast<long>(boost::multiprecision::msb(b));
    if (e > 0)
        b <<= e;
    else if (e < 0)
        a <<= -e;
    if (a < b) {
        a <<= 1;
        --e;
    }

    // 52 fractional mantissa bits, round half to even.
    BigInt scaled = a << 52;
    BigInt mant = scaled / b;
    BigInt rem = scaled - mant * b;
    BigInt twice = rem << 1;
    if (twice > b || (twice == b && boost::multiprecision::bit_test(mant, 0))) ++mant;

    double md = mant.convert_to<double>();  // at most 2^53, hence exact
    double result = std::ldexp(md, static_cast<int>(e) - 52);
    return neg ? -result : result;
}

}  // namespace blindctl
