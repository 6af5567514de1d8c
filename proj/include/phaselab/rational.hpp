#pragma once

/*
 * rational.hpp — exact rational numbers on arbitrary-precision integers.
 *
 * Rationals carry the "declared exact" side of every commensurability
 * decision: reduced denominators feed lcm computations, and products of
 * integer powers decide power-of-two questions that doubles cannot.
 */

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace phaselab {

using BigInt = boost::multiprecision::cpp_int;

class Rational {
  public:
    Rational() : num_(0), den_(1) {}

    Rational(BigInt numerator, BigInt denominator) : num_(std::move(numerator)), den_(std::move(denominator)) {
        if (den_ == 0) {
            throw std::invalid_argument("Rational: zero denominator");
        }
        normalize();
    }

    explicit Rational(std::int64_t n) : num_(n), den_(1) {}
    Rational(std::int64_t n, std::int64_t d) : Rational(BigInt(n), BigInt(d)) {}

    const BigInt& numerator() const { return num_; }
    const BigInt& denominator() const { return den_; }

    double to_double() const { return num_.convert_to<double>() / den_.convert_to<double>(); }

    bool is_integer() const { return den_ == 1; }

    Rational operator-() const {
        Rational r;
        r.num_ = -num_;
        r.den_ = den_;
        return r;
    }
    Rational operator+(const Rational& o) const { return {num_ * o.den_ + o.num_ * den_, den_ * o.den_}; }
    Rational operator-(const Rational& o) const { return {num_ * o.den_ - o.num_ * den_, den_ * o.den_}; }
    Rational operator*(const Rational& o) const { return {num_ * o.num_, den_ * o.den_}; }
    Rational operator/(const Rational& o) const {
        if (o.num_ == 0) {
            throw std::invalid_argument("Rational: division by zero");
        }
        return {num_ * o.den_, den_ * o.num_};
    }

    bool operator==(const Rational& o) const { return num_ == o.num_ && den_ == o.den_; }
    bool operator!=(const Rational& o) const { return !(*this == o); }
    bool operator<(const Rational& o) const { return num_ * o.den_ < o.num_ * den_; }

    Rational pow(unsigned exponent) const {
        Rational r(1);
        Rational base = *this;
        while (exponent != 0) {
            if (exponent & 1u) {
                r = r * base;
            }
            base = base * base;
            exponent >>= 1u;
        }
        return r;
    }

    std::string str() const {
        if (den_ == 1) {
            return num_.str();
        }
        return num_.str() + "/" + den_.str();
    }

    // Parses "a/b", "a", or "-a/b".  Plain integers are exact rationals with
    // denominator 1.  Anything containing '.' or exponents is not exact and
    // yields nullopt.
    static std::optional<Rational> parse(std::string_view text) {
        if (text.empty()) {
            return std::nullopt;
        }
        const auto slash = text.find('/');
        const auto is_int = [](std::string_view s) {
            if (s.empty()) {
                return false;
            }
            std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
            if (i == s.size()) {
                return false;
            }
            for (; i < s.size(); ++i) {
                if (s[i] < '0' || s[i] > '9') {
                    return false;
                }
            }
            return true;
        };
        try {
            if (slash == std::string_view::npos) {
                if (!is_int(text)) {
                    return std::nullopt;
                }
                return Rational(BigInt(std::string(text)), BigInt(1));
            }
            const std::string_view a = text.substr(0, slash);
            const std::string_view b = text.substr(slash + 1);
            if (!is_int(a) || !is_int(b)) {
                return std::nullopt;
            }
            return Rational(BigInt(std::string(a)), BigInt(std::string(b)));
        } catch (const std::exception&) {
            return std::nullopt;
        }
    }

  private:
    void normalize() {
        if (den_ < 0) {
            num_ = -num_;
            den_ = -den_;
        }
        if (num_ == 0) {
            den_ = 1;
            return;
        }
        const BigInt g = boost::multiprecision::gcd(boost::multiprecision::abs(num_), den_);
        num_ /= g;
        den_ /= g;
    }

    BigInt num_;
    BigInt den_;
};

// x > 0 and a power of two.
inline bool is_power_of_two(const BigInt& x) {
    return x > 0 && (x & (x - 1)) == 0;
}

// Exponent of the largest power of two dividing x (x != 0).
inline std::int64_t twos_exponent(const BigInt& x) {
    return static_cast<std::int64_t>(boost::multiprecision::lsb(boost::multiprecision::abs(x)));
}

// lcm over arbitrary-precision values with an explicit 2^63-1 cap: overflow
// is an error, never a wraparound.
inline std::int64_t lcm_checked(const BigInt& a, const BigInt& b) {
    const BigInt l = boost::multiprecision::lcm(a, b);
    if (l > BigInt(std::numeric_limits<std::int64_t>::max())) {
        throw std::overflow_error("lcm of denominators exceeds 2^63-1");
    }
    return l.convert_to<std::int64_t>();
}

// If r = 2^(a/b) for integers a, b with 1 <= b <= 64, returns a/b (reduced).
// Probes r^b in exact arithmetic: the power is a power of two iff both the
// numerator and denominator of the reduced power are.
inline std::optional<Rational> log2_of_rational(const Rational& r) {
    if (r.numerator() <= 0) {
        return std::nullopt;
    }
    for (unsigned b = 1; b <= 64; ++b) {
        const Rational p = r.pow(b);
        if (is_power_of_two(p.numerator()) && is_power_of_two(p.denominator())) {
            const std::int64_t a = twos_exponent(p.numerator()) - twos_exponent(p.denominator());
            return Rational(BigInt(a), BigInt(static_cast<std::int64_t>(b)));
        }
    }
    return std::nullopt;
}

}  // namespace phaselab
