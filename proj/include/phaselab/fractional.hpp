#pragma once

/*
 * fractional.hpp — fractional-part utilities.
 *
 * <u> = u - floor(u) is the workhorse of everything in this library: phase
 * wrapping, oscillation frequencies, Bragg conditions.  The one numerically
 * delicate operation is <b*n> for large integer n: the plain double product
 * b*n loses absolute accuracy proportional to n, which would wreck the
 * fractional part long before n reaches 1e9.  We therefore split the product
 * into an exact high/low pair (Dekker's algorithm), take the fractional part
 * of the high part exactly, and fold the low part back in.
 */

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>

namespace phaselab {

// <u> = u - floor(u), always in [0, 1).  Non-finite input is rejected.
inline double fractional_part(double u) {
    if (!std::isfinite(u)) {
        throw std::invalid_argument("fractional_part: input must be finite");
    }
    double f = u - std::floor(u);
    // u slightly below an integer can round the difference up to 1.0;
    // the true value is then just under 1.
    if (f >= 1.0) {
        f = std::nextafter(1.0, 0.0);
    }
    if (f < 0.0) {
        f = 0.0;
    }
    return f;
}

namespace detail {

// Dekker split: a = hi + lo with hi carrying the upper 26 mantissa bits.
struct HiLo {
    double hi;
    double lo;
};

inline HiLo split(double a) {
    constexpr double splitter = 134217729.0;  // 2^27 + 1
    const double c = splitter * a;
    const double hi = c - (c - a);
    return {hi, a - hi};
}

// a*b = value + err exactly (barring overflow), via the split products.
struct Product {
    double value;
    double err;
};

inline Product two_product(double a, double b) {
    const double p = a * b;
    const HiLo sa = split(a);
    const HiLo sb = split(b);
    const double err = ((sa.hi * sb.hi - p) + sa.hi * sb.lo + sa.lo * sb.hi) + sa.lo * sb.lo;
    return {p, err};
}

// <a*b> for arbitrary reals, using the exact product decomposition.
// p - floor(p) is exact for doubles, so the only rounding happens when the
// (tiny) error term is folded back in.
inline double product_fraction(double a, double b) {
    const Product pr = two_product(a, b);
    double f = pr.value - std::floor(pr.value);
    double r = f + pr.err;
    r -= std::floor(r);
    if (r >= 1.0) {
        r = 0.0;
    }
    if (r < 0.0) {
        r = 0.0;
    }
    return r;
}

// z^n for integer n >= 0 by repeated squaring; exact powers of exact units
// stay exact.
inline std::complex<double> pow_int(std::complex<double> z, std::int64_t n) {
    std::complex<double> r(1.0, 0.0);
    while (n > 0) {
        if (n & 1) {
            r *= z;
        }
        z *= z;
        n >>= 1;
    }
    return r;
}

}  // namespace detail

// <beta * n> with absolute error well under 1e-9 for |n| up to 1e9.
inline double fractional_part_of_product(double beta, std::int64_t n) {
    if (!std::isfinite(beta)) {
        throw std::invalid_argument("fractional_part_of_product: beta must be finite");
    }
    return detail::product_fraction(beta, static_cast<double>(n));
}

// e^{2*pi*i*turns}.  Exact (1, 0) when the fractional part of turns is zero,
// which keeps fully coherent phase sums exactly coherent.
inline std::complex<double> unit_phasor(double turns) {
    const double f = turns - std::floor(turns);
    if (f == 0.0) {
        return {1.0, 0.0};
    }
    const double angle = 2.0 * std::numbers::pi * f;
    return {std::cos(angle), std::sin(angle)};
}

}  // namespace phaselab
