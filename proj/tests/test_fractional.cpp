#include "catch2/catch_amalgamated.hpp"

#include "phaselab/fractional.hpp"

#include <cmath>
#include <cstdint>
#include <random>

using namespace phaselab;

namespace {

// Exact <beta * n> for a double beta and integer n, by integer arithmetic on
// the mantissa: beta = m * 2^(e-53) exactly, so the fractional part of
// beta*n is ((m*n) mod 2^s)/2^s with s = 53-e.  Completely independent of
// the split-product implementation under test.
double exact_product_fraction(double beta, std::int64_t n) {
    REQUIRE(beta > 0.0);
    int e = 0;
    const double mant = std::frexp(beta, &e);  // beta = mant * 2^e, mant in [0.5, 1)
    const auto m = static_cast<std::int64_t>(std::llround(std::ldexp(mant, 53)));
    const int shift = 53 - e;
    REQUIRE(shift > 0);
    REQUIRE(shift < 120);
    __int128 prod = static_cast<__int128>(m) * n;
    const __int128 denom = static_cast<__int128>(1) << shift;
    __int128 r = prod % denom;
    if (r < 0) {
        r += denom;
    }
    return static_cast<double>(r) / static_cast<double>(denom);
}

}  // namespace

TEST_CASE("fractional_part basics") {
    CHECK(fractional_part(0.0) == 0.0);
    CHECK(fractional_part(-0.25) == 0.75);
    CHECK_THAT(fractional_part(3.169925), Catch::Matchers::WithinAbs(0.169925, 1e-12));
    CHECK(fractional_part(5.0) == 0.0);
    CHECK(fractional_part(-3.0) == 0.0);

    SECTION("output always lands in [0, 1)") {
        std::mt19937_64 rng(7);
        for (int i = 0; i < 20000; ++i) {
            const double u = (static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5) * 2e6;
            const double f = fractional_part(u);
            REQUIRE(f >= 0.0);
            REQUIRE(f < 1.0);
        }
        // the nasty corner: tiny negative values have fractional part just under 1
        const double f = fractional_part(-1e-300);
        CHECK(f >= 0.0);
        CHECK(f < 1.0);
    }

    SECTION("rejects non-finite input") {
        CHECK_THROWS_AS(fractional_part(std::numeric_limits<double>::infinity()), std::invalid_argument);
        CHECK_THROWS_AS(fractional_part(std::numeric_limits<double>::quiet_NaN()), std::invalid_argument);
    }

    SECTION("invariant under integer shifts (exact dyadic inputs)") {
        std::mt19937_64 rng(11);
        for (int i = 0; i < 5000; ++i) {
            const double u = static_cast<double>(rng() % 1024) / 1024.0;
            const auto k = static_cast<std::int64_t>(rng() % 2000001) - 1000000;
            // u + k is exact: u has 10 mantissa bits, |k| <= 1e6 has 20
            const double shifted = u + static_cast<double>(k);
            REQUIRE(std::abs(fractional_part(shifted) - u) <= 1e-12);
        }
    }
}

TEST_CASE("fractional_part_of_product examples") {
    const double log2_3 = std::log2(3.0);
    CHECK_THAT(fractional_part_of_product(log2_3, 1), Catch::Matchers::WithinAbs(0.5849625007, 1e-9));
    CHECK(fractional_part_of_product(0.5, 4) == 0.0);
    CHECK_THAT(fractional_part_of_product(log2_3, 2), Catch::Matchers::WithinAbs(0.1699250014, 1e-9));
}

TEST_CASE("fractional_part_of_product matches the exact integer oracle") {
    const double log2_3 = std::log2(3.0);
    // precision must not degrade with n
    for (const std::int64_t n : {1LL, 2LL, 1000LL, 1000000LL, 999999937LL, 1000000000LL}) {
        const double expected = exact_product_fraction(log2_3, n);
        const double got = fractional_part_of_product(log2_3, n);
        INFO("n = " << n);
        CHECK(std::abs(got - expected) <= 1e-9);
        CHECK(std::abs(got - expected) <= 1e-12);  // actual accuracy is far better than contract
    }

    SECTION("randomized betas and block counts") {
        std::mt19937_64 rng(2024);
        for (int i = 0; i < 5000; ++i) {
            const double beta = 0.5 + 3.5 * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
            const auto n = static_cast<std::int64_t>(rng() % 1000000000ull) + 1;
            const double expected = exact_product_fraction(beta, n);
            const double got = fractional_part_of_product(beta, n);
            // both may sit on opposite sides of a wrap; compare on the circle
            double diff = std::abs(got - expected);
            diff = std::min(diff, 1.0 - diff);
            REQUIRE(diff <= 1e-9);
        }
    }

    SECTION("negative multipliers") {
        std::mt19937_64 rng(5);
        for (int i = 0; i < 2000; ++i) {
            const double beta = 0.5 + 3.5 * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
            const auto n = static_cast<std::int64_t>(rng() % 1000000ull) + 1;
            const double plus = fractional_part_of_product(beta, n);
            const double minus = fractional_part_of_product(beta, -n);
            // <x> + <-x> is 1 for non-integer x, 0 for integer x
            const double wrap = plus == 0.0 ? 0.0 : 1.0;
            REQUIRE(std::abs(plus + minus - wrap) <= 1e-9);
        }
    }
}

TEST_CASE("unit_phasor is exact at zero turns") {
    CHECK(unit_phasor(0.0) == std::complex<double>(1.0, 0.0));
    CHECK(unit_phasor(3.0) == std::complex<double>(1.0, 0.0));
    CHECK(unit_phasor(-2.0) == std::complex<double>(1.0, 0.0));
    CHECK_THAT(std::abs(unit_phasor(0.3)), Catch::Matchers::WithinAbs(1.0, 1e-15));
    CHECK_THAT(unit_phasor(0.5).real(), Catch::Matchers::WithinAbs(-1.0, 1e-15));
}
