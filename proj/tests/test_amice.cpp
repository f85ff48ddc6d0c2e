#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "bianchi/amice.hpp"

#include <random>

using namespace bianchi;

namespace {
// independent oracle: strip factors of p from the exact integer ratio
long ratio_valuation(const AmiceIndex& i, unsigned r, unsigned r2, unsigned long p) {
    Z q = 1;
    for (unsigned long ij : i) {
        unsigned long a = ij, b = ij;
        for (unsigned t = 0; t < r; ++t) a /= p;
        for (unsigned t = 0; t < r2; ++t) b /= p;
        for (unsigned long m = b + 1; m <= a; ++m) q *= m;
    }
    long v = 0;
    while (q % p == 0) {
        q /= p;
        ++v;
    }
    return v;
}
}  // namespace

TEST_CASE("scaling valuation examples") {
    CHECK(basis_scaling_valuation({27}, 1, 2, 3) == 3);
    CHECK(basis_scaling_valuation({0}, 1, 2, 3) == 0);
    CHECK(basis_scaling_valuation({0}, 2, 5, 7) == 0);
    for (unsigned long p : {3ul, 5ul})
        for (unsigned r2 : {2u, 3u}) {
            unsigned long i = 1;
            for (unsigned t = 0; t < r2 + 1; ++t) i *= p;
            CHECK(basis_scaling_valuation({i}, 1, r2, p) > 0);
        }
    CHECK_THROWS_AS(basis_scaling_valuation({4}, 2, 2, 3), std::invalid_argument);
    CHECK_THROWS_AS(basis_scaling_valuation({4}, 3, 1, 3), std::invalid_argument);
}

TEST_CASE("two routes agree with the integer-ratio oracle") {
    for (unsigned long p : {3ul, 5ul})
        for (auto [r, r2] : {std::pair{1u, 2u}, {1u, 3u}, {2u, 3u}})
            for (unsigned long i = 0; i <= 300; ++i) {
                long a = scaling_valuation_factorial({i}, r, r2, p);
                CHECK(a == scaling_valuation_floor_sum({i}, r, r2, p));
                CHECK(a == ratio_valuation({i}, r, r2, p));
            }
    // two variables add
    CHECK(basis_scaling_valuation({27, 81}, 1, 2, 3) ==
          basis_scaling_valuation({27}, 1, 2, 3) + basis_scaling_valuation({81}, 1, 2, 3));
}

TEST_CASE("basis functions are integral at integer points") {
    // binomials from Pascal's triangle
    std::vector<std::vector<Z>> C(40, std::vector<Z>(40, 0));
    for (int n = 0; n < 40; ++n) {
        C[n][0] = 1;
        for (int m = 1; m <= n; ++m) C[n][m] = C[n - 1][m - 1] + C[n - 1][m];
    }
    for (unsigned long i = 0; i < 20; ++i)
        for (long x = 0; x < 39; ++x) {
            Z v = amice_basis_eval({i}, 1, 3, {x});
            Z f = 1;
            for (unsigned long m = 2; m <= i / 3; ++m) f *= m;
            CHECK(v == f * (std::size_t(x) >= i ? C[x][i] : Z(0)));
        }
}

TEST_CASE("embedding rescales by the exact ratio and composes") {
    const unsigned long p = 3;
    AnalyticCoeffVector one;
    one.p = p;
    one.r = 1;
    one.coeffs[{0, 0}] = PAdicNum::from_integer(1, p, 20);
    auto e = embed_cr_into_crprime(one, 2);
    CHECK(e.value.coeffs.at({0, 0}).to_rational() == 1);
    CHECK(e.value.r == 2);

    AnalyticCoeffVector basis;
    basis.p = p;
    basis.coeffs[{27, 5}] = PAdicNum::from_integer(1, p, 20);
    auto eb = embed_cr_into_crprime(basis, 2);
    CHECK(eb.value.coeffs.at({27, 5}).val() == basis_scaling_valuation({27, 5}, 1, 2, p));

    std::mt19937 rng(1);
    AnalyticCoeffVector f;
    f.p = p;
    for (unsigned long a = 0; a < 40; a += 3)
        for (unsigned long b = 0; b < 40; b += 7) f.coeffs[{a, b}] = PAdicNum::from_integer(Z(long(rng() % 1000)), p, 12);
    CHECK(f.in_cr());
    auto g = embed_cr_into_crprime(f, 2);
    auto h = embed_cr_into_crprime(g.value, 3);
    auto direct = embed_cr_into_crprime(f, 3);
    for (const auto& [i, c] : direct.value.coeffs) {
        CHECK(h.value.coeffs.at(i).to_rational() == c.to_rational());
        CHECK(h.value.coeffs.at(i).abs_prec() == c.abs_prec());
    }
    // linearity
    AnalyticCoeffVector two = basis;
    two.coeffs[{9, 0}] = PAdicNum::from_integer(2, p, 20);
    auto et = embed_cr_into_crprime(two, 3);
    CHECK(et.value.coeffs.at({9, 0}).to_rational() == Q(2) * Q(basis_scaling_ratio({9, 0}, 1, 3, p)));
    CHECK(et.value.coeffs.at({27, 5}).to_rational() == Q(basis_scaling_ratio({27, 5}, 1, 3, p)));
    CHECK(g.value.in_cr());
}

TEST_CASE("zero-at-precision coefficients are reported") {
    AnalyticCoeffVector f;
    f.p = 3;
    f.coeffs[{27}] = PAdicNum::zero(3, 4);
    auto e = embed_cr_into_crprime(f, 2);
    REQUIRE(e.precision_lost.size() == 1);
    CHECK(e.precision_lost[0] == AmiceIndex{27});
    CHECK(e.value.coeffs.at({27}).abs_prec() == 4 + 3);
}

TEST_CASE("r_U at integer weights") {
    CHECK(compute_r_weight(2, 3) == 0);
    CHECK(valuation(Z(zpow(4, 4) - 1), 3) == 1);
    CHECK(compute_r_weight(0, 5) == 0);
    for (unsigned long p : {3ul, 5ul, 7ul}) {
        CHECK(compute_r_weight(Q(long(p)), p) == 0);
        CHECK(valuation(Z(zpow(1 + p, 2 * p) - 1), p) == 2);
        for (long k = -4; k <= 12; ++k) CHECK(compute_r_weight(k, p) == 0);
    }
    CHECK_THROWS_AS(compute_r_weight(Q(1, 2), 3), UnsupportedWeight);
}
