#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "bianchi/adjoint_l.hpp"

#include <cmath>
#include <complex>
#include <random>

using namespace bianchi;

namespace {

// Euler factor through the roots of X^2 - a X + q^{k+1}: the root-extraction route
// the library avoids.
long double factor_from_roots(unsigned long q, double a, unsigned k, double s) {
    using C = std::complex<long double>;
    const long double P = std::pow((long double)q, (long double)(k + 1));
    C disc = C((long double)a * a - 4 * P, 0);
    C r0 = (C(a, 0) + std::sqrt(disc)) / (long double)2, r1 = (C(a, 0) - std::sqrt(disc)) / (long double)2;
    const long double x = std::pow((long double)q, (long double)-s);
    C d = (C(1) - r0 / r1 * x) * (C(1) - x) * (C(1) - r1 / r0 * x);
    return 1 / d.real();
}

// a with |t| <= 2, i.e. a^2 <= 4 q^{k+1}, as a rational with denominator 8.
EulerData random_ramanujan(std::mt19937_64& rng, std::string label, unsigned long q, unsigned k) {
    const double bound = 2 * std::sqrt(std::pow(double(q), k + 1));
    std::uniform_real_distribution<double> u(-bound, bound);
    Q a(long(std::floor(u(rng) * 8)), 8);
    a.canonicalize();
    return EulerData::make(std::move(label), q, a, k);
}

// synthetic data: two ideals per prime norm up to B
std::vector<EulerData> synthetic(std::mt19937_64& rng, unsigned long B, unsigned k) {
    std::vector<EulerData> v;
    for (unsigned long q = 2; q <= B; ++q)
        if (is_prime(q)) {
            v.push_back(random_ramanujan(rng, std::to_string(q) + "a", q, k));
            v.push_back(random_ramanujan(rng, std::to_string(q) + "b", q, k));
        }
    return v;
}

}  // namespace

TEST_CASE("Euler factors") {
    SUBCASE("double root ratio") {
        EulerData e = EulerData::make("4", 4, 8, 1);
        CHECK(e.t == 2);
        CHECK(euler_factor_exact(e, 1) == Q(64, 27));
        CHECK(euler_factor(e, 1.5) == doctest::Approx(std::pow(1 - std::pow(4.0, -1.5), -3)).epsilon(1e-14));
    }
    SUBCASE("a = 0") {
        EulerData e = EulerData::make("5a", 5, 0, 2);
        CHECK(e.t == -2);
        const Q x(1, 25);
        CHECK(euler_factor_exact(e, 2) == 1 / ((1 - x) * (1 + x) * (1 + x)));
    }
    SUBCASE("q = 4, k = 1, a = 3") {
        EulerData e = EulerData::make("2", 4, 3, 1);
        CHECK(e.t == Q(-23, 16));
        // (3/4 (1 + 23/64 + 1/16))^{-1}
        CHECK(euler_factor_exact(e, 1) == Q(256, 273));
        CHECK(std::abs(euler_factor(e, 1) - 256.0 / 273.0) < 1e-15);
    }
    SUBCASE("agrees with the root route and is symmetric in the roots") {
        std::mt19937_64 rng(3);
        for (int n = 0; n < 200; ++n) {
            const unsigned long q = std::vector<unsigned long>{2, 3, 5, 7, 9, 11, 25}[rng() % 7];
            const unsigned k = 1 + rng() % 4;
            EulerData e = random_ramanujan(rng, "x", q, k);
            for (double s : {1.0, 1.5, 2.0}) {
                double f = euler_factor(e, s);
                CHECK(f > 0);
                CHECK(f == doctest::Approx(double(factor_from_roots(q, e.a.get_d(), k, s))).epsilon(1e-12));
            }
            // a -> -a leaves t and the factor unchanged
            EulerData m = EulerData::make("x", q, -e.a, k);
            CHECK(euler_factor_exact(m, 1) == euler_factor_exact(e, 1));
        }
    }
    SUBCASE("pole") {
        // t = x + 1/x at q = 4, s = 1 needs a^2 = (17/4 + 2) 16
        EulerData e = EulerData::make("4", 4, 10, 1);
        try {
            euler_factor_exact(e, 1);
            FAIL("expected pole");
        } catch (const EulerPole& p) {
            CHECK(p.subfactor == "(1 - t x + x^2)");
        }
        CHECK_THROWS_AS(euler_factor(e, 1.0), EulerPole);
        CHECK_THROWS_AS(euler_factor(e, 0.0), std::invalid_argument);
    }
}

TEST_CASE("prime ideal norms") {
    // Q(i): 2 ramified, 3 inert, 5 and 13 split
    std::vector<IdealNorm> v = prime_ideal_norms(-4, 13);
    std::vector<unsigned long> qs;
    for (auto& n : v) qs.push_back(n.q);
    CHECK(qs == std::vector<unsigned long>{2, 5, 5, 9, 13, 13});
    // Q(sqrt -7): 2 splits
    CHECK(prime_ideal_norms(-7, 2).size() == 2);
    // Q(sqrt -3): 2 inert
    CHECK(prime_ideal_norms(-3, 3).size() == 1);
    CHECK_THROWS_AS(prime_ideal_norms(-12, 5), std::invalid_argument);
    CHECK_THROWS_AS(prime_ideal_norms(5, 5), std::invalid_argument);
}

TEST_CASE("partial products") {
    SUBCASE("empty and single factor") {
        PartialL e = partial_adjoint_l({}, 2.0, 1);
        CHECK(e.value == 1);
        CHECK(e.log_tail == doctest::Approx(log_tail_bound(2.0, 1)));
        CHECK(e.factors == 0);
        EulerData d = EulerData::make("2", 2, 1, 1);
        PartialL s = partial_adjoint_l({d}, 2.0, 3);
        CHECK(s.value == doctest::Approx(euler_factor(d, 2.0)).epsilon(1e-15));
        CHECK(s.factors == 1);
        CHECK(s.lower() < s.value);
        CHECK(s.upper() > s.value);
    }
    SUBCASE("missing ideals") {
        std::vector<EulerData> d{EulerData::make("2", 2, 1, 1), EulerData::make("5a", 5, 3, 1)};
        try {
            partial_adjoint_l(d, 2.0, 10, -4);
            FAIL("expected missing data");
        } catch (const MissingEulerData& m) {
            REQUIRE(m.missing.size() == 2);
            CHECK(m.missing[0] == "norm 5 (split, 2 of 2)");
            CHECK(m.missing[1] == "norm 9 (inert, 1 of 1)");
        }
        d.push_back(EulerData::make("5b", 5, -3, 1));
        d.push_back(EulerData::make("3", 9, 1, 1));
        CHECK(partial_adjoint_l(d, 2.0, 10, -4).factors == 4);
        d.push_back(EulerData::make("3", 9, 2, 1));
        CHECK_THROWS_AS(partial_adjoint_l(d, 2.0, 10, -4), std::invalid_argument);
    }
    SUBCASE("order independence") {
        std::mt19937_64 rng(5);
        std::vector<EulerData> d = synthetic(rng, 200, 2);
        PartialL a = partial_adjoint_l(d, 1.0, 200);
        std::shuffle(d.begin(), d.end(), rng);
        PartialL b = partial_adjoint_l(d, 1.0, 200);
        CHECK(a.value == b.value);
        CHECK(a.history == b.history);
    }
    SUBCASE("positive and the bracket shrinks when B doubles") {
        std::mt19937_64 rng(9);
        for (int trial = 0; trial < 5; ++trial) {
            std::vector<EulerData> d = synthetic(rng, 4000, 2);
            for (double s : {1.0, 2.0}) {
                double prev = INFINITY;
                for (unsigned long B = 125; B <= 4000; B *= 2) {
                    PartialL L = partial_adjoint_l(d, s, B);
                    CHECK(L.value > 0);
                    CHECK(L.first_order_unbounded == (s <= 1));
                    double width = L.upper() - L.lower();
                    CHECK(width < prev);
                    prev = width;
                }
            }
        }
    }
    SUBCASE("tail bound covers the omitted factors at s = 2") {
        std::mt19937_64 rng(13);
        std::vector<EulerData> d = synthetic(rng, 20000, 1);
        const double full = partial_adjoint_l(d, 2.0, 20000).value;
        for (unsigned long B : {10ul, 50ul, 300ul, 2000ul}) {
            PartialL L = partial_adjoint_l(d, 2.0, B);
            CHECK(std::abs(std::log(full / L.value)) <= L.log_tail);
        }
    }
    SUBCASE("history ends at B and is reproducible") {
        std::mt19937_64 rng(1);
        std::vector<EulerData> d = synthetic(rng, 100, 1);
        PartialL L = partial_adjoint_l(d, 1.0, 100);
        REQUIRE(!L.history.empty());
        CHECK(L.history.back().first == 100);
        CHECK(L.history.back().second == L.value);
        CHECK(L.history.front().first == 2);
    }
    CHECK_THROWS_AS(log_tail_bound(0.5, 10), std::invalid_argument);
}

TEST_CASE("archimedean factor") {
    // exact coefficients of pi^{-1-2k}, from an independent evaluation in rational arithmetic
    const std::vector<Q> expect{Q(-26), Q(351, 2), Q(385140), Q(-12439875, 4), Q(-41591185020L),
                                Q(Z("5822353980135"), 16)};
    const std::vector<std::string> digits{"-8.385398952631867187949733699026559034",
                                          "5.734925193558691504462578087755154251",
                                          "1.275174199835880636124974618746066158",
                                          "-1.043295107715842021322067283675787468",
                                          "-1.413685146329002464715480319517543231",
                                          "1.253228543823601557281523055038771688"};
    for (unsigned k = 1; k <= 6; ++k) {
        CAPTURE(k);
        ArchFactor a = d_infinity(k), b = d_infinity_second(k);
        CHECK(a.coefficient == expect[k - 1]);
        CHECK(a.coefficient != 0);
        CHECK(a.pi_exponent == -1 - 2 * long(k));
        CHECK(b.coefficient == a.coefficient);
        CHECK(b.pi_exponent == a.pi_exponent);
        // exact value, the MPFR route and the independent reference agree to 36 digits
        CHECK(a.digits.substr(0, digits[k - 1].size()) == digits[k - 1]);
        CHECK(d_infinity_mpfr(k).substr(0, digits[k - 1].size()) == digits[k - 1]);
    }
    CHECK_THROWS_AS(d_infinity(0), std::invalid_argument);
}

TEST_CASE("table entries") {
    // k = 1: a_{0,0} = 3 C(2,1) (0! 0!) = 6, a_{+-2} = 3 * 2 * 4 = 24, a_{+-1} = -4
    CHECK(urban_table_entry(0, 1) == 6);
    CHECK(urban_table_entry(2, 1) == 24);
    CHECK(urban_table_entry(-2, 1) == 24);
    CHECK(urban_table_entry(1, 1) == -4);
    for (unsigned k = 1; k <= 6; ++k)
        for (long n = -long(k) - 1; n <= long(k) + 1; ++n) CHECK(urban_table_entry(n, k) == urban_table_entry(-n, k));
    CHECK_THROWS_AS(urban_table_entry(3, 1), std::out_of_range);
    CHECK_THROWS_AS(urban_table_entry(-8, 6), std::out_of_range);
    CHECK(!urban_table_covers(4, 1));
}

TEST_CASE("assembly") {
    SUBCASE("index") {
        for (unsigned long p : {3ul, 5ul, 7ul}) CHECK(iwahori_index(p) == (p + 1) * (p + 1));
        CHECK(iwahori_index(3) == 16);
    }
    SUBCASE("prefactor") {
        PartialL L;
        AdjointBracket b = assemble_adjoint_value(1.0, L, 1, -4, 3);
        // 16 * (-4) * (-26) / 16
        CHECK(b.rational_prefactor == 104);
        CHECK(b.pi_exponent == -4);
        CHECK(b.value == doctest::Approx(104 / std::pow(M_PI, 4)).epsilon(1e-14));
    }
    SUBCASE("trivial zero") {
        CHECK_THROWS_AS(assemble_adjoint_value(0.0, PartialL{}, 2, -4, 3), TrivialZero);
        CHECK_THROWS_AS(infer_adjoint_l(0.0, 1.0, 2, -4, 3), TrivialZero);
    }
    SUBCASE("round trip") {
        std::mt19937_64 rng(17);
        std::uniform_real_distribution<double> th(-50, 50);
        for (int n = 0; n < 20; ++n) {
            std::vector<EulerData> d = synthetic(rng, 500, 2);
            PartialL L = partial_adjoint_l(d, 1.0, 500);
            double theta = th(rng);
            for (long disc : {-3L, -4L, -7L, -8L}) {
                AdjointBracket b = assemble_adjoint_value(theta, L, 2, disc, 3);
                CHECK(b.lower <= b.value);
                CHECK(b.value <= b.upper);
                double back = infer_adjoint_l(theta, b.value, 2, disc, 3);
                CHECK(std::abs(back - L.value) <= 1e-12 * std::abs(L.value));
            }
        }
    }
}

TEST_CASE("non-critical slope") {
    SlopeVerdict o = noncritical_slope(0, 0, 2);
    CHECK(o.noncritical);
    CHECK(o.ordinary);
    CHECK(!noncritical_slope(3, 0, 2).noncritical);
    SlopeVerdict m = noncritical_slope(1, 2, 2);
    CHECK(m.noncritical);
    CHECK(!m.ordinary);
    CHECK(noncritical_slope(Q(5, 2), 0, 2).noncritical);
    CHECK(!noncritical_slope(Q(5, 2), 0, 1).noncritical);
}
