#pragma once

#include <gmpxx.h>

#include <climits>
#include <string>

namespace bianchi {

using Z = mpz_class;
using Q = mpq_class;

// v_p(n!) by Legendre's formula.
unsigned long legendre_valuation(unsigned long n, unsigned long p);

// v_p of a nonzero integer/rational; throws on zero.
long valuation(const Z& x, unsigned long p);
long valuation(const Q& x, unsigned long p);

Z zpow(const Z& base, unsigned long e);
Q qpow(const Q& base, long e);

bool is_prime(unsigned long n);

enum class Splitting { split, inert, ramified };
std::string to_string(Splitting s);

bool is_fundamental_discriminant(long d);

// Splitting type of the odd prime p in Q(sqrt(disc)).
Splitting kronecker_split(long disc, unsigned long p);

struct PrimeContext {
    unsigned long p;
    long disc_K;
    bool split_check;

    PrimeContext(unsigned long p, long disc_K);
};

// Truncated p-adic number p^v * u with u a unit mod p^M.
// A zero-at-precision value is known to vanish mod p^abs_prec; abs_prec may
// be kExact for an exact zero.
class PAdicNum {
public:
    static constexpr long kExact = LONG_MAX / 4;

    PAdicNum() = default;

    static PAdicNum from_rational(const Q& x, unsigned long p, long rel_prec);
    static PAdicNum from_integer(const Z& x, unsigned long p, long rel_prec);
    static PAdicNum zero(unsigned long p, long abs_prec = kExact);

    unsigned long prime() const { return p_; }
    bool is_zero() const { return zero_; }
    // Valuation; for a zero-at-precision value this is the absolute precision.
    long val() const { return zero_ ? abs_ : val_; }
    const Z& unit() const { return unit_; }
    long rel_prec() const { return zero_ ? 0 : prec_; }
    long abs_prec() const { return zero_ ? abs_ : val_ + prec_; }

    PAdicNum operator+(const PAdicNum& o) const;
    PAdicNum operator-(const PAdicNum& o) const;
    PAdicNum operator-() const;
    PAdicNum operator*(const PAdicNum& o) const;
    PAdicNum operator/(const PAdicNum& o) const;
    PAdicNum& operator+=(const PAdicNum& o) { return *this = *this + o; }
    PAdicNum& operator-=(const PAdicNum& o) { return *this = *this - o; }
    PAdicNum& operator*=(const PAdicNum& o) { return *this = *this * o; }

    // Caps the absolute precision (never raises it).
    PAdicNum truncate_abs(long abs_prec) const;

    // Representative in Q: p^v * u (u in [0, p^M)).
    Q to_rational() const;

    // True when this and x agree to the smaller of the two absolute precisions.
    bool agrees(const PAdicNum& x) const;

    std::string to_string() const;

private:
    unsigned long p_ = 0;
    bool zero_ = true;
    long val_ = 0;
    long prec_ = 0;
    long abs_ = kExact;
    Z unit_ = 0;

    static PAdicNum normalize(unsigned long p, Z t, long v, long abs_prec);
};

inline bool is_zero_elem(const PAdicNum& x) { return x.is_zero(); }

struct QuadRootPair {
    Q trace;
    Q norm;
    Q discriminant;
    bool irreducible_over_r;   // discriminant < 0
    bool degenerate;           // discriminant == 0
};

// Data of X^2 - lambda X + q^{k+1}.
QuadRootPair hecke_poly_rootdata(const Q& lambda, unsigned long q, unsigned k);

std::string q_to_string(const Q& x);

}  // namespace bianchi
