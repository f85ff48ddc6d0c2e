#pragma once

#include "bianchi/matrix.hpp"
#include "bianchi/padic.hpp"

#include <array>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace bianchi {

// Exponents (deg in lam, deg in lamb), compared graded-lex with lam > lamb.
using Mono = std::pair<int, int>;

struct GrlexGreater {
    bool operator()(const Mono& x, const Mono& y) const {
        int dx = x.first + x.second, dy = y.first + y.second;
        if (dx != dy) return dx > dy;
        return x.first > y.first;
    }
};

// Polynomial in Q[lam, lamb]; lam and lamb stand for the T-eigenvalues at the
// two primes above p.
class Poly {
public:
    using Terms = std::map<Mono, Q, GrlexGreater>;

    Poly() = default;
    Poly(const Q& c);
    Poly(long c) : Poly(Q(c)) {}
    static Poly monomial(int a, int b, const Q& c = 1);
    static Poly lam() { return monomial(1, 0); }
    static Poly lamb() { return monomial(0, 1); }

    bool is_zero() const { return t_.empty(); }
    bool is_constant() const;
    const Terms& terms() const { return t_; }
    Mono leading_mono() const;
    Q leading_coeff() const;
    int total_degree() const;
    int degree_lam() const;

    Poly operator+(const Poly& o) const;
    Poly operator-(const Poly& o) const;
    Poly operator-() const;
    Poly operator*(const Poly& o) const;
    Poly& operator+=(const Poly& o) { return *this = *this + o; }
    Poly& operator-=(const Poly& o) { return *this = *this - o; }
    Poly& operator*=(const Poly& o) { return *this = *this * o; }
    bool operator==(const Poly& o) const { return t_ == o.t_; }
    bool operator!=(const Poly& o) const { return !(*this == o); }

    // Coefficient of lam^d as a polynomial in lamb.
    Poly coeff_lam(int d) const;

    Q eval(const Q& lam, const Q& lamb) const;
    // Multiplies so that all coefficients are integers with gcd 1 and the
    // leading coefficient positive; returns the scalar used.
    Q make_primitive_integral();

    std::string to_string() const;

private:
    Terms t_;
    void add_term(const Mono& m, const Q& c);
};

inline bool is_zero_elem(const Poly& x) { return x.is_zero(); }

// Exact quotient a / b; throws std::domain_error when b does not divide a.
Poly divide_exact(const Poly& a, const Poly& b);
Poly poly_gcd(const Poly& a, const Poly& b);

// Element of Q(lam, lamb) in lowest terms with monic denominator.
class RatFunc {
public:
    RatFunc() : num_(), den_(1) {}
    RatFunc(const Q& c) : num_(c), den_(1) {}
    RatFunc(long c) : RatFunc(Q(c)) {}
    RatFunc(const Poly& n) : num_(n), den_(1) {}
    RatFunc(const Poly& n, const Poly& d);

    static RatFunc lam() { return RatFunc(Poly::lam()); }
    static RatFunc lamb() { return RatFunc(Poly::lamb()); }

    const Poly& num() const { return num_; }
    const Poly& den() const { return den_; }
    bool is_zero() const { return num_.is_zero(); }

    RatFunc operator+(const RatFunc& o) const;
    RatFunc operator-(const RatFunc& o) const;
    RatFunc operator-() const;
    RatFunc operator*(const RatFunc& o) const;
    RatFunc operator/(const RatFunc& o) const;
    RatFunc& operator+=(const RatFunc& o) { return *this = *this + o; }
    RatFunc& operator-=(const RatFunc& o) { return *this = *this - o; }
    RatFunc& operator*=(const RatFunc& o) { return *this = *this * o; }
    RatFunc& operator/=(const RatFunc& o) { return *this = *this / o; }
    bool operator==(const RatFunc& o) const { return num_ == o.num_ && den_ == o.den_; }
    bool operator!=(const RatFunc& o) const { return !(*this == o); }

    Q eval(const Q& lam, const Q& lamb) const;
    std::string to_string() const;

private:
    Poly num_, den_;
    void canonicalize();
};

inline bool is_zero_elem(const RatFunc& x) { return x.is_zero(); }

RatFunc rpow(const RatFunc& x, int e);

// Element c0 + c1 a + c2 b + c3 ab of Q(lam,lamb)[a,b]/(a^2 - lam a + P, b^2 - lamb b + P)
// with P = p^{k+1}; a, b are the chosen roots at the two primes.
class StabScalar {
public:
    StabScalar() = default;
    StabScalar(unsigned long p, unsigned k);
    StabScalar(unsigned long p, unsigned k, const RatFunc& c0);
    StabScalar(unsigned long p, unsigned k, const std::array<RatFunc, 4>& c);

    static StabScalar alpha(unsigned long p, unsigned k);     // a
    static StabScalar alphabar(unsigned long p, unsigned k);  // b

    unsigned long p() const { return p_; }
    unsigned k() const { return k_; }
    const std::array<RatFunc, 4>& coeffs() const { return c_; }
    bool is_zero() const;
    Q norm_P() const;

    StabScalar operator+(const StabScalar& o) const;
    StabScalar operator-(const StabScalar& o) const;
    StabScalar operator-() const;
    StabScalar operator*(const StabScalar& o) const;
    StabScalar operator/(const StabScalar& o) const { return *this * o.inverse(); }
    StabScalar& operator+=(const StabScalar& o) { return *this = *this + o; }
    StabScalar& operator-=(const StabScalar& o) { return *this = *this - o; }
    StabScalar& operator*=(const StabScalar& o) { return *this = *this * o; }
    bool operator==(const StabScalar& o) const;
    bool operator!=(const StabScalar& o) const { return !(*this == o); }

    StabScalar inverse() const;
    // a -> lam - a only / b -> lamb - b only.
    StabScalar sigma_alpha() const;
    StabScalar sigma_alphabar() const;

    // Exact value at numeric lam, lamb and numeric roots a, b.
    Q eval(const Q& lam, const Q& lamb, const Q& a, const Q& b) const;
    std::string to_string() const;

private:
    unsigned long p_ = 0;
    unsigned k_ = 0;
    std::array<RatFunc, 4> c_{};
    void adopt(const StabScalar& o);
};

inline bool is_zero_elem(const StabScalar& x) { return x.is_zero(); }

// Finite formal polynomial in a, b with RatFunc coefficients, keyed by (deg a, deg b).
using RawAlphaPoly = std::map<std::pair<int, int>, RatFunc>;

StabScalar reduce(const RawAlphaPoly& raw, unsigned long p, unsigned k);
StabScalar conjugate(const StabScalar& x);

// A pairing value (coefficient) * s, with s the formal classical pairing.
struct SMultiple {
    StabScalar coeff;
    std::string to_string() const { return "(" + coeff.to_string() + ")*s"; }
};

struct InfeasibilityCertificate {
    std::size_t row;   // row of the echelon form whose left side vanished
    Poly rhs;          // nonzero right-hand side left in that row
};

struct AffineSolution {
    bool consistent = false;
    std::size_t rank = 0;
    std::vector<RatFunc> particular;
    std::vector<std::vector<RatFunc>> nullspace;
    std::optional<InfeasibilityCertificate> certificate;
    std::vector<Poly> denominators;  // row multipliers used to clear fractions
};

// Solves A x = b over Q(lam, lamb) by fraction-free (Bareiss) elimination.
AffineSolution solve_linear_system(const Matrix<RatFunc>& A, const std::vector<RatFunc>& b);

// Rank of a rational matrix.
std::size_t rank_q(Matrix<Q> A);
Q det_q(Matrix<Q> A);
RatFunc det_ratfunc(Matrix<RatFunc> A);

Matrix<Q> eval_matrix(const Matrix<RatFunc>& M, const Q& lam, const Q& lamb);

}  // namespace bianchi
