#pragma once

#include "bianchi/padic.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace bianchi {

// Local data at a prime ideal q: t = (a^2 - 2 q^{k+1}) / q^{k+1} = a0/a1 + a1/a0.
struct EulerData {
    std::string label;
    unsigned long q = 0;  // residue field cardinality
    Q a;
    unsigned k = 0;
    Q t;

    static EulerData make(std::string label, unsigned long q, const Q& a, unsigned k);
    bool ramanujan() const;  // |t| <= 2
};

// The factor denominator vanishes; `subfactor` is "(1 - x)" or "(1 - t x + x^2)".
struct EulerPole : std::domain_error {
    std::string subfactor;
    EulerPole(const std::string& what, std::string sub) : std::domain_error(what), subfactor(std::move(sub)) {}
};

// ((1 - x)(1 - t x + x^2))^{-1}, x = q^{-s}.
double euler_factor(const EulerData& ed, double s);
// Same at an integer s >= 1, exactly.
Q euler_factor_exact(const EulerData& ed, unsigned s);

// Prime ideals of O_K of norm <= B, from the splitting of rational primes.
struct IdealNorm {
    unsigned long q;
    unsigned long ell;
    Splitting type;
};
std::vector<IdealNorm> prime_ideal_norms(long disc_K, unsigned long B);

struct PartialL {
    double value = 1;
    // |log(L / value)| <= log_tail. Under |t| <= 2 every omitted log-factor is at most
    // 3 sum_m x^m / m; at most two prime ideals share a norm.
    double log_tail = 0;
    // s <= 1: the first-order part sum (1 + t) q^{-s} of the omitted product is only
    // conditionally convergent and is not covered by log_tail.
    bool first_order_unbounded = false;
    std::size_t factors = 0;
    std::vector<std::pair<unsigned long, double>> history;  // (bound, partial value), bound = 2^j and B
    double lower() const;
    double upper() const;
};

struct MissingEulerData : std::invalid_argument {
    std::vector<std::string> missing;
    MissingEulerData(const std::string& what, std::vector<std::string> m)
        : std::invalid_argument(what), missing(std::move(m)) {}
};

// Product over the data with q <= B. Every prime ideal of norm <= B must be present.
PartialL partial_adjoint_l(std::vector<EulerData> data, double s, unsigned long B, long disc_K);
// No completeness check (synthetic data).
PartialL partial_adjoint_l(std::vector<EulerData> data, double s, unsigned long B);

// Tail bound for the omitted ideals with norm > B.
double log_tail_bound(double s, unsigned long B);

// rational * pi^pi_exponent.
struct ArchFactor {
    Q coefficient;
    long pi_exponent = 0;
    double value = 0;
    std::string digits;  // 40 significant digits
};

// a_{n,-n}; throws std::out_of_range outside the three cases.
Q urban_table_entry(long n, unsigned k);
bool urban_table_covers(long n, unsigned k);

// (2 pi)^{-1-2k} (-1)^{k+1} ((k+1)!)^2 / (2k+1) sum_{|n| <= k+1} (-1)^n a_{2n,-2n} C(2k+2, k+n+1);
// terms with a_{2n,-2n} outside the table contribute nothing.
ArchFactor d_infinity(unsigned k);
// Independent transcription: even indices m = 2n paired with -m, factorials via Gamma-style products.
ArchFactor d_infinity_second(unsigned k);
// The value in floating point directly from the formula (MPFR, 256 bits).
std::string d_infinity_mpfr(unsigned k, int digits = 40);

// [G(Z_p) : Iw_G] counted over GL2(F_p) x GL2(F_p).
unsigned long iwahori_index(unsigned long p);

struct TrivialZero : std::domain_error {
    using std::domain_error::domain_error;
};

struct AdjointBracket {
    Q rational_prefactor;  // (p+1)^2 disc(K) * coefficient(D_inf) / 16
    long pi_exponent = 0;
    double prefactor = 0;  // rational_prefactor * pi^pi_exponent * theta
    double lower = 0, value = 0, upper = 0;
};

// (p+1)^2 theta D_inf disc(K) / (16 pi) * L(ad f, 1).
AdjointBracket assemble_adjoint_value(double theta, const PartialL& L, unsigned k, long disc_K, unsigned long p);
// Inverted: L(ad f, 1) from a pairing value.
double infer_adjoint_l(double theta, double pairing, unsigned k, long disc_K, unsigned long p);

struct SlopeVerdict {
    bool noncritical = false;
    bool ordinary = false;
};
SlopeVerdict noncritical_slope(const Q& v_alpha_p, const Q& v_alpha_pbar, unsigned k);

}  // namespace bianchi
