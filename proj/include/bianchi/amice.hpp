#pragma once

#include "bianchi/padic.hpp"

#include <map>
#include <stdexcept>
#include <vector>

namespace bianchi {

using AmiceIndex = std::vector<unsigned long>;

constexpr unsigned long kDefaultAmiceTrunc = 16;

struct UnsupportedWeight : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// v_p of prod_j floor(i_j/p^r)! / floor(i_j/p^r2)!, via Legendre's formula.
long scaling_valuation_factorial(const AmiceIndex& i, unsigned r, unsigned r2, unsigned long p);
// The same quantity as sum_j sum_{t>0} floor(i_j/p^{r+t}) - floor(i_j/p^{r2+t}).
long scaling_valuation_floor_sum(const AmiceIndex& i, unsigned r, unsigned r2, unsigned long p);

// Both routes; throws std::logic_error if they disagree and
// std::invalid_argument if r2 <= r.
long basis_scaling_valuation(const AmiceIndex& i, unsigned r, unsigned r2, unsigned long p);

// Exact ratio prod_j floor(i_j/p^r)! / floor(i_j/p^r2)!  (an integer).
Z basis_scaling_ratio(const AmiceIndex& i, unsigned r, unsigned r2, unsigned long p);

// e_i^{(r)}(x) = prod_j floor(i_j/p^r)! * binom(x_j, i_j).
Z amice_basis_eval(const AmiceIndex& i, unsigned r, unsigned long p, const std::vector<long>& x);

struct AnalyticCoeffVector {
    unsigned long p = 3;
    unsigned r = 1;
    unsigned long trunc = kDefaultAmiceTrunc;
    std::map<AmiceIndex, PAdicNum> coeffs;

    bool in_cr() const;      // all coefficients integral
    bool in_cr_plus() const;  // same test; no decay is imposed at truncated scale
};

struct EmbedResult {
    AnalyticCoeffVector value;
    // indices whose coefficient carries no information after rescaling
    std::vector<AmiceIndex> precision_lost;
};

EmbedResult embed_cr_into_crprime(const AnalyticCoeffVector& f, unsigned r2);

// r_U for an integer weight k, reading the condition as |k(1+p,1+p) - 1|.
unsigned compute_r_weight(const Q& k, unsigned long p);

}  // namespace bianchi
