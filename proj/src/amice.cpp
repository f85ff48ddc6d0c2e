#include "bianchi/amice.hpp"

namespace bianchi {

namespace {

void check_order(unsigned r, unsigned r2) {
    if (r2 <= r) throw std::invalid_argument("amice: need r2 > r");
}

Z factorial(unsigned long n) {
    Z f;
    mpz_fac_ui(f.get_mpz_t(), n);
    return f;
}

unsigned long floor_div_pow(unsigned long i, unsigned long p, unsigned e) {
    Z d = zpow(p, e);
    return Z(Z(i) / d).get_ui();
}

}  // namespace

long scaling_valuation_factorial(const AmiceIndex& i, unsigned r, unsigned r2, unsigned long p) {
    check_order(r, r2);
    long v = 0;
    for (unsigned long ij : i)
        v += long(legendre_valuation(floor_div_pow(ij, p, r), p)) -
             long(legendre_valuation(floor_div_pow(ij, p, r2), p));
    return v;
}

long scaling_valuation_floor_sum(const AmiceIndex& i, unsigned r, unsigned r2, unsigned long p) {
    check_order(r, r2);
    long v = 0;
    for (unsigned long ij : i)
        for (unsigned t = 1;; ++t) {
            unsigned long a = floor_div_pow(ij, p, r + t), b = floor_div_pow(ij, p, r2 + t);
            if (a == 0 && b == 0) break;
            v += long(a) - long(b);
        }
    return v;
}

long basis_scaling_valuation(const AmiceIndex& i, unsigned r, unsigned r2, unsigned long p) {
    long a = scaling_valuation_factorial(i, r, r2, p);
    long b = scaling_valuation_floor_sum(i, r, r2, p);
    if (a != b) throw std::logic_error("basis_scaling_valuation: routes disagree");
    return a;
}

Z basis_scaling_ratio(const AmiceIndex& i, unsigned r, unsigned r2, unsigned long p) {
    check_order(r, r2);
    Z q = 1;
    for (unsigned long ij : i) q *= factorial(floor_div_pow(ij, p, r)) / factorial(floor_div_pow(ij, p, r2));
    return q;
}

Z amice_basis_eval(const AmiceIndex& i, unsigned r, unsigned long p, const std::vector<long>& x) {
    if (x.size() != i.size()) throw std::invalid_argument("amice_basis_eval: dimension mismatch");
    Z v = 1;
    for (std::size_t j = 0; j < i.size(); ++j) {
        // binom(x, n) for any integer x via the falling factorial
        Z num = 1;
        for (unsigned long t = 0; t < i[j]; ++t) num *= Z(x[j] - long(t));
        v *= factorial(floor_div_pow(i[j], p, r)) * (num / factorial(i[j]));
    }
    return v;
}

bool AnalyticCoeffVector::in_cr() const {
    for (const auto& [i, c] : coeffs)
        if (!c.is_zero() && c.val() < 0) return false;
    return true;
}

bool AnalyticCoeffVector::in_cr_plus() const { return in_cr(); }

EmbedResult embed_cr_into_crprime(const AnalyticCoeffVector& f, unsigned r2) {
    check_order(f.r, r2);
    EmbedResult out;
    out.value.p = f.p;
    out.value.r = r2;
    out.value.trunc = f.trunc;
    for (const auto& [i, c] : f.coeffs) {
        Z q = basis_scaling_ratio(i, f.r, r2, f.p);
        PAdicNum s = PAdicNum::from_integer(q, f.p, std::max(1L, c.rel_prec()));
        PAdicNum v = c * s;
        if (v.is_zero() && v.abs_prec() < PAdicNum::kExact) out.precision_lost.push_back(i);
        out.value.coeffs.emplace(i, v);
    }
    return out;
}

unsigned compute_r_weight(const Q& k, unsigned long p) {
    if (k.get_den() != 1) throw UnsupportedWeight("compute_r_weight: only integer weights are supported");
    if (p < 3 || !is_prime(p)) throw std::invalid_argument("compute_r_weight: p must be an odd prime");
    Z kk = k.get_num();
    if (kk == 0) return 0;  // trivial character
    // k(1+p, 1+p) = (1+p)^{2k}; for negative k use the inverse, which has the same distance to 1
    Z e = abs(kk) * 2;
    Z u = zpow(Z(1 + p), e.get_ui()) - 1;
    long v = valuation(u, p);
    // smallest r >= 0 with v > 1/(p^r (p-1)), i.e. v * p^r * (p-1) > 1
    for (unsigned r = 0;; ++r)
        if (Z(v) * zpow(p, r) * Z(p - 1) > 1) return r;
}

}  // namespace bianchi
