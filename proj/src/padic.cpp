#include "bianchi/padic.hpp"

#include <algorithm>
#include <stdexcept>

namespace bianchi {

unsigned long legendre_valuation(unsigned long n, unsigned long p) {
    if (p < 2) throw std::invalid_argument("legendre_valuation: p must be >= 2");
    unsigned long v = 0;
    while (n > 0) {
        n /= p;
        v += n;
    }
    return v;
}

long valuation(const Z& x, unsigned long p) {
    if (x == 0) throw std::domain_error("valuation of zero");
    Z t = x;
    long v = 0;
    while (mpz_divisible_ui_p(t.get_mpz_t(), p)) {
        mpz_divexact_ui(t.get_mpz_t(), t.get_mpz_t(), p);
        ++v;
    }
    return v;
}

long valuation(const Q& x, unsigned long p) {
    if (x == 0) throw std::domain_error("valuation of zero");
    return valuation(Z(x.get_num()), p) - valuation(Z(x.get_den()), p);
}

Z zpow(const Z& base, unsigned long e) {
    Z r;
    mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), e);
    return r;
}

Q qpow(const Q& base, long e) {
    if (e >= 0) return Q(zpow(base.get_num(), e), zpow(base.get_den(), e));
    if (base == 0) throw std::domain_error("qpow: zero to a negative power");
    Q r(zpow(base.get_den(), -e), zpow(base.get_num(), -e));
    r.canonicalize();
    return r;
}

bool is_prime(unsigned long n) {
    if (n < 2) return false;
    for (unsigned long d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

std::string to_string(Splitting s) {
    switch (s) {
        case Splitting::split: return "split";
        case Splitting::inert: return "inert";
        case Splitting::ramified: return "ramified";
    }
    return "?";
}

namespace {
bool squarefree(long m) {
    m = m < 0 ? -m : m;
    for (long d = 2; d * d <= m; ++d)
        if (m % (d * d) == 0) return false;
    return true;
}
}  // namespace

bool is_fundamental_discriminant(long d) {
    if (d == 0 || d == 1) return false;
    long r = ((d % 4) + 4) % 4;
    if (r == 1) return squarefree(d);
    if (r != 0) return false;
    long m = d / 4;
    long rm = ((m % 4) + 4) % 4;
    return (rm == 2 || rm == 3) && squarefree(m);
}

Splitting kronecker_split(long disc, unsigned long p) {
    if (!is_fundamental_discriminant(disc))
        throw std::invalid_argument("kronecker_split: " + std::to_string(disc) +
                                    " is not a fundamental discriminant");
    if (p < 3 || !is_prime(p))
        throw std::invalid_argument("kronecker_split: p must be an odd prime");
    Z d = disc, pz = p;
    int s = mpz_kronecker(d.get_mpz_t(), pz.get_mpz_t());
    if (s == 0) return Splitting::ramified;
    return s > 0 ? Splitting::split : Splitting::inert;
}

PrimeContext::PrimeContext(unsigned long p_, long disc)
    : p(p_), disc_K(disc), split_check(false) {
    if (p < 3 || !is_prime(p)) throw std::invalid_argument("PrimeContext: p must be an odd prime");
    if (disc >= 0) throw std::invalid_argument("PrimeContext: disc_K must be negative");
    split_check = kronecker_split(disc, p) == Splitting::split;
    if (!split_check)
        throw std::domain_error("PrimeContext: p = " + std::to_string(p) + " does not split in K");
}

// ---------------------------------------------------------------- PAdicNum

PAdicNum PAdicNum::zero(unsigned long p, long abs_prec) {
    PAdicNum z;
    z.p_ = p;
    z.zero_ = true;
    z.abs_ = std::min(abs_prec, kExact);
    return z;
}

PAdicNum PAdicNum::normalize(unsigned long p, Z t, long v, long abs_prec) {
    if (abs_prec >= kExact) {
        if (t == 0) return zero(p);
        throw std::logic_error("PAdicNum: nonzero value without finite precision");
    }
    if (abs_prec <= v) return zero(p, abs_prec);
    Z mod = zpow(p, abs_prec - v);
    t %= mod;
    if (t < 0) t += mod;
    if (t == 0) return zero(p, abs_prec);
    long w = valuation(t, p);
    PAdicNum r;
    r.p_ = p;
    r.zero_ = false;
    r.val_ = v + w;
    r.prec_ = abs_prec - r.val_;
    mpz_divexact(t.get_mpz_t(), t.get_mpz_t(), zpow(p, w).get_mpz_t());
    r.unit_ = t;
    r.abs_ = abs_prec;
    return r;
}

PAdicNum PAdicNum::from_integer(const Z& x, unsigned long p, long rel_prec) {
    return from_rational(Q(x), p, rel_prec);
}

PAdicNum PAdicNum::from_rational(const Q& x, unsigned long p, long rel_prec) {
    if (rel_prec < 1) throw std::invalid_argument("PAdicNum: precision must be >= 1");
    if (x == 0) return zero(p);
    Z num = x.get_num(), den = x.get_den();
    long vn = valuation(num, p), vd = valuation(den, p);
    mpz_divexact(num.get_mpz_t(), num.get_mpz_t(), zpow(p, vn).get_mpz_t());
    mpz_divexact(den.get_mpz_t(), den.get_mpz_t(), zpow(p, vd).get_mpz_t());
    Z mod = zpow(p, rel_prec);
    Z inv;
    mpz_invert(inv.get_mpz_t(), den.get_mpz_t(), mod.get_mpz_t());
    PAdicNum r;
    r.p_ = p;
    r.zero_ = false;
    r.val_ = vn - vd;
    r.prec_ = rel_prec;
    r.abs_ = r.val_ + rel_prec;
    r.unit_ = (num * inv) % mod;
    if (r.unit_ < 0) r.unit_ += mod;
    return r;
}

PAdicNum PAdicNum::operator+(const PAdicNum& o) const {
    if (!zero_ && !o.zero_ && p_ != o.p_) throw std::invalid_argument("PAdicNum: prime mismatch");
    long a = std::min(abs_prec(), o.abs_prec());
    if (zero_ && o.zero_) return zero(p_ ? p_ : o.p_, a);
    if (zero_) return o.truncate_abs(a);
    if (o.zero_) return truncate_abs(a);
    long v = std::min(val_, o.val_);
    Z t = unit_ * zpow(p_, val_ - v) + o.unit_ * zpow(p_, o.val_ - v);
    return normalize(p_, t, v, a);
}

PAdicNum PAdicNum::operator-() const {
    if (zero_) return *this;
    Z mod = zpow(p_, prec_);
    PAdicNum r = *this;
    r.unit_ = mod - unit_;
    return r;
}

PAdicNum PAdicNum::operator-(const PAdicNum& o) const { return *this + (-o); }

namespace {
long sat_add(long a, long b) {
    if (a >= PAdicNum::kExact || b >= PAdicNum::kExact) return PAdicNum::kExact;
    return std::min(a + b, PAdicNum::kExact);
}
}  // namespace

PAdicNum PAdicNum::operator*(const PAdicNum& o) const {
    unsigned long p = p_ ? p_ : o.p_;
    if (zero_ && o.zero_) return zero(p, sat_add(abs_, o.abs_));
    if (zero_) return zero(p, sat_add(abs_, o.val_));
    if (o.zero_) return zero(p, sat_add(o.abs_, val_));
    PAdicNum r;
    r.p_ = p;
    r.zero_ = false;
    r.val_ = val_ + o.val_;
    r.prec_ = std::min(prec_, o.prec_);
    r.abs_ = r.val_ + r.prec_;
    Z mod = zpow(p, r.prec_);
    r.unit_ = (unit_ * o.unit_) % mod;
    return r;
}

PAdicNum PAdicNum::operator/(const PAdicNum& o) const {
    if (o.zero_) throw std::domain_error("PAdicNum: division by zero-at-precision");
    if (zero_) {
        if (abs_ >= kExact) return *this;
        return zero(p_, abs_ - o.val_);
    }
    PAdicNum r;
    r.p_ = p_;
    r.zero_ = false;
    r.val_ = val_ - o.val_;
    r.prec_ = std::min(prec_, o.prec_);
    r.abs_ = r.val_ + r.prec_;
    Z mod = zpow(p_, r.prec_);
    Z inv;
    mpz_invert(inv.get_mpz_t(), o.unit_.get_mpz_t(), mod.get_mpz_t());
    r.unit_ = (unit_ * inv) % mod;
    return r;
}

PAdicNum PAdicNum::truncate_abs(long a) const {
    if (a >= abs_prec()) return *this;
    if (zero_) return zero(p_, a);
    return normalize(p_, unit_, val_, a);
}

Q PAdicNum::to_rational() const {
    if (zero_) return 0;
    return Q(unit_) * qpow(Q(p_), val_);
}

bool PAdicNum::agrees(const PAdicNum& x) const { return (*this - x).is_zero(); }

std::string PAdicNum::to_string() const {
    std::string ps = std::to_string(p_);
    if (zero_) return abs_ >= kExact ? "0" : "0 mod " + ps + "^" + std::to_string(abs_);
    return ps + "^" + std::to_string(val_) + " * " + unit_.get_str() + " mod " + ps + "^" +
           std::to_string(prec_);
}

// ---------------------------------------------------------------- roots

QuadRootPair hecke_poly_rootdata(const Q& lambda, unsigned long q, unsigned k) {
    if (q < 2) throw std::invalid_argument("hecke_poly_rootdata: q must be >= 2");
    QuadRootPair r;
    r.trace = lambda;
    r.norm = Q(zpow(q, k + 1));
    r.discriminant = lambda * lambda - 4 * r.norm;
    r.irreducible_over_r = r.discriminant < 0;
    r.degenerate = r.discriminant == 0;
    return r;
}

std::string q_to_string(const Q& x) { return x.get_str(); }

}  // namespace bianchi
