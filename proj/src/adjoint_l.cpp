#include "bianchi/adjoint_l.hpp"

#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <map>

namespace bianchi {

namespace {

Z fact(unsigned long n) {
    Z f;
    mpz_fac_ui(f.get_mpz_t(), n);
    return f;
}

Z binom(unsigned long n, unsigned long r) {
    Z b;
    mpz_bin_uiui(b.get_mpz_t(), n, r);
    return b;
}

Q canon(Q x) {
    x.canonicalize();
    return x;
}

// RAII for an MPFR variable.
struct Mpfr {
    mpfr_t v;
    explicit Mpfr(mpfr_prec_t prec = 256) { mpfr_init2(v, prec); }
    ~Mpfr() { mpfr_clear(v); }
    Mpfr(const Mpfr&) = delete;
    Mpfr& operator=(const Mpfr&) = delete;
};

std::string mpfr_digits(mpfr_t x, int digits) {
    char* buf = nullptr;
    mpfr_asprintf(&buf, "%.*Re", digits - 1, x);
    std::string s(buf);
    mpfr_free_str(buf);
    return s;
}

void fill_value(ArchFactor& a) {
    Mpfr pi, c, r;
    mpfr_const_pi(pi.v, MPFR_RNDN);
    mpfr_set_q(c.v, a.coefficient.get_mpq_t(), MPFR_RNDN);
    mpfr_pow_si(r.v, pi.v, a.pi_exponent, MPFR_RNDN);
    mpfr_mul(r.v, r.v, c.v, MPFR_RNDN);
    a.value = mpfr_get_d(r.v, MPFR_RNDN);
    a.digits = mpfr_digits(r.v, 40);
}

Splitting split_type(long disc, unsigned long ell) {
    if (ell != 2) return kronecker_split(disc, ell);
    long r = ((disc % 8) + 8) % 8;
    if (r == 1) return Splitting::split;
    if (r == 5) return Splitting::inert;
    return Splitting::ramified;
}

}  // namespace

// ---------------------------------------------------------------- Euler factors

EulerData EulerData::make(std::string label, unsigned long q, const Q& a, unsigned k) {
    if (q < 2) throw std::invalid_argument("EulerData: residue cardinality must be >= 2");
    EulerData e;
    e.label = std::move(label);
    e.q = q;
    e.a = a;
    e.k = k;
    const Q P(zpow(Z(q), k + 1));
    e.t = canon((a * a - 2 * P) / P);
    return e;
}

bool EulerData::ramanujan() const { return abs(t) <= 2; }

Q euler_factor_exact(const EulerData& ed, unsigned s) {
    if (s == 0) throw std::invalid_argument("euler_factor: need q^{-s} < 1");
    const Q x = canon(Q(1, 1) / Q(zpow(Z(ed.q), s)));
    const Q lin = 1 - x;
    const Q quad = canon(1 - ed.t * x + x * x);
    if (quad == 0)
        throw EulerPole("euler_factor: pole at " + ed.label + " (1 - t x + x^2 = 0)", "(1 - t x + x^2)");
    return canon(1 / (lin * quad));
}

double euler_factor(const EulerData& ed, double s) {
    if (!(s > 0)) throw std::invalid_argument("euler_factor: need q^{-s} < 1");
    if (s == std::floor(s) && s < 64) return euler_factor_exact(ed, unsigned(s)).get_d();
    const double x = std::pow(double(ed.q), -s);
    const double quad = 1 - ed.t.get_d() * x + x * x;
    if (quad == 0)
        throw EulerPole("euler_factor: pole at " + ed.label + " (1 - t x + x^2 = 0)", "(1 - t x + x^2)");
    return 1 / ((1 - x) * quad);
}

std::vector<IdealNorm> prime_ideal_norms(long disc_K, unsigned long B) {
    if (!is_fundamental_discriminant(disc_K) || disc_K >= 0)
        throw std::invalid_argument("prime_ideal_norms: disc_K must be a negative fundamental discriminant");
    std::vector<IdealNorm> out;
    for (unsigned long ell = 2; ell <= B; ++ell) {
        if (!is_prime(ell)) continue;
        Splitting t = split_type(disc_K, ell);
        if (t == Splitting::split) {
            out.push_back({ell, ell, t});
            out.push_back({ell, ell, t});
        } else if (t == Splitting::ramified) {
            out.push_back({ell, ell, t});
        } else if (ell <= B / ell) {
            out.push_back({ell * ell, ell, t});
        }
    }
    std::sort(out.begin(), out.end(), [](const IdealNorm& a, const IdealNorm& b) { return a.q < b.q; });
    return out;
}

double log_tail_bound(double s, unsigned long B) {
    if (!(s > 0.5)) throw std::invalid_argument("log_tail_bound: need s > 1/2");
    const double N = double(B) + 1;
    const double xN = std::pow(N, -s);
    if (s > 1) {
        // |log f| <= 3 x / (1 - x), at most two ideals per norm n >= N
        return 6 / (1 - xN) * (xN + std::pow(N, 1 - s) / (s - 1));
    }
    // m >= 2 part only: 3 sum_{m >= 2} x^m / m <= (3/2) x^2 / (1 - x)
    return 3 / (1 - xN) * (xN * xN + std::pow(N, 1 - 2 * s) / (2 * s - 1));
}

double PartialL::lower() const { return value * std::exp(-log_tail); }
double PartialL::upper() const { return value * std::exp(log_tail); }

PartialL partial_adjoint_l(std::vector<EulerData> data, double s, unsigned long B) {
    std::sort(data.begin(), data.end(),
              [](const EulerData& a, const EulerData& b) { return a.q != b.q ? a.q < b.q : a.label < b.label; });
    PartialL out;
    out.log_tail = log_tail_bound(s, B);
    out.first_order_unbounded = s <= 1;
    unsigned long next = 2;
    for (const auto& ed : data) {
        if (ed.q > B) break;
        while (next < ed.q && next < B) {
            out.history.push_back({next, out.value});
            next *= 2;
        }
        out.value *= euler_factor(ed, s);
        ++out.factors;
    }
    while (next < B) {
        out.history.push_back({next, out.value});
        next *= 2;
    }
    out.history.push_back({B, out.value});
    return out;
}

PartialL partial_adjoint_l(std::vector<EulerData> data, double s, unsigned long B, long disc_K) {
    std::map<unsigned long, long> need, have;
    std::map<unsigned long, Splitting> kind;
    for (const auto& n : prime_ideal_norms(disc_K, B)) ++need[n.q], kind[n.q] = n.type;
    std::map<std::string, int> labels;
    for (const auto& ed : data) {
        if (ed.q <= B) ++have[ed.q];
        if (++labels[ed.label] > 1) throw std::invalid_argument("partial_adjoint_l: duplicate label " + ed.label);
    }
    std::vector<std::string> missing;
    for (const auto& [q, c] : need) {
        long h = have.count(q) ? have[q] : 0;
        for (long i = h; i < c; ++i)
            missing.push_back("norm " + std::to_string(q) + " (" + to_string(kind[q]) + ", " +
                              std::to_string(i + 1) + " of " + std::to_string(c) + ")");
    }
    for (const auto& [q, h] : have)
        if (!need.count(q) || h > need[q])
            throw std::invalid_argument("partial_adjoint_l: data at norm " + std::to_string(q) +
                                        " does not match any prime ideal");
    if (!missing.empty())
        throw MissingEulerData("partial_adjoint_l: " + std::to_string(missing.size()) + " prime ideals missing",
                               missing);
    return partial_adjoint_l(std::move(data), s, B);
}

// ---------------------------------------------------------------- D_infinity

bool urban_table_covers(long n, unsigned k) { return std::labs(n) <= long(k) + 1; }

Q urban_table_entry(long n, unsigned k) {
    const long K = k;
    const Z c = binom(2 * k, k);
    const long sgn_n = (n % 2 == 0) ? 1 : -1;
    const long sgn_k1 = (k % 2 == 0) ? -1 : 1;  // (-1)^{k+1}
    if (std::labs(n) <= K - 1) {
        Q v(Z(2 * K * K + K) * c, fact(k) * fact(k));
        v.canonicalize();
        return v * sgn_n * Q(fact(K - n - 1) * fact(K + n - 1));
    }
    if (std::labs(n) == K + 1) return Q(Z(2 * K + 1) * (K + 1) * sgn_k1 * c * c);
    if (std::labs(n) == K) return Q(-sgn_k1 * c * c);
    throw std::out_of_range("urban_table_entry: index " + std::to_string(n) + " outside the table for k = " +
                            std::to_string(k));
}

ArchFactor d_infinity(unsigned k) {
    if (k == 0) throw std::invalid_argument("d_infinity: k must be >= 1");
    const long K = k;
    Q sum = 0;
    for (long n = -K - 1; n <= K + 1; ++n) {
        if (!urban_table_covers(2 * n, k)) continue;
        Q term = urban_table_entry(2 * n, k) * Q(binom(2 * k + 2, unsigned(K + n + 1)));
        sum += (n % 2 == 0) ? term : Q(-term);
    }
    ArchFactor a;
    const long sgn = (k % 2 == 0) ? -1 : 1;
    a.coefficient = canon(Q(Z(sgn) * fact(k + 1) * fact(k + 1), Z(2 * K + 1) * zpow(2, 2 * k + 1)) * sum);
    a.pi_exponent = -1 - 2 * K;
    if (a.coefficient == 0) throw std::logic_error("d_infinity: vanishes (transcription error)");
    fill_value(a);
    return a;
}

ArchFactor d_infinity_second(unsigned k) {
    if (k == 0) throw std::invalid_argument("d_infinity: k must be >= 1");
    const unsigned long K = k;
    // (2k^2 + k) C(2k, k) / (k!)^2 = k (2k + 1) (2k)! / (k!)^4
    const Q mid(Z(K) * (2 * K + 1) * fact(2 * K), fact(K) * fact(K) * fact(K) * fact(K));
    const Z c2 = fact(2 * K) * fact(2 * K) / (fact(K) * fact(K) * fact(K) * fact(K));
    auto entry = [&](unsigned long m) -> Q {  // a_{m,-m} = a_{-m,m}, m even, m >= 0
        if (m + 1 <= K) return canon(mid * Q(fact(K - m - 1) * fact(K + m - 1)));
        if (m == K) return Q(K % 2 == 0 ? c2 : Z(-c2));
        return Q(Z(2 * K + 1) * (K + 1) * c2 * (K % 2 == 0 ? -1 : 1));
    };
    // (-1)^n with n = m/2; C(2k+2, k+1+n) = C(2k+2, k+1-n)
    Q sum = entry(0) * Q(binom(2 * K + 2, K + 1));
    for (unsigned long m = 2; m <= K + 1; m += 2) {
        const unsigned long n = m / 2;
        Q pair = 2 * entry(m) * Q(binom(2 * K + 2, K + 1 + n));
        sum += (n % 2 == 0) ? pair : Q(-pair);
    }
    ArchFactor a;
    Q pre(fact(K + 1) * fact(K + 1), Z(2 * K + 1));
    for (unsigned long i = 0; i < 2 * K + 1; ++i) pre /= 2;
    if (K % 2 == 0) pre = -pre;
    a.coefficient = canon(pre * sum);
    a.pi_exponent = -1 - 2 * long(K);
    fill_value(a);
    return a;
}

std::string d_infinity_mpfr(unsigned k, int digits) {
    if (k == 0) throw std::invalid_argument("d_infinity: k must be >= 1");
    const long K = k;
    Mpfr sum, term, b, pi, out;
    mpfr_set_ui(sum.v, 0, MPFR_RNDN);
    for (long n = -K - 1; n <= K + 1; ++n) {
        const long m = 2 * n;
        if (std::labs(m) > K + 1) continue;
        Mpfr a, f1, f2;
        if (std::labs(m) <= K - 1) {
            mpfr_fac_ui(f1.v, K - m - 1, MPFR_RNDN);
            mpfr_fac_ui(f2.v, K + m - 1, MPFR_RNDN);
            mpfr_mul(a.v, f1.v, f2.v, MPFR_RNDN);
            mpfr_fac_ui(f1.v, 2 * K, MPFR_RNDN);
            mpfr_mul(a.v, a.v, f1.v, MPFR_RNDN);
            mpfr_mul_ui(a.v, a.v, K * (2 * K + 1), MPFR_RNDN);
            mpfr_fac_ui(f1.v, K, MPFR_RNDN);
            mpfr_pow_ui(f1.v, f1.v, 4, MPFR_RNDN);
            mpfr_div(a.v, a.v, f1.v, MPFR_RNDN);
            if (m % 2 != 0) mpfr_neg(a.v, a.v, MPFR_RNDN);
        } else {
            mpfr_fac_ui(f1.v, 2 * K, MPFR_RNDN);
            mpfr_fac_ui(f2.v, K, MPFR_RNDN);
            mpfr_sqr(f2.v, f2.v, MPFR_RNDN);
            mpfr_div(a.v, f1.v, f2.v, MPFR_RNDN);
            mpfr_sqr(a.v, a.v, MPFR_RNDN);
            if (std::labs(m) == K + 1) mpfr_mul_ui(a.v, a.v, (2 * K + 1) * (K + 1), MPFR_RNDN);
            const bool neg = std::labs(m) == K + 1 ? (K % 2 == 0) : (K % 2 == 1);
            if (neg) mpfr_neg(a.v, a.v, MPFR_RNDN);
        }
        mpfr_fac_ui(f1.v, 2 * K + 2, MPFR_RNDN);
        mpfr_fac_ui(f2.v, K + n + 1, MPFR_RNDN);
        mpfr_div(b.v, f1.v, f2.v, MPFR_RNDN);
        mpfr_fac_ui(f2.v, K - n + 1, MPFR_RNDN);
        mpfr_div(b.v, b.v, f2.v, MPFR_RNDN);
        mpfr_mul(term.v, a.v, b.v, MPFR_RNDN);
        if (n % 2 != 0) mpfr_neg(term.v, term.v, MPFR_RNDN);
        mpfr_add(sum.v, sum.v, term.v, MPFR_RNDN);
    }
    mpfr_const_pi(pi.v, MPFR_RNDN);
    mpfr_mul_ui(pi.v, pi.v, 2, MPFR_RNDN);
    mpfr_pow_si(out.v, pi.v, -1 - 2 * K, MPFR_RNDN);
    mpfr_mul(out.v, out.v, sum.v, MPFR_RNDN);
    mpfr_fac_ui(term.v, K + 1, MPFR_RNDN);
    mpfr_sqr(term.v, term.v, MPFR_RNDN);
    mpfr_mul(out.v, out.v, term.v, MPFR_RNDN);
    mpfr_div_ui(out.v, out.v, 2 * K + 1, MPFR_RNDN);
    if (K % 2 == 0) mpfr_neg(out.v, out.v, MPFR_RNDN);
    return mpfr_digits(out.v, digits);
}

// ---------------------------------------------------------------- assembly

unsigned long iwahori_index(unsigned long p) {
    if (!is_prime(p)) throw std::invalid_argument("iwahori_index: p must be prime");
    unsigned long gl = 0, iw = 0;
    for (unsigned long a = 0; a < p; ++a)
        for (unsigned long b = 0; b < p; ++b)
            for (unsigned long c = 0; c < p; ++c)
                for (unsigned long d = 0; d < p; ++d) {
                    if ((a * d + p * p - (b * c) % p) % p == 0) continue;
                    ++gl;
                    if (c == 0) ++iw;
                }
    const unsigned long one = gl / iw;
    return one * one;
}

namespace {

Q rational_prefactor(unsigned k, long disc_K, unsigned long p, long& pi_exp) {
    const ArchFactor D = d_infinity(k);
    pi_exp = D.pi_exponent - 1;
    return canon(Q(Z(p + 1) * (p + 1) * disc_K, 16) * D.coefficient);
}

double to_double(const Q& c, long pi_exp) {
    Mpfr pi, r, q;
    mpfr_const_pi(pi.v, MPFR_RNDN);
    mpfr_pow_si(r.v, pi.v, pi_exp, MPFR_RNDN);
    mpfr_set_q(q.v, c.get_mpq_t(), MPFR_RNDN);
    mpfr_mul(r.v, r.v, q.v, MPFR_RNDN);
    return mpfr_get_d(r.v, MPFR_RNDN);
}

}  // namespace

AdjointBracket assemble_adjoint_value(double theta, const PartialL& L, unsigned k, long disc_K, unsigned long p) {
    if (theta == 0) throw TrivialZero("assemble_adjoint_value: theta = 0 (trivial zero)");
    AdjointBracket out;
    out.rational_prefactor = rational_prefactor(k, disc_K, p, out.pi_exponent);
    out.prefactor = theta * to_double(out.rational_prefactor, out.pi_exponent);
    out.value = out.prefactor * L.value;
    const double a = out.prefactor * L.lower(), b = out.prefactor * L.upper();
    out.lower = std::min(a, b);
    out.upper = std::max(a, b);
    return out;
}

double infer_adjoint_l(double theta, double pairing, unsigned k, long disc_K, unsigned long p) {
    if (theta == 0) throw TrivialZero("infer_adjoint_l: theta = 0, cannot divide");
    long e = 0;
    const Q c = rational_prefactor(k, disc_K, p, e);
    return pairing / (theta * to_double(c, e));
}

SlopeVerdict noncritical_slope(const Q& v_alpha_p, const Q& v_alpha_pbar, unsigned k) {
    SlopeVerdict v;
    v.noncritical = std::max(v_alpha_p, v_alpha_pbar) < Q(long(k) + 1);
    v.ordinary = v_alpha_p == 0 && v_alpha_pbar == 0;
    return v;
}

}  // namespace bianchi
