#include "bianchi/symalg.hpp"

#include <algorithm>
#include <climits>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace bianchi {

// ---------------------------------------------------------------- Poly

Poly::Poly(const Q& c) {
    if (c != 0) t_[{0, 0}] = c;
}

Poly Poly::monomial(int a, int b, const Q& c) {
    Poly r;
    if (c != 0) r.t_[{a, b}] = c;
    return r;
}

void Poly::add_term(const Mono& m, const Q& c) {
    if (c == 0) return;
    auto it = t_.find(m);
    if (it == t_.end()) {
        t_.emplace(m, c);
        return;
    }
    it->second += c;
    if (it->second == 0) t_.erase(it);
}

bool Poly::is_constant() const { return t_.empty() || (t_.size() == 1 && t_.begin()->first == Mono{0, 0}); }

Mono Poly::leading_mono() const {
    if (t_.empty()) throw std::domain_error("Poly: leading monomial of zero");
    return t_.begin()->first;
}

Q Poly::leading_coeff() const { return t_.empty() ? Q(0) : t_.begin()->second; }

int Poly::total_degree() const {
    return t_.empty() ? -1 : t_.begin()->first.first + t_.begin()->first.second;
}

int Poly::degree_lam() const {
    int d = -1;
    for (const auto& [m, c] : t_) d = std::max(d, m.first);
    return d;
}

Poly Poly::operator+(const Poly& o) const {
    Poly r = *this;
    for (const auto& [m, c] : o.t_) r.add_term(m, c);
    return r;
}

Poly Poly::operator-(const Poly& o) const {
    Poly r = *this;
    for (const auto& [m, c] : o.t_) r.add_term(m, -c);
    return r;
}

Poly Poly::operator-() const {
    Poly r = *this;
    for (auto& [m, c] : r.t_) c = -c;
    return r;
}

Poly Poly::operator*(const Poly& o) const {
    Poly r;
    for (const auto& [m1, c1] : t_)
        for (const auto& [m2, c2] : o.t_) r.add_term({m1.first + m2.first, m1.second + m2.second}, c1 * c2);
    return r;
}

Poly Poly::coeff_lam(int d) const {
    Poly r;
    for (const auto& [m, c] : t_)
        if (m.first == d) r.t_[{0, m.second}] = c;
    return r;
}

Q Poly::eval(const Q& lam, const Q& lamb) const {
    Q s = 0;
    for (const auto& [m, c] : t_) s += c * qpow(lam, m.first) * qpow(lamb, m.second);
    return s;
}

Q Poly::make_primitive_integral() {
    if (t_.empty()) return 1;
    Z l = 1, g = 0;
    for (const auto& [m, c] : t_) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), c.get_den_mpz_t());
    for (const auto& [m, c] : t_) {
        Z n = c.get_num() * (l / c.get_den());
        mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), n.get_mpz_t());
    }
    Q s(l, g);
    s.canonicalize();
    if (t_.begin()->second < 0) s = -s;
    for (auto& [m, c] : t_) c *= s;
    return s;
}

std::string Poly::to_string() const {
    if (t_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [m, c] : t_) {
        Q a = abs(c);
        bool neg = c < 0;
        if (first) {
            if (neg) os << "-";
        } else {
            os << (neg ? " - " : " + ");
        }
        first = false;
        bool has_var = m.first > 0 || m.second > 0;
        if (!has_var || a != 1) {
            os << a.get_str();
            if (has_var) os << "*";
        }
        bool need_star = false;
        if (m.first > 0) {
            os << "lam";
            if (m.first > 1) os << "^" << m.first;
            need_star = true;
        }
        if (m.second > 0) {
            if (need_star) os << "*";
            os << "lamb";
            if (m.second > 1) os << "^" << m.second;
        }
    }
    return os.str();
}

Poly divide_exact(const Poly& a, const Poly& b) {
    if (b.is_zero()) throw std::domain_error("divide_exact: division by zero polynomial");
    if (b.is_constant()) return a * Poly(1 / b.leading_coeff());
    Poly q, r = a;
    Mono mb = b.leading_mono();
    Q cb = b.leading_coeff();
    while (!r.is_zero()) {
        Mono m = r.leading_mono();
        if (m.first < mb.first || m.second < mb.second)
            throw std::domain_error("divide_exact: " + b.to_string() + " does not divide " + a.to_string());
        Poly t = Poly::monomial(m.first - mb.first, m.second - mb.second, r.leading_coeff() / cb);
        q += t;
        r -= t * b;
    }
    return q;
}

namespace {

Poly monic(const Poly& a) {
    if (a.is_zero()) return a;
    return a * Poly(1 / a.leading_coeff());
}

bool uni_certainly_coprime(const Poly& a, const Poly& b);

// gcd of polynomials in lamb only.
Poly uni_gcd(Poly a, Poly b) {
    if (a.is_constant() || b.is_constant()) return Poly(1);
    if (uni_certainly_coprime(a, b)) return Poly(1);
    while (!b.is_zero()) {
        Poly r = a;
        int db = b.total_degree();
        while (!r.is_zero() && r.total_degree() >= db) {
            Poly t = Poly::monomial(0, r.total_degree() - db, r.leading_coeff() / b.leading_coeff());
            r -= t * b;
        }
        r.make_primitive_integral();
        a = b;
        b = r;
    }
    return monic(a);
}

Poly content_lam(const Poly& a) {
    Poly g;
    for (int d = 0; d <= a.degree_lam(); ++d) {
        Poly c = a.coeff_lam(d);
        if (c.is_zero()) continue;
        g = g.is_zero() ? monic(c) : uni_gcd(g, c);
        if (g.is_constant()) break;
    }
    return g;
}

Poly prem_lam(const Poly& a, const Poly& b) {
    int db = b.degree_lam();
    Poly lcb = b.coeff_lam(db);
    Poly r = a;
    while (!r.is_zero() && r.degree_lam() >= db) {
        int dr = r.degree_lam();
        Poly lcr = r.coeff_lam(dr);
        r = lcb * r - lcr * Poly::monomial(dr - db, 0) * b;
    }
    return r;
}

Poly primpart_lam(const Poly& a) {
    Poly c = content_lam(a);
    Poly r = divide_exact(a, c);
    r.make_primitive_integral();
    return r;
}

}  // namespace

namespace {

constexpr std::uint64_t kMod = 2305843009213693951ull;  // 2^61 - 1

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % kMod);
}

std::uint64_t powmod(std::uint64_t a, std::uint64_t e) {
    std::uint64_t r = 1;
    for (; e; e >>= 1, a = mulmod(a, a))
        if (e & 1) r = mulmod(r, a);
    return r;
}

bool to_mod(const Q& x, std::uint64_t& out) {
    Z m(std::to_string(kMod));
    Z d = x.get_den() % m;
    if (d == 0) return false;
    Z n = x.get_num() % m;
    if (n < 0) n += m;
    out = mulmod(n.get_ui(), powmod(d.get_ui(), kMod - 2));
    return true;
}

using UniMod = std::vector<std::uint64_t>;

void trim(UniMod& f) {
    while (!f.empty() && f.back() == 0) f.pop_back();
}

// Image in F[x] after substituting the other variable; x is lam (var = 0) or lamb (var = 1).
bool image(const Poly& a, int var, std::uint64_t c, UniMod& out) {
    int deg = 0;
    for (const auto& [m, q] : a.terms()) deg = std::max(deg, var == 0 ? m.first : m.second);
    out.assign(deg + 1, 0);
    for (const auto& [m, q] : a.terms()) {
        std::uint64_t v;
        if (!to_mod(q, v)) return false;
        int e = var == 0 ? m.first : m.second;
        int o = var == 0 ? m.second : m.first;
        out[e] = (out[e] + mulmod(v, powmod(c, o))) % kMod;
    }
    if (out.empty() || out.back() == 0) return false;  // leading coefficient vanished
    return true;
}

int gcd_degree(UniMod f, UniMod g) {
    trim(f);
    trim(g);
    while (!g.empty()) {
        std::uint64_t inv = powmod(g.back(), kMod - 2);
        while (f.size() >= g.size()) {
            std::uint64_t t = mulmod(f.back(), inv);
            std::size_t sh = f.size() - g.size();
            for (std::size_t i = 0; i < g.size(); ++i) f[sh + i] = (f[sh + i] + kMod - mulmod(t, g[i])) % kMod;
            trim(f);
            if (f.empty()) break;
        }
        std::swap(f, g);
    }
    return static_cast<int>(f.size()) - 1;
}

// True when gcd(a, b) is certainly constant; false means "unknown".
bool certainly_coprime(const Poly& a, const Poly& b) {
    static const std::uint64_t pts[3] = {1000003, 7919, 104729};
    bool lam_ok = false, lamb_ok = false;
    for (std::uint64_t c : pts) {
        UniMod fa, fb;
        if (!lam_ok && image(a, 0, c, fa) && image(b, 0, c, fb) && gcd_degree(fa, fb) == 0) lam_ok = true;
        if (!lamb_ok && image(a, 1, c, fa) && image(b, 1, c, fb) && gcd_degree(fa, fb) == 0) lamb_ok = true;
        if (lam_ok && lamb_ok) return true;
    }
    return false;
}

bool uni_certainly_coprime(const Poly& a, const Poly& b) {
    UniMod fa, fb;
    return image(a, 1, 1, fa) && image(b, 1, 1, fb) && gcd_degree(fa, fb) == 0;
}

bool is_monomial(const Poly& a) { return a.terms().size() == 1; }

Poly monomial_gcd(const Poly& mono, const Poly& f) {
    Mono m = mono.leading_mono();
    for (const auto& [e, c] : f.terms()) {
        m.first = std::min(m.first, e.first);
        m.second = std::min(m.second, e.second);
    }
    return Poly::monomial(m.first, m.second);
}


Z max_norm(const Poly& a) {
    Z m = 0;
    for (const auto& [e, c] : a.terms()) {
        Z v = abs(c.get_num());
        if (v > m) m = v;
    }
    return m;
}

// Substitutes lamb = xi into an integral polynomial; result lives in lam only.
Poly eval_lamb(const Poly& a, const Z& xi) {
    Poly r;
    for (const auto& [e, c] : a.terms()) r += Poly::monomial(e.first, 0, c * Q(zpow(xi, e.second)));
    return r;
}

Z eval_lam_int(const Poly& a, const Z& xi) {
    Z s = 0;
    for (const auto& [e, c] : a.terms()) s += c.get_num() * zpow(xi, e.first);
    return s;
}

Z int_content(const Poly& a) {
    Z g = 0;
    for (const auto& [e, c] : a.terms()) mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), c.get_num_mpz_t());
    return g;
}

// Symmetric xi-adic digits of h; var 0 places digit i on lam^i, var 1 on lamb^i.
Poly xi_adic(Z h, const Z& xi, int var, int other_exp) {
    Poly r;
    Z half = xi / 2;
    for (int i = 0; h != 0; ++i) {
        Z d = h % xi;
        if (d < 0) d += xi;
        if (d > half) d -= xi;
        if (d != 0) r += var == 0 ? Poly::monomial(i, other_exp, Q(d)) : Poly::monomial(other_exp, i, Q(d));
        h = (h - d) / xi;
    }
    return r;
}

bool divides(const Poly& g, const Poly& a) {
    try {
        divide_exact(a, g);
        return true;
    } catch (const std::domain_error&) {
        return false;
    }
}

void next_xi(Z& xi) { xi = xi * 73794 / 27011 + 1; }

// Full integer gcd (content included) of two integral polynomials in lam.
std::optional<Poly> heu_uni(const Poly& a, const Poly& b) {
    Z ca = int_content(a), cb = int_content(b), c;
    mpz_gcd(c.get_mpz_t(), ca.get_mpz_t(), cb.get_mpz_t());
    Poly pa = a * Poly(Q(1) / Q(ca)), pb = b * Poly(Q(1) / Q(cb));
    if (pa.is_constant() || pb.is_constant()) return Poly(Q(c));
    Z xi = 2 * std::min(max_norm(pa), max_norm(pb)) + 29;
    for (int t = 0; t < 6; ++t, next_xi(xi)) {
        Z A = eval_lam_int(pa, xi), B = eval_lam_int(pb, xi), g;
        mpz_gcd(g.get_mpz_t(), A.get_mpz_t(), B.get_mpz_t());
        if (g == 0) continue;
        Poly h = xi_adic(g, xi, 0, 0);
        if (h.is_zero()) continue;
        h.make_primitive_integral();
        if (divides(h, pa) && divides(h, pb)) return h * Poly(Q(c));
    }
    return std::nullopt;
}

std::optional<Poly> heuristic_gcd(const Poly& a0, const Poly& b0) {
    // degree bounds of the true gcd from modular images
    int bl = INT_MAX, bb = INT_MAX;
    static const std::uint64_t pts[3] = {1000003, 7919, 104729};
    for (std::uint64_t c : pts) {
        UniMod fa, fb;
        if (image(a0, 0, c, fa) && image(b0, 0, c, fb)) bl = std::min(bl, gcd_degree(fa, fb));
        if (image(a0, 1, c, fa) && image(b0, 1, c, fb)) bb = std::min(bb, gcd_degree(fa, fb));
    }
    if (bl == INT_MAX || bb == INT_MAX) return std::nullopt;

    Poly a = a0, b = b0;
    a.make_primitive_integral();
    b.make_primitive_integral();
    Z xi = 2 * std::min(max_norm(a), max_norm(b)) + 29;
    for (int t = 0; t < 6; ++t, next_xi(xi)) {
        Poly ea = eval_lamb(a, xi), eb = eval_lamb(b, xi);
        if (ea.is_zero() || eb.is_zero()) continue;
        auto h = heu_uni(ea, eb);
        if (!h) continue;
        Poly g;
        for (const auto& [e, c] : h->terms()) g += xi_adic(c.get_num(), xi, 1, e.first);
        if (g.is_zero()) continue;
        g.make_primitive_integral();
        if (g.degree_lam() < bl) continue;
        int gdb = 0;
        for (const auto& [e, c] : g.terms()) gdb = std::max(gdb, e.second);
        if (gdb < bb) continue;
        if (divides(g, a) && divides(g, b)) return monic(g);
    }
    return std::nullopt;
}

}  // namespace

Poly poly_gcd(const Poly& a, const Poly& b) {
    if (a.is_zero()) return monic(b);
    if (b.is_zero()) return monic(a);
    if (a.is_constant() || b.is_constant()) return Poly(1);
    if (is_monomial(a)) return monomial_gcd(a, b);
    if (is_monomial(b)) return monomial_gcd(b, a);
    if (certainly_coprime(a, b)) return Poly(1);
    if (auto g = heuristic_gcd(a, b)) return *g;
    int da = a.degree_lam(), db = b.degree_lam();
    if (da == 0 && db == 0) return uni_gcd(a, b);
    if (da == 0) return uni_gcd(a, content_lam(b));
    if (db == 0) return uni_gcd(b, content_lam(a));
    Poly cont = uni_gcd(content_lam(a), content_lam(b));
    Poly x = primpart_lam(a), y = primpart_lam(b);
    if (x.degree_lam() < y.degree_lam()) std::swap(x, y);
    while (!y.is_zero() && y.degree_lam() > 0) {
        Poly r = prem_lam(x, y);
        x = y;
        y = r.is_zero() ? r : primpart_lam(r);
    }
    Poly g = y.is_zero() ? x : Poly(1);
    if (!y.is_zero() || g.degree_lam() == 0) g = Poly(1);
    return monic(cont * g);
}

// ---------------------------------------------------------------- RatFunc

RatFunc::RatFunc(const Poly& n, const Poly& d) : num_(n), den_(d) { canonicalize(); }

void RatFunc::canonicalize() {
    if (den_.is_zero()) throw std::domain_error("RatFunc: zero denominator");
    if (num_.is_zero()) {
        den_ = Poly(1);
        return;
    }
    if (!den_.is_constant()) {
        Poly g = poly_gcd(num_, den_);
        if (!g.is_constant()) {
            num_ = divide_exact(num_, g);
            den_ = divide_exact(den_, g);
        }
    }
    Q c = den_.leading_coeff();
    if (c != 1) {
        Poly s(1 / c);
        num_ = num_ * s;
        den_ = den_ * s;
    }
}

RatFunc RatFunc::operator+(const RatFunc& o) const {
    if (den_ == o.den_) return RatFunc(num_ + o.num_, den_);
    return RatFunc(num_ * o.den_ + o.num_ * den_, den_ * o.den_);
}

RatFunc RatFunc::operator-(const RatFunc& o) const {
    if (den_ == o.den_) return RatFunc(num_ - o.num_, den_);
    return RatFunc(num_ * o.den_ - o.num_ * den_, den_ * o.den_);
}

RatFunc RatFunc::operator-() const {
    RatFunc r = *this;
    r.num_ = -r.num_;
    return r;
}

RatFunc RatFunc::operator*(const RatFunc& o) const {
    if (is_zero() || o.is_zero()) return RatFunc();
    return RatFunc(num_ * o.num_, den_ * o.den_);
}

RatFunc RatFunc::operator/(const RatFunc& o) const {
    if (o.is_zero()) throw std::domain_error("RatFunc: division by zero");
    return RatFunc(num_ * o.den_, den_ * o.num_);
}

Q RatFunc::eval(const Q& lam, const Q& lamb) const {
    Q d = den_.eval(lam, lamb);
    if (d == 0) throw std::domain_error("RatFunc::eval: pole at the substitution point");
    return num_.eval(lam, lamb) / d;
}

std::string RatFunc::to_string() const {
    if (den_ == Poly(1)) return num_.to_string();
    return "(" + num_.to_string() + ")/(" + den_.to_string() + ")";
}

RatFunc rpow(const RatFunc& x, int e) {
    if (e < 0) return rpow(RatFunc(1) / x, -e);
    RatFunc r(1);
    for (int i = 0; i < e; ++i) r *= x;
    return r;
}

// ---------------------------------------------------------------- StabScalar

namespace {
constexpr int kA[4] = {0, 1, 0, 1};
constexpr int kB[4] = {0, 0, 1, 1};
}  // namespace

StabScalar::StabScalar(unsigned long p, unsigned k) : p_(p), k_(k) {}

StabScalar::StabScalar(unsigned long p, unsigned k, const RatFunc& c0) : p_(p), k_(k) { c_[0] = c0; }

StabScalar::StabScalar(unsigned long p, unsigned k, const std::array<RatFunc, 4>& c) : p_(p), k_(k), c_(c) {}

StabScalar StabScalar::alpha(unsigned long p, unsigned k) {
    StabScalar s(p, k);
    s.c_[1] = RatFunc(1);
    return s;
}

StabScalar StabScalar::alphabar(unsigned long p, unsigned k) {
    StabScalar s(p, k);
    s.c_[2] = RatFunc(1);
    return s;
}

bool StabScalar::is_zero() const {
    return std::all_of(c_.begin(), c_.end(), [](const RatFunc& x) { return x.is_zero(); });
}

Q StabScalar::norm_P() const {
    if (p_ == 0) throw std::logic_error("StabScalar: missing (p, k) context");
    return Q(zpow(p_, k_ + 1));
}

void StabScalar::adopt(const StabScalar& o) {
    if (p_ == 0) {
        p_ = o.p_;
        k_ = o.k_;
    } else if (o.p_ != 0 && (p_ != o.p_ || k_ != o.k_)) {
        throw std::invalid_argument("StabScalar: context mismatch");
    }
}

StabScalar StabScalar::operator+(const StabScalar& o) const {
    StabScalar r = *this;
    r.adopt(o);
    for (int i = 0; i < 4; ++i) r.c_[i] += o.c_[i];
    return r;
}

StabScalar StabScalar::operator-(const StabScalar& o) const {
    StabScalar r = *this;
    r.adopt(o);
    for (int i = 0; i < 4; ++i) r.c_[i] -= o.c_[i];
    return r;
}

StabScalar StabScalar::operator-() const {
    StabScalar r = *this;
    for (auto& x : r.c_) x = -x;
    return r;
}

StabScalar StabScalar::operator*(const StabScalar& o) const {
    StabScalar ctx = *this;
    ctx.adopt(o);
    RawAlphaPoly raw;
    for (int i = 0; i < 4; ++i) {
        if (c_[i].is_zero()) continue;
        for (int j = 0; j < 4; ++j) {
            if (o.c_[j].is_zero()) continue;
            raw[{kA[i] + kA[j], kB[i] + kB[j]}] += c_[i] * o.c_[j];
        }
    }
    if (ctx.p_ == 0) {
        // Without context only scalars can occur.
        StabScalar r;
        for (const auto& [e, c] : raw) {
            if (e.first > 1 || e.second > 1) throw std::logic_error("StabScalar: missing (p, k) context");
            r.c_[e.first + 2 * e.second] += c;
        }
        return r;
    }
    return reduce(raw, ctx.p_, ctx.k_);
}

bool StabScalar::operator==(const StabScalar& o) const { return c_ == o.c_; }

StabScalar StabScalar::sigma_alpha() const {
    RatFunc l = RatFunc::lam();
    StabScalar r = *this;
    r.c_[0] = c_[0] + l * c_[1];
    r.c_[1] = -c_[1];
    r.c_[2] = c_[2] + l * c_[3];
    r.c_[3] = -c_[3];
    return r;
}

StabScalar StabScalar::sigma_alphabar() const {
    RatFunc lb = RatFunc::lamb();
    StabScalar r = *this;
    r.c_[0] = c_[0] + lb * c_[2];
    r.c_[1] = c_[1] + lb * c_[3];
    r.c_[2] = -c_[2];
    r.c_[3] = -c_[3];
    return r;
}

StabScalar StabScalar::inverse() const {
    StabScalar y = *this * sigma_alpha();
    StabScalar n = y * y.sigma_alphabar();
    for (int i = 1; i < 4; ++i)
        if (!n.c_[i].is_zero()) throw std::logic_error("StabScalar::inverse: norm left the base field");
    if (n.c_[0].is_zero()) throw std::domain_error("StabScalar::inverse: zero divisor");
    StabScalar r = sigma_alpha() * y.sigma_alphabar();
    RatFunc s = RatFunc(1) / n.c_[0];
    for (auto& x : r.c_) x *= s;
    return r;
}

Q StabScalar::eval(const Q& lam, const Q& lamb, const Q& a, const Q& b) const {
    Q v = 0;
    for (int i = 0; i < 4; ++i) {
        if (c_[i].is_zero()) continue;
        Q m = 1;
        if (kA[i]) m *= a;
        if (kB[i]) m *= b;
        v += c_[i].eval(lam, lamb) * m;
    }
    return v;
}

std::string StabScalar::to_string() const {
    static const char* names[4] = {"", "a", "b", "a*b"};
    std::string out;
    for (int i = 0; i < 4; ++i) {
        if (c_[i].is_zero()) continue;
        if (!out.empty()) out += " + ";
        if (i == 0) {
            out += c_[i].to_string();
        } else {
            out += "(" + c_[i].to_string() + ")*" + names[i];
        }
    }
    return out.empty() ? "0" : out;
}

StabScalar reduce(const RawAlphaPoly& raw, unsigned long p, unsigned k) {
    RatFunc P(Q(zpow(p, k + 1)));
    RatFunc lam = RatFunc::lam(), lamb = RatFunc::lamb();
    RawAlphaPoly cur = raw;
    for (;;) {
        auto it = std::find_if(cur.begin(), cur.end(), [](const auto& kv) {
            return !kv.second.is_zero() && (kv.first.first > 1 || kv.first.second > 1);
        });
        if (it == cur.end()) break;
        auto [e, c] = *it;
        cur.erase(it);
        if (e.first > 1) {
            // a^i = lam a^{i-1} - P a^{i-2}
            cur[{e.first - 1, e.second}] += lam * c;
            cur[{e.first - 2, e.second}] -= P * c;
        } else {
            cur[{e.first, e.second - 1}] += lamb * c;
            cur[{e.first, e.second - 2}] -= P * c;
        }
    }
    StabScalar r(p, k);
    std::array<RatFunc, 4> c{};
    for (const auto& [e, v] : cur) c[e.first + 2 * e.second] += v;
    return StabScalar(p, k, c);
}

StabScalar conjugate(const StabScalar& x) { return x.sigma_alpha().sigma_alphabar(); }

// ---------------------------------------------------------------- linear systems

AffineSolution solve_linear_system(const Matrix<RatFunc>& A, const std::vector<RatFunc>& b) {
    const std::size_t n = A.rows(), m = A.cols();
    if (b.size() != n) throw std::invalid_argument("solve_linear_system: dimension mismatch");
    AffineSolution out;

    // Clear denominators row by row.
    std::vector<std::vector<Poly>> M(n, std::vector<Poly>(m + 1));
    for (std::size_t i = 0; i < n; ++i) {
        Poly L(1);
        auto absorb = [&](const RatFunc& x) {
            if (x.is_zero() || x.den() == Poly(1)) return;
            Poly g = poly_gcd(L, x.den());
            L = L * divide_exact(x.den(), g);
        };
        for (std::size_t j = 0; j < m; ++j) absorb(A(i, j));
        absorb(b[i]);
        out.denominators.push_back(L);
        for (std::size_t j = 0; j < m; ++j)
            if (!A(i, j).is_zero()) M[i][j] = A(i, j).num() * divide_exact(L, A(i, j).den());
        if (!b[i].is_zero()) M[i][m] = b[i].num() * divide_exact(L, b[i].den());
    }

    // Bareiss echelon form.
    Poly prev(1);
    std::size_t r = 0;
    std::vector<std::size_t> pivcols;
    for (std::size_t col = 0; col < m && r < n; ++col) {
        std::size_t best = n;
        for (std::size_t i = r; i < n; ++i) {
            if (M[i][col].is_zero()) continue;
            if (best == n || M[i][col].terms().size() < M[best][col].terms().size()) best = i;
        }
        if (best == n) continue;
        std::swap(M[r], M[best]);
        const Poly piv = M[r][col];
        for (std::size_t i = r + 1; i < n; ++i) {
            const Poly f = M[i][col];
            for (std::size_t j = col + 1; j <= m; ++j) {
                Poly v = piv * M[i][j] - f * M[r][j];
                M[i][j] = v.is_zero() ? v : divide_exact(v, prev);
            }
            M[i][col] = Poly();
        }
        prev = piv;
        pivcols.push_back(col);
        ++r;
    }
    out.rank = r;

    for (std::size_t i = r; i < n; ++i) {
        if (!M[i][m].is_zero()) {
            out.consistent = false;
            out.certificate = InfeasibilityCertificate{i, M[i][m]};
            return out;
        }
    }
    out.consistent = true;

    std::vector<bool> is_piv(m, false);
    for (auto c : pivcols) is_piv[c] = true;

    auto back_substitute = [&](std::vector<RatFunc> x, bool homogeneous) {
        for (std::size_t t = r; t-- > 0;) {
            std::size_t pc = pivcols[t];
            RatFunc s = homogeneous ? RatFunc() : RatFunc(M[t][m]);
            for (std::size_t j = pc + 1; j < m; ++j)
                if (!M[t][j].is_zero() && !x[j].is_zero()) s -= RatFunc(M[t][j]) * x[j];
            x[pc] = s / RatFunc(M[t][pc]);
        }
        return x;
    };

    out.particular = back_substitute(std::vector<RatFunc>(m), false);
    for (std::size_t f = 0; f < m; ++f) {
        if (is_piv[f]) continue;
        std::vector<RatFunc> x(m);
        x[f] = RatFunc(1);
        out.nullspace.push_back(back_substitute(x, true));
    }
    return out;
}

std::size_t rank_q(Matrix<Q> A) {
    std::size_t r = 0;
    for (std::size_t col = 0; col < A.cols() && r < A.rows(); ++col) {
        std::size_t piv = A.rows();
        for (std::size_t i = r; i < A.rows(); ++i)
            if (A(i, col) != 0) {
                piv = i;
                break;
            }
        if (piv == A.rows()) continue;
        for (std::size_t j = 0; j < A.cols(); ++j) std::swap(A(r, j), A(piv, j));
        for (std::size_t i = r + 1; i < A.rows(); ++i) {
            if (A(i, col) == 0) continue;
            Q f = A(i, col) / A(r, col);
            for (std::size_t j = col; j < A.cols(); ++j) A(i, j) -= f * A(r, j);
        }
        ++r;
    }
    return r;
}

Q det_q(Matrix<Q> A) {
    if (A.rows() != A.cols()) throw std::invalid_argument("det_q: not square");
    Q d = 1;
    const std::size_t n = A.rows();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = n;
        for (std::size_t i = col; i < n; ++i)
            if (A(i, col) != 0) {
                piv = i;
                break;
            }
        if (piv == n) return 0;
        if (piv != col) {
            for (std::size_t j = 0; j < n; ++j) std::swap(A(col, j), A(piv, j));
            d = -d;
        }
        d *= A(col, col);
        for (std::size_t i = col + 1; i < n; ++i) {
            if (A(i, col) == 0) continue;
            Q f = A(i, col) / A(col, col);
            for (std::size_t j = col; j < n; ++j) A(i, j) -= f * A(col, j);
        }
    }
    return d;
}

RatFunc det_ratfunc(Matrix<RatFunc> A) {
    if (A.rows() != A.cols()) throw std::invalid_argument("det_ratfunc: not square");
    RatFunc d(1);
    const std::size_t n = A.rows();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = n;
        for (std::size_t i = col; i < n; ++i)
            if (!A(i, col).is_zero()) {
                piv = i;
                break;
            }
        if (piv == n) return RatFunc();
        if (piv != col) {
            for (std::size_t j = 0; j < n; ++j) std::swap(A(col, j), A(piv, j));
            d = -d;
        }
        d *= A(col, col);
        for (std::size_t i = col + 1; i < n; ++i) {
            if (A(i, col).is_zero()) continue;
            RatFunc f = A(i, col) / A(col, col);
            for (std::size_t j = col; j < n; ++j) A(i, j) -= f * A(col, j);
        }
    }
    return d;
}

Matrix<Q> eval_matrix(const Matrix<RatFunc>& M, const Q& lam, const Q& lamb) {
    Matrix<Q> r(M.rows(), M.cols());
    for (std::size_t i = 0; i < M.rows(); ++i)
        for (std::size_t j = 0; j < M.cols(); ++j) r(i, j) = M(i, j).eval(lam, lamb);
    return r;
}

}  // namespace bianchi
