#include "bianchi/weight_action.hpp"

#include <stdexcept>

namespace bianchi {

Mat2 Mat2::operator*(const Mat2& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
}

Mat2 Mat2::inverse() const {
    Q D = det();
    if (D == 0) throw std::domain_error("Mat2: singular matrix");
    return {d / D, -b / D, -c / D, a / D};
}

std::string Mat2::to_string() const {
    return "[" + a.get_str() + " " + b.get_str() + "; " + c.get_str() + " " + d.get_str() + "]";
}

bool is_p_integral(const Q& x, unsigned long p) { return x == 0 || valuation(x, p) >= 0; }

namespace {
bool unit(const Q& x, unsigned long p) { return x != 0 && valuation(x, p) == 0; }
bool in_pzp(const Q& x, unsigned long p) { return x == 0 || valuation(x, p) >= 1; }

Z binom(unsigned n, unsigned k) {
    Z r;
    mpz_bin_uiui(r.get_mpz_t(), n, k);
    return r;
}

void check_weight(const WeightK& a, const WeightK& b) {
    if (!(a == b)) throw std::invalid_argument("weight mismatch");
}
}  // namespace

bool in_gl2_zp(const Mat2& g, unsigned long p) {
    return is_p_integral(g.a, p) && is_p_integral(g.b, p) && is_p_integral(g.c, p) && is_p_integral(g.d, p) &&
           unit(g.det(), p);
}

bool in_iwahori(const Mat2& g, unsigned long p) { return in_gl2_zp(g, p) && in_pzp(g.c, p); }

bool in_xi(const Mat2& g, unsigned long p) {
    return unit(g.a, p) && is_p_integral(g.b, p) && in_pzp(g.c, p) && is_p_integral(g.d, p) && g.det() != 0;
}

bool in_gl2_zp(const GroupElemPair& g, unsigned long p) { return in_gl2_zp(g.g1, p) && in_gl2_zp(g.g2, p); }
bool in_iwahori(const GroupElemPair& g, unsigned long p) { return in_iwahori(g.g1, p) && in_iwahori(g.g2, p); }
bool in_xi(const GroupElemPair& g, unsigned long p) { return in_xi(g.g1, p) && in_xi(g.g2, p); }

Q evaluate(const DualModuleElement& mu, const PolyModuleElement& phi) {
    check_weight(mu.k, phi.k);
    Q s = 0;
    for (std::size_t i = 0; i < mu.m.size(); ++i) s += mu.m[i] * phi.c[i];
    return s;
}

Matrix<Q> action_matrix(const Mat2& g, unsigned k) {
    if (g.det() == 0) throw std::domain_error("action_matrix: singular matrix");
    Matrix<Q> A(k + 1, k + 1);
    for (unsigned j = 0; j <= k; ++j) {
        // (a+bX)^{k-j} (c+dX)^j
        std::vector<Q> poly{Q(1)};
        auto mul = [&](const Q& x0, const Q& x1) {
            std::vector<Q> out(poly.size() + 1);
            for (std::size_t t = 0; t < poly.size(); ++t) {
                out[t] += poly[t] * x0;
                out[t + 1] += poly[t] * x1;
            }
            poly = std::move(out);
        };
        for (unsigned t = 0; t < k - j; ++t) mul(g.a, g.b);
        for (unsigned t = 0; t < j; ++t) mul(g.c, g.d);
        for (unsigned i = 0; i <= k; ++i) A(i, j) = poly[i];
    }
    return A;
}

Matrix<Q> action_matrix(const GroupElemPair& g, WeightK k) {
    return kron(action_matrix(g.g1, k.k1), action_matrix(g.g2, k.k2));
}

Matrix<Q> dual_action_matrix(const GroupElemPair& g, WeightK k) { return action_matrix(g, k).transpose(); }

PolyModuleElement act_right(const PolyModuleElement& phi, const GroupElemPair& g) {
    PolyModuleElement out(phi.k);
    out.c = action_matrix(g, phi.k).apply(phi.c);
    return out;
}

DualModuleElement act_dual(const DualModuleElement& mu, const GroupElemPair& g) {
    DualModuleElement out(mu.k);
    out.m = dual_action_matrix(g, mu.k).apply(mu.m);
    return out;
}

Q pair_algebraic(const DualModuleElement& mu, const DualModuleElement& nu) {
    check_weight(mu.k, nu.k);
    const WeightK k = mu.k;
    Q s = 0;
    for (unsigned j1 = 0; j1 <= k.k1; ++j1)
        for (unsigned j2 = 0; j2 <= k.k2; ++j2) {
            Q c = Q(binom(k.k1, j1) * binom(k.k2, j2));
            if ((k.k1 - j1 + k.k2 - j2) % 2) c = -c;
            s += c * nu.m[k.index(j1, j2)] * mu.m[k.index(k.k1 - j1, k.k2 - j2)];
        }
    return s;
}

Q pair_twisted(const DualModuleElement& mu, const DualModuleElement& nu, unsigned long p) {
    check_weight(mu.k, nu.k);
    const WeightK k = mu.k;
    Q s = 0;
    for (unsigned j1 = 0; j1 <= k.k1; ++j1)
        for (unsigned j2 = 0; j2 <= k.k2; ++j2) {
            std::size_t i = k.index(j1, j2);
            s += Q(binom(k.k1, j1) * binom(k.k2, j2) * zpow(p, j1 + j2)) * mu.m[i] * nu.m[i];
        }
    return s;
}

Matrix<Q> algebraic_gram(WeightK k) {
    const std::size_t n = k.dim();
    Matrix<Q> G(n, n);
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = 0; v < n; ++v) {
            DualModuleElement a(k), b(k);
            a.m[u] = 1;
            b.m[v] = 1;
            G(u, v) = pair_algebraic(a, b);
        }
    return G;
}

Mat2 omega_matrix(unsigned long p) { return {0, -Q(long(p)), 1, 0}; }
GroupElemPair omega_frakp(unsigned long p) { return {omega_matrix(p), Mat2()}; }
GroupElemPair omega_frakpbar(unsigned long p) { return {Mat2(), omega_matrix(p)}; }
GroupElemPair omega_p(unsigned long p) { return {omega_matrix(p), omega_matrix(p)}; }

GroupElemPair sharp(const GroupElemPair& g, unsigned long p) {
    if (!in_xi(g, p)) throw std::domain_error("sharp: element not in Xi: " + g.to_string());
    const Q P{long(p)};
    auto f = [&](const Mat2& m) { return Mat2(m.a, m.c / P, P * m.b, m.d); };
    return {f(g.g1), f(g.g2)};
}

GroupElemPair twisted_adjoint(const GroupElemPair& g, unsigned long p) {
    const Q P{long(p)};
    auto f = [&](const Mat2& m) { return Mat2(m.a, P * m.c, m.b / P, m.d); };
    return {f(g.g1), f(g.g2)};
}

}  // namespace bianchi
