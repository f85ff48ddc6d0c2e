#include "bianchi/hecke.hpp"

#include <algorithm>
#include <cstdint>
#include <stdexcept>

namespace bianchi {

std::string to_string(HeckeOp op) {
    switch (op) {
        case HeckeOp::U_frakp: return "U_frakp";
        case HeckeOp::U_frakpbar: return "U_frakpbar";
        case HeckeOp::U_p: return "U_p";
        case HeckeOp::T_frakp: return "T_frakp";
        case HeckeOp::T_frakpbar: return "T_frakpbar";
    }
    return "?";
}

HeckeOp hecke_op_from_string(const std::string& s) {
    for (HeckeOp op : {HeckeOp::U_frakp, HeckeOp::U_frakpbar, HeckeOp::U_p, HeckeOp::T_frakp, HeckeOp::T_frakpbar})
        if (to_string(op) == s) return op;
    throw std::invalid_argument("unknown Hecke operator: " + s);
}

namespace {

Q qp(unsigned long p) { return Q(long(p)); }

GroupElemPair place(const Mat2& m, bool second_factor) {
    return second_factor ? GroupElemPair(Mat2(), m) : GroupElemPair(m, Mat2());
}

void check_p(unsigned long p) {
    if (p < 3 || !is_prime(p)) throw std::invalid_argument("hecke: p must be an odd prime");
}

}  // namespace

GroupElemPair upsilon_c(unsigned long p, unsigned long c, bool second_factor) {
    const Q P = qp(p);
    return place(Mat2(1, 0, P * long(c), P), second_factor);
}

GroupElemPair upsilon_star(unsigned long p, bool second_factor) { return place(Mat2(qp(p), 0, 0, 1), second_factor); }

CosetDecomposition enumerate_coset_reps(HeckeOp op, unsigned long p) {
    check_p(p);
    CosetDecomposition d;
    d.op = op;
    d.p = p;
    const Mat2 ups(1, 0, 0, qp(p));
    switch (op) {
        case HeckeOp::U_frakp:
        case HeckeOp::T_frakp:
        case HeckeOp::U_frakpbar:
        case HeckeOp::T_frakpbar: {
            bool second = op == HeckeOp::U_frakpbar || op == HeckeOp::T_frakpbar;
            d.double_coset_generator = place(ups, second);
            for (unsigned long c = 0; c < p; ++c) d.representatives.push_back(upsilon_c(p, c, second));
            if (op == HeckeOp::T_frakp || op == HeckeOp::T_frakpbar) {
                d.level = Level::maximal;
                d.representatives.push_back(upsilon_star(p, second));
            }
            break;
        }
        case HeckeOp::U_p:
            d.double_coset_generator = GroupElemPair(ups, ups);
            for (unsigned long c1 = 0; c1 < p; ++c1)
                for (unsigned long c2 = 0; c2 < p; ++c2)
                    d.representatives.push_back(upsilon_c(p, c1, false) * upsilon_c(p, c2, true));
            break;
    }
    return d;
}

CosetDecomposition corrected_coset_reps(HeckeOp op, unsigned long p) {
    CosetDecomposition d = enumerate_coset_reps(op, p);
    if (d.level != Level::maximal) return d;
    bool second = op == HeckeOp::T_frakpbar;
    for (unsigned long c = 0; c < p; ++c) d.representatives[c] = place(Mat2(1, 0, long(c), qp(p)), second);
    return d;
}

// ---------------------------------------------------------------------------
// Exhaustive verification modulo p^e.

namespace {

using i64 = std::int64_t;

struct IMat {
    i64 a, b, c, d;
};

i64 md(i64 x, i64 m) {
    x %= m;
    return x < 0 ? x + m : x;
}

IMat to_imat(const Mat2& g) {
    for (const Q* x : {&g.a, &g.b, &g.c, &g.d})
        if (x->get_den() != 1 || !x->get_num().fits_slong_p())
            throw std::invalid_argument("verify_decomposition: representatives must be small integer matrices");
    return {g.a.get_num().get_si(), g.b.get_num().get_si(), g.c.get_num().get_si(), g.d.get_num().get_si()};
}

// Tests r^{-1} h in K where r has det of valuation v; h is known mod p^{v+1}.
struct CosetTester {
    i64 p;
    int v;
    bool iwahori;

    bool same_coset(const IMat& r, const IMat& h) const {
        i64 m = 1;
        for (int t = 0; t <= v; ++t) m *= p;
        i64 pv = m / p;
        // adj(r) h
        i64 A = md(r.d * h.a - r.b * h.c, m), B = md(r.d * h.b - r.b * h.d, m);
        i64 C = md(-r.c * h.a + r.a * h.c, m), D = md(-r.c * h.b + r.a * h.d, m);
        if (A % pv || B % pv || C % pv || D % pv) return false;
        A /= pv, B /= pv, C /= pv, D /= pv;
        i64 det_r = r.a * r.d - r.b * r.c;
        if (md(det_r, m) % pv) return false;
        i64 u = md(det_r / pv, p);  // unit part of det r mod p
        if (u == 0) return false;
        // multiply by u^{-1}; membership only needs the matrix mod p
        i64 det = md(A * D - B * C, p);
        if (det == 0) return false;
        if (iwahori && md(C, p) != 0) return false;
        return true;
    }
};

long det_valuation(const Mat2& g, unsigned long p) {
    Q D = g.det();
    if (D == 0) throw std::invalid_argument("verify_decomposition: singular matrix");
    return valuation(D, p);
}

FactorReport verify_factor(const Mat2& gen, const std::vector<Mat2>& reps_in, bool iwahori, unsigned long p, unsigned e,
                           unsigned long long budget, std::string& detail) {
    FactorReport fr;
    std::vector<Mat2> reps;
    for (const auto& r : reps_in)
        if (std::find(reps.begin(), reps.end(), r) == reps.end()) reps.push_back(r);
    fr.distinct_reps = reps.size();

    long v = det_valuation(gen, p);
    if (v > 1) throw std::invalid_argument("verify_decomposition: det valuation above 1 is not supported");
    for (const auto& r : reps)
        if (det_valuation(r, p) != v) {
            // a representative of the wrong determinant valuation cannot lie in K g K
            detail += "representative " + r.to_string() + " has the wrong determinant valuation; ";
            fr.disjoint = true;
            fr.covering = false;
            fr.contained = false;
            return fr;
        }
    if (e < unsigned(v) + 1) throw std::invalid_argument("verify_decomposition: modulus too small");

    CosetTester T{i64(p), int(v), iwahori};
    std::vector<IMat> R;
    for (const auto& r : reps) R.push_back(to_imat(r));

    // classes of representatives under right K-equivalence
    std::vector<int> cls(R.size(), -1);
    int ncls = 0;
    fr.disjoint = true;
    for (std::size_t i = 0; i < R.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j)
            if (T.same_coset(R[j], R[i])) {
                cls[i] = cls[j];
                fr.disjoint = false;
                detail += "representatives " + reps[j].to_string() + " and " + reps[i].to_string() +
                          " define the same coset; ";
                break;
            }
        if (cls[i] < 0) cls[i] = ncls++;
    }

    i64 pe = 1, m = 1;
    for (unsigned t = 0; t < e; ++t) pe *= i64(p);
    for (long t = 0; t <= v; ++t) m *= i64(p);

    unsigned long long iters = 1;
    for (int t = 0; t < 4; ++t) iters *= (unsigned long long)pe;
    if (iwahori) iters /= p;
    if (iters > budget) {
        fr.inconclusive = true;
        detail += "enumeration budget exceeded; ";
        return fr;
    }

    // cache: class of h (mod m) among representatives and extra cosets found
    const std::size_t nh = std::size_t(m * m * m * m);
    std::vector<int> cache(nh, -2);
    std::vector<IMat> extra;
    std::vector<char> hit(std::size_t(ncls), 0);
    auto lookup = [&](const IMat& h) -> int {
        std::size_t key = std::size_t(((h.a * m + h.b) * m + h.c) * m + h.d);
        int& slot = cache[key];
        if (slot != -2) return slot;
        for (std::size_t i = 0; i < R.size(); ++i)
            if (T.same_coset(R[i], h)) return slot = cls[i];
        for (std::size_t i = 0; i < extra.size(); ++i)
            if (T.same_coset(extra[i], h)) return slot = ncls + int(i);
        extra.push_back(h);
        return slot = ncls + int(extra.size()) - 1;
    };

    const IMat g = to_imat(gen);
    const i64 g11 = md(g.a, m), g12 = md(g.b, m), g21 = md(g.c, m), g22 = md(g.d, m);
    const i64 cstep = iwahori ? i64(p) : 1, P = i64(p);
    // residues are updated incrementally along the innermost loop
    for (i64 a = 0; a < pe; ++a)
        for (i64 b = 0; b < pe; ++b) {
            const i64 h11 = md(a * g11 + b * g21, m), h12 = md(a * g12 + b * g22, m);
            const i64 ap = a % P;
            for (i64 c = 0; c < pe; c += cstep) {
                const i64 bc = md(b * c, P);
                i64 h21 = md(c * g11, m), h22 = md(c * g12, m), dp = 0;
                const std::size_t top = std::size_t((h11 * m + h12) * m);
                for (i64 d = 0; d < pe; ++d) {
                    // det = a d - b c mod p
                    i64 det = ap * dp - bc;
                    if (det % P != 0) {
                        ++fr.enumerated;
                        std::size_t key = (top + std::size_t(h21)) * std::size_t(m) + std::size_t(h22);
                        int k = cache[key];
                        if (k == -2) k = lookup(IMat{h11, h12, h21, h22});
                        if (k < ncls) hit[std::size_t(k)] = 1;
                    }
                    if (++dp == P) dp = 0;
                    h21 += g21;
                    if (h21 >= m) h21 -= m;
                    h22 += g22;
                    if (h22 >= m) h22 -= m;
                }
            }
        }
    fr.covering = extra.empty();
    fr.contained = std::all_of(hit.begin(), hit.end(), [](char x) { return x != 0; });
    fr.cosets_hit = std::size_t(std::count(hit.begin(), hit.end(), 1)) + extra.size();
    if (!fr.covering) detail += std::to_string(extra.size()) + " coset(s) of the double coset are not represented; ";
    if (!fr.contained) detail += "some representative lies outside the double coset; ";
    return fr;
}

}  // namespace

DecompositionReport verify_decomposition(const CosetDecomposition& dec, unsigned e, unsigned long long budget) {
    check_p(dec.p);
    DecompositionReport rep;
    rep.representatives = dec.representatives.size();
    const bool iw = dec.level == Level::iwahori;
    std::vector<Mat2> f1, f2;
    for (const auto& r : dec.representatives) {
        f1.push_back(r.g1);
        f2.push_back(r.g2);
    }
    rep.factors[0] = verify_factor(dec.double_coset_generator.g1, f1, iw, dec.p, e, budget, rep.detail);
    rep.factors[1] = verify_factor(dec.double_coset_generator.g2, f2, iw, dec.p, e, budget, rep.detail);

    // the pair set has to be the full product of the factor sets, without repeats
    bool distinct_pairs = true;
    for (std::size_t i = 0; i < dec.representatives.size() && distinct_pairs; ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (dec.representatives[i] == dec.representatives[j]) {
                distinct_pairs = false;
                rep.detail += "duplicate representative " + dec.representatives[i].to_string() + "; ";
                break;
            }
    bool full_product = rep.representatives == rep.factors[0].distinct_reps * rep.factors[1].distinct_reps;
    rep.inconclusive = rep.factors[0].inconclusive || rep.factors[1].inconclusive;
    rep.disjoint = distinct_pairs && full_product && rep.factors[0].disjoint && rep.factors[1].disjoint;
    rep.covering = full_product && rep.factors[0].covering && rep.factors[1].covering && rep.factors[0].contained &&
                   rep.factors[1].contained;
    rep.index = rep.factors[0].cosets_hit * rep.factors[1].cosets_hit;
    return rep;
}

// ---------------------------------------------------------------------------
// Operators on V_k^vee.

Matrix<Q> hecke_matrix(const CosetDecomposition& dec, WeightK k) {
    Matrix<Q> H(k.dim(), k.dim());
    for (const auto& r : dec.representatives) H = H + dual_action_matrix(r, k);
    return H;
}

Matrix<Q> hecke_matrix(HeckeOp op, unsigned long p, WeightK k) { return hecke_matrix(enumerate_coset_reps(op, p), k); }

DualModuleElement apply_hecke(HeckeOp op, const DualModuleElement& mu, unsigned long p) {
    DualModuleElement out(mu.k);
    for (const auto& r : enumerate_coset_reps(op, p).representatives) {
        auto t = act_dual(mu, r);
        for (std::size_t i = 0; i < out.m.size(); ++i) out.m[i] += t.m[i];
    }
    return out;
}

Matrix<Q> key_identity_residual(bool second_factor, unsigned long p, WeightK k) {
    HeckeOp op = second_factor ? HeckeOp::U_frakpbar : HeckeOp::U_frakp;
    Matrix<Q> lhs = hecke_matrix(op, p, k) * dual_action_matrix(upsilon_star(p, second_factor), k);
    unsigned ki = second_factor ? k.k2 : k.k1;
    Matrix<Q> rhs = Matrix<Q>::identity(k.dim(), 0, 1).scaled(Q(zpow(p, ki + 1)));
    return lhs - rhs;
}

namespace {

// m = s * gamma with s = p^{min entry valuation}
std::pair<Q, Mat2> split_scalar(const Mat2& m, unsigned long p) {
    long v = LONG_MAX;
    for (const Q* x : {&m.a, &m.b, &m.c, &m.d})
        if (*x != 0) v = std::min(v, valuation(*x, p));
    Q s = qpow(qp(p), v);
    return {s, Mat2(m.a / s, m.b / s, m.c / s, m.d / s)};
}

}  // namespace

KeyFactorization factor_key_products(bool second_factor, unsigned long p) {
    HeckeOp op = second_factor ? HeckeOp::U_frakpbar : HeckeOp::U_frakp;
    const GroupElemPair ustar = upsilon_star(p, second_factor);
    KeyFactorization f;
    f.all_iwahori = true;
    for (const auto& r : enumerate_coset_reps(op, p).representatives) {
        GroupElemPair prod = r * ustar;
        auto [s1, g1] = split_scalar(prod.g1, p);
        auto [s2, g2] = split_scalar(prod.g2, p);
        GroupElemPair gam(g1, g2);
        f.all_iwahori = f.all_iwahori && in_iwahori(gam, p);
        // one scalar per pair: record the factor that carries it
        f.scalars.push_back(second_factor ? s2 : s1);
        if ((second_factor ? s1 : s2) != 1) f.all_iwahori = false;
        f.gammas.push_back(gam);
    }
    return f;
}

Q key_identity_scalar(bool second_factor, unsigned long p, WeightK k) {
    KeyFactorization f = factor_key_products(second_factor, p);
    if (!f.all_iwahori) throw std::logic_error("key_identity_scalar: a product is not scalar times Iwahori");
    unsigned ki = second_factor ? k.k2 : k.k1;
    Q s = 0;
    for (const Q& x : f.scalars) s += qpow(x, long(ki));
    return s;
}

bool key_factorization_holds(bool second_factor, unsigned long p, WeightK k) {
    HeckeOp op = second_factor ? HeckeOp::U_frakpbar : HeckeOp::U_frakp;
    KeyFactorization f = factor_key_products(second_factor, p);
    if (!f.all_iwahori) return false;
    unsigned ki = second_factor ? k.k2 : k.k1;
    Matrix<Q> lhs = hecke_matrix(op, p, k) * dual_action_matrix(upsilon_star(p, second_factor), k);
    Matrix<Q> rhs(k.dim(), k.dim());
    for (std::size_t c = 0; c < f.gammas.size(); ++c)
        rhs = rhs + dual_action_matrix(f.gammas[c], k).scaled(qpow(f.scalars[c], long(ki)));
    return lhs == rhs;
}

std::size_t iwahori_coinvariant_dim(unsigned long p, WeightK k) {
    check_p(p);
    // a primitive root mod p^2 topologically generates Z_p^x
    unsigned long u = 2;
    for (;; ++u) {
        Z pp = Z(p) * p;
        Z x = 1;
        unsigned long ord = 0;
        do {
            x = x * u % pp;
            ++ord;
        } while (x != 1);
        if (ord == p * (p - 1)) break;
    }
    const Q P = qp(p), U = Q(long(u));
    std::vector<Mat2> gens{Mat2(1, 1, 0, 1), Mat2(1, 0, P, 1), Mat2(U, 0, 0, 1), Mat2(1, 0, 0, U)};
    const std::size_t n = k.dim();
    Matrix<Q> big(n, n * 8);
    std::size_t col = 0;
    for (bool second : {false, true})
        for (const auto& g : gens) {
            Matrix<Q> D = dual_action_matrix(place(g, second), k) - Matrix<Q>::identity(n, 0, 1);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) big(i, col + j) = D(i, j);
            col += n;
        }
    return n - rank_q(big);
}

// ---------------------------------------------------------------------------
// Classes and stabilizations.

StabScalar alpha_choice(int i, unsigned long p, unsigned k) {
    StabScalar a = StabScalar::alpha(p, k);
    return i == 0 ? a : a.sigma_alpha();
}

StabScalar alphabar_choice(int j, unsigned long p, unsigned k) {
    StabScalar b = StabScalar::alphabar(p, k);
    return j == 0 ? b : b.sigma_alphabar();
}

StabVector stabilize(int i, int j, unsigned long p, unsigned k) {
    if ((i != 0 && i != 1) || (j != 0 && j != 1)) throw std::invalid_argument("stabilize: indices must be 0 or 1");
    StabScalar ai = alpha_choice(i, p, k).inverse(), bj = alphabar_choice(j, p, k).inverse();
    return {StabScalar(p, k, RatFunc(1)), -ai, -bj, ai * bj};
}

namespace {

// The printed T representatives are the U ones together with upsilon^*; this is
// what turns T-eigenclasses into the relation U = lam - upsilon^*.
void require_t_splits(bool second, unsigned long p) {
    auto U = enumerate_coset_reps(second ? HeckeOp::U_frakpbar : HeckeOp::U_frakp, p).representatives;
    auto T = enumerate_coset_reps(second ? HeckeOp::T_frakpbar : HeckeOp::T_frakp, p).representatives;
    U.push_back(upsilon_star(p, second));
    if (U != T) throw std::logic_error("hecke_class_matrix: T representatives do not split as U + upsilon^*");
}

Matrix<RatFunc> class_matrix_one(bool second, unsigned long p, unsigned k) {
    require_t_splits(second, p);
    const RatFunc lam = second ? RatFunc::lamb() : RatFunc::lam();
    const RatFunc key(key_identity_scalar(second, p, WeightK::parallel(k)));
    // basis index bits: bit0 = upsilon_p^*, bit1 = upsilon_pbar^*
    const std::size_t own = second ? 2 : 1;
    Matrix<RatFunc> M(4, 4);
    for (std::size_t col = 0; col < 4; ++col) {
        if (col & own) {
            M(col & ~own, col) = key;
        } else {
            M(col, col) = lam;
            M(col | own, col) = RatFunc(-1);
        }
    }
    return M;
}

}  // namespace

Matrix<RatFunc> hecke_class_matrix(HeckeOp op, unsigned long p, unsigned k) {
    check_p(p);
    switch (op) {
        case HeckeOp::U_frakp: return class_matrix_one(false, p, k);
        case HeckeOp::U_frakpbar: return class_matrix_one(true, p, k);
        case HeckeOp::U_p: {
            // U_p representatives are the products of the two factor sets
            auto d = enumerate_coset_reps(HeckeOp::U_p, p).representatives;
            for (unsigned long c1 = 0; c1 < p; ++c1)
                for (unsigned long c2 = 0; c2 < p; ++c2)
                    if (d[c1 * p + c2] != upsilon_c(p, c1, false) * upsilon_c(p, c2, true))
                        throw std::logic_error("hecke_class_matrix: U_p does not factor");
            return class_matrix_one(false, p, k) * class_matrix_one(true, p, k);
        }
        default: throw std::invalid_argument("hecke_class_matrix: only U operators act on the stabilization space");
    }
}

StabVector apply_class(const Matrix<RatFunc>& M, const StabVector& v) {
    if (M.rows() != 4 || M.cols() != 4) throw std::invalid_argument("apply_class: need a 4x4 matrix");
    const unsigned long p = v[0].p();
    const unsigned k = v[0].k();
    StabVector out;
    for (std::size_t i = 0; i < 4; ++i) {
        StabScalar s(p, k);
        for (std::size_t j = 0; j < 4; ++j)
            if (!M(i, j).is_zero()) s += StabScalar(p, k, M(i, j)) * v[j];
        out[i] = s;
    }
    return out;
}

}  // namespace bianchi
