#include "bianchi/stab_pairing.hpp"

#include <stdexcept>

namespace bianchi {

namespace {

Q sgn(unsigned k) { return k % 2 ? Q(-1) : Q(1); }
Q pw(unsigned long p, unsigned e) { return Q(zpow(p, e)); }
Q mpk(unsigned long p, unsigned k) { return sgn(k) * pw(p, k); }  // (-p)^k
RatFunc sigma(unsigned long p, unsigned k) { return RatFunc(sgn(k) * long(p) + 1); }

OperatorMatrix4 mat4(std::initializer_list<std::initializer_list<RatFunc>> rows) {
    OperatorMatrix4 M(4, 4);
    std::size_t i = 0;
    for (const auto& r : rows) {
        std::size_t j = 0;
        for (const auto& x : r) M(i, j++) = x;
        ++i;
    }
    return M;
}

OperatorMatrix4 id4() { return OperatorMatrix4::identity(4, RatFunc(), RatFunc(1)); }

StabScalar lift(const RatFunc& x, unsigned long p, unsigned k) { return StabScalar(p, k, x); }

}  // namespace

HeckeMatrices displayed_hecke_matrices(unsigned long p, unsigned k) {
    const RatFunc L = RatFunc::lam(), Lb = RatFunc::lamb(), P(pw(p, k + 1)), P2(pw(p, 2 * k + 2)), z;
    HeckeMatrices H;
    H.U_frakp = mat4({{L, P, z, z}, {-1, z, z, z}, {z, z, L, P}, {z, z, -1, z}});
    H.U_frakpbar = mat4({{Lb, z, P, z}, {z, Lb, z, P}, {-1, z, z, z}, {z, -1, z, z}});
    H.U_p = mat4({{L * Lb, P * Lb, L * P, P2}, {-Lb, z, -P, z}, {-L, -P, z, z}, {1, z, z, z}});
    return H;
}

ALMatrices displayed_al_matrices(unsigned long p, unsigned k) {
    const RatFunc pk(pw(p, k)), s(sgn(k)), m(mpk(p, k)), p2k(pw(p, 2 * k)), z;
    ALMatrices A;
    A.omega_frakp = mat4({{z, pk, z, z}, {s, z, z, z}, {z, z, z, pk}, {z, z, s, z}});
    A.omega_frakpbar = mat4({{z, z, pk, z}, {z, z, z, pk}, {s, z, z, z}, {z, s, z, z}});
    A.omega_p = mat4({{z, z, z, p2k}, {z, z, m, z}, {z, m, z, z}, {1, z, z, z}});
    return A;
}

HeckeMatrices displayed_adjoint_matrices(unsigned long p, unsigned k) {
    const RatFunc L = RatFunc::lam(), Lb = RatFunc::lamb(), z;
    const RatFunc mm(-mpk(p, k)), sp(sgn(k) * long(p)), mP(-pw(p, k + 1)), p2k(pw(p, 2 * k));
    const RatFunc a24 = RatFunc(sgn(k + 1) * pw(p, k)) * L, a34 = RatFunc(sgn(k + 1) * pw(p, k)) * Lb;
    HeckeMatrices H;
    H.U_frakp = mat4({{z, mm, z, z}, {sp, L, z, z}, {z, z, z, mm}, {z, z, sp, L}});
    H.U_frakpbar = mat4({{z, z, mm, z}, {z, z, z, mm}, {sp, z, Lb, z}, {z, sp, z, Lb}});
    H.U_p = mat4({{z, z, z, p2k}, {z, z, mP, a24}, {z, mP, z, a34}, {RatFunc(pw(p, 2)), sp * L, sp * Lb, L * Lb}});
    return H;
}

HeckeMatrices build_hecke_matrices(unsigned long p, unsigned k) {
    return {hecke_class_matrix(HeckeOp::U_frakp, p, k), hecke_class_matrix(HeckeOp::U_frakpbar, p, k),
            hecke_class_matrix(HeckeOp::U_p, p, k)};
}

namespace {

// m = s w with s = p^{min entry valuation}; requires w in GL2(Z) (integral, det +-1).
Q scalar_times_gl2z(const Mat2& m, unsigned long p) {
    long v = LONG_MAX;
    for (const Q* x : {&m.a, &m.b, &m.c, &m.d})
        if (*x != 0) v = std::min(v, valuation(*x, p));
    Q s = qpow(Q(long(p)), v);
    Mat2 w(m.a / s, m.b / s, m.c / s, m.d / s);
    for (const Q* x : {&w.a, &w.b, &w.c, &w.d})
        if (x->get_den() != 1) throw std::logic_error("AL derivation: quotient not integral");
    if (w.det() != 1 && w.det() != -1) throw std::logic_error("AL derivation: quotient not in GL2(Z)");
    return s;
}

// Scalar c with m = c I.
Q scalar_of(const Mat2& m) {
    if (m.b != 0 || m.c != 0 || m.a != m.d) throw std::logic_error("AL derivation: not a scalar matrix");
    return m.a;
}

OperatorMatrix4 al_from_group(bool second, unsigned long p, unsigned k) {
    const Mat2 om = omega_matrix(p);
    const Mat2 ups(Q(long(p)), 0, 0, 1);
    // omega ups^* = s w with w acting trivially on classes; omega^2 = c
    const Q s = scalar_times_gl2z(om * ups, p);
    const Q c = scalar_of(om * om);
    const RatFunc on_star(qpow(s, long(k)));
    const RatFunc on_plain(qpow(c / s, long(k)));
    const std::size_t own = second ? 2 : 1;
    OperatorMatrix4 M(4, 4);
    for (std::size_t col = 0; col < 4; ++col) {
        if (col & own)
            M(col & ~own, col) = on_star;
        else
            M(col | own, col) = on_plain;
    }
    return M;
}

}  // namespace

ALMatrices build_al_matrices(unsigned long p, unsigned k) {
    ALMatrices A;
    A.omega_frakp = al_from_group(false, p, k);
    A.omega_frakpbar = al_from_group(true, p, k);
    if (!(omega_frakp(p) * omega_frakpbar(p) == omega_p(p)))
        throw std::logic_error("build_al_matrices: omega_p does not factor");
    A.omega_p = A.omega_frakp * A.omega_frakpbar;
    return A;
}

OperatorMatrix4 inverse4(const OperatorMatrix4& M) {
    const std::size_t n = M.rows();
    OperatorMatrix4 A = M, B = OperatorMatrix4::identity(n, RatFunc(), RatFunc(1));
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = n;
        for (std::size_t r = c; r < n; ++r)
            if (!A(r, c).is_zero()) {
                piv = r;
                break;
            }
        if (piv == n) throw std::domain_error("inverse4: singular matrix");
        for (std::size_t j = 0; j < n; ++j) {
            std::swap(A(c, j), A(piv, j));
            std::swap(B(c, j), B(piv, j));
        }
        RatFunc inv = RatFunc(1) / A(c, c);
        for (std::size_t j = 0; j < n; ++j) {
            A(c, j) *= inv;
            B(c, j) *= inv;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c || A(r, c).is_zero()) continue;
            RatFunc f = A(r, c);
            for (std::size_t j = 0; j < n; ++j) {
                A(r, j) -= f * A(c, j);
                B(r, j) -= f * B(c, j);
            }
        }
    }
    return B;
}

OperatorMatrix4 conjugate_by(const OperatorMatrix4& M, const OperatorMatrix4& omega) {
    return inverse4(omega) * M * omega;
}

HeckeMatrices adjoint_matrices(unsigned long p, unsigned k) {
    HeckeMatrices H = build_hecke_matrices(p, k);
    const OperatorMatrix4 w = build_al_matrices(p, k).omega_p;
    return {conjugate_by(H.U_frakp, w), conjugate_by(H.U_frakpbar, w), conjugate_by(H.U_p, w)};
}

// ---------------------------------------------------------------------------

namespace {

// rows of X^T G - G Y = 0 in the unknowns G(a,b) at index 4a+b
void add_adjoint_rows(std::vector<std::vector<RatFunc>>& rows, const OperatorMatrix4& X, const OperatorMatrix4& Y) {
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) {
            std::vector<RatFunc> r(16);
            for (std::size_t l = 0; l < 4; ++l) {
                r[4 * l + j] += X(l, i);
                r[4 * i + l] -= Y(l, j);
            }
            rows.push_back(std::move(r));
        }
}

Matrix<RatFunc> to_matrix(const std::vector<std::vector<RatFunc>>& rows) {
    Matrix<RatFunc> A(rows.size(), 16);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < 16; ++j) A(i, j) = rows[i][j];
    return A;
}

std::size_t nullity(const std::vector<std::vector<RatFunc>>& rows) {
    auto sol = solve_linear_system(to_matrix(rows), std::vector<RatFunc>(rows.size()));
    return 16 - sol.rank;
}

}  // namespace

GramSolution solve_gram_with(const OperatorMatrix4& Up, const OperatorMatrix4& Upbar, const OperatorMatrix4& omega) {
    GramSolution out;
    const OperatorMatrix4 Sp = conjugate_by(Up, omega), Sb = conjugate_by(Upbar, omega);
    std::vector<std::vector<RatFunc>> one_sided, rows;
    add_adjoint_rows(one_sided, Up, Sp);
    add_adjoint_rows(one_sided, Upbar, Sb);
    rows = one_sided;
    add_adjoint_rows(rows, Sp, Up);
    add_adjoint_rows(rows, Sb, Upbar);
    out.one_sided_nullity = nullity(one_sided);
    out.homogeneous_nullity = nullity(rows);

    std::vector<RatFunc> b(rows.size());
    std::vector<RatFunc> norm(16);
    norm[0] = RatFunc(1);
    rows.push_back(norm);
    b.push_back(RatFunc(1));
    auto sol = solve_linear_system(to_matrix(rows), b);
    out.consistent = sol.consistent;
    out.unique = sol.consistent && sol.rank == 16;
    out.G = OperatorMatrix4(4, 4);
    if (sol.consistent)
        for (std::size_t t = 0; t < 16; ++t) out.G(t / 4, t % 4) = sol.particular[t];
    return out;
}

GramSolution solve_gram(unsigned long p, unsigned k) {
    HeckeMatrices H = build_hecke_matrices(p, k);
    return solve_gram_with(H.U_frakp, H.U_frakpbar, build_al_matrices(p, k).omega_p);
}

OperatorMatrix4 displayed_gram(unsigned long p, unsigned k) {
    const RatFunc L = RatFunc::lam(), Lb = RatFunc::lamb(), S = sigma(p, k), m(mpk(p, k)), p2k(pw(p, 2 * k));
    const RatFunc a = L / S, b = Lb / S, ab = L * Lb / (S * S);
    return mat4({{1, a, b, ab}, {a, m, -ab, m * b}, {b, -ab, m, m * a}, {ab, m * b, m * a, p2k}});
}

StabScalar pair_stabilized(int i, int j, unsigned long p, unsigned k, const OperatorMatrix4& G) {
    const StabVector v = stabilize(i, j, p, k);
    StabVector cv;
    for (std::size_t t = 0; t < 4; ++t) cv[t] = conjugate(v[t]);
    const StabVector w = apply_class(build_al_matrices(p, k).omega_p, cv);
    StabScalar s(p, k);
    for (std::size_t a = 0; a < 4; ++a)
        for (std::size_t b = 0; b < 4; ++b)
            if (!G(a, b).is_zero()) s += v[a] * lift(G(a, b), p, k) * w[b];
    return s;
}

StabScalar pair_stabilized(int i, int j, unsigned long p, unsigned k) {
    GramSolution g = solve_gram(p, k);
    if (!g.unique) throw std::runtime_error("pair_stabilized: Gram system does not have a unique solution");
    return pair_stabilized(i, j, p, k, g.G);
}

StabScalar theta_closed_form(int i, int j, unsigned long p, unsigned k) {
    auto L = [&](const RatFunc& x) { return lift(x, p, k); };
    const StabScalar lam = L(RatFunc::lam()), lamb = L(RatFunc::lamb());
    const StabScalar a_i = alpha_choice(i, p, k), a_1i = alpha_choice(1 - i, p, k);
    const StabScalar b_j = alphabar_choice(j, p, k), b_1j = alphabar_choice(1 - j, p, k);
    // printed with alphabar^{(1-i)} in the second product
    const StabScalar b_1i = alphabar_choice(1 - i, p, k);
    const Q s = sgn(k), P{long(p)};
    const Q sg = s * P + 1;
    StabScalar num = L(RatFunc(pw(p, 2 * k + 2) * (P * P - 1)));
    num -= L(RatFunc(P * (P + 2 + 2 * s))) * lam * lamb;
    num += L(RatFunc(s * P * sg)) * (a_1i * b_j + a_i * b_1i);
    num += a_1i * b_1j * (lam * lamb - L(RatFunc(s * P + 1)));
    num -= L(RatFunc(P * sg)) * (a_1i * a_1i + b_1j * b_1j);
    return num * L(RatFunc(Q(1) / (P * P * sg * sg)));
}

StabScalar expansion_display(int i, int j, unsigned long p, unsigned k) {
    auto L = [&](const RatFunc& x) { return lift(x, p, k); };
    const StabScalar lam = L(RatFunc::lam()), lamb = L(RatFunc::lamb());
    const StabScalar A = alpha_choice(i, p, k).inverse(), B = alphabar_choice(j, p, k).inverse();
    const StabScalar cA = conjugate(A), cB = conjugate(B), one = L(RatFunc(1));
    const StabScalar m = L(RatFunc(mpk(p, k))), p2k = L(RatFunc(pw(p, 2 * k))), S = L(sigma(p, k));
    StabScalar r1 = p2k * (one + A * cB + cA * B + A * B);
    StabScalar r2 = -(m * lamb / S) * (A + cA + m * A * B * cB + m * B);
    StabScalar r3 = -(m * lam / S) * (B + cB + m * A * cA * B + m * A);
    StabScalar r4 = (lam * lamb / (S * S)) * (one - m * cA * A - m * B * cB + p2k * A * B);
    return r1 + r2 + r3 + r4;
}

ThetaFactor theta_factor(int i, int j, unsigned long p, unsigned k) {
    return {theta_closed_form(i, j, p, k), k % 2, i, j};
}

// ---------------------------------------------------------------------------

namespace {

std::string matrix_residual(const OperatorMatrix4& D) {
    std::string s;
    for (std::size_t i = 0; i < D.rows(); ++i)
        for (std::size_t j = 0; j < D.cols(); ++j)
            if (!D(i, j).is_zero())
                s += "(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + "): " + D(i, j).to_string() + "; ";
    return s.empty() ? "0" : s;
}

VerificationRecord mat_record(const std::string& name, const OperatorMatrix4& X, const OperatorMatrix4& Y) {
    OperatorMatrix4 D = X - Y;
    return {name, D.is_zero(), matrix_residual(D)};
}

VerificationRecord scalar_record(const std::string& name, const StabScalar& x, const StabScalar& y) {
    StabScalar d = x - y;
    return {name, d.is_zero(), d.is_zero() ? "0" : d.to_string()};
}

// Faddeev-LeVerrier: X^4 + c[3] X^3 + c[2] X^2 + c[1] X + c[0].
std::array<RatFunc, 4> char_poly(const OperatorMatrix4& A) {
    std::array<RatFunc, 4> c;
    OperatorMatrix4 Mk = A;
    for (int m = 1; m <= 4; ++m) {
        if (m > 1) Mk = A * (Mk + id4().scaled(c[std::size_t(4 - m + 1)]));
        RatFunc tr;
        for (std::size_t t = 0; t < 4; ++t) tr += Mk(t, t);
        c[std::size_t(4 - m)] = -tr / RatFunc(m);
    }
    return c;
}

}  // namespace

std::vector<VerificationRecord> verification_report(unsigned long p, unsigned k) {
    std::vector<VerificationRecord> out;
    const std::string tag = " [p=" + std::to_string(p) + ", k=" + std::to_string(k) + "]";
    HeckeMatrices Hd = displayed_hecke_matrices(p, k), H = build_hecke_matrices(p, k);
    out.push_back(mat_record("M_U_frakp displayed = derived" + tag, Hd.U_frakp, H.U_frakp));
    out.push_back(mat_record("M_U_frakpbar displayed = derived" + tag, Hd.U_frakpbar, H.U_frakpbar));
    out.push_back(mat_record("M_U_p displayed = derived" + tag, Hd.U_p, H.U_p));
    out.push_back(mat_record("M_U_p = M_U_frakp M_U_frakpbar" + tag, Hd.U_p, Hd.U_frakp * Hd.U_frakpbar));
    out.push_back(mat_record("M_U_p = M_U_frakpbar M_U_frakp" + tag, Hd.U_p, Hd.U_frakpbar * Hd.U_frakp));

    ALMatrices Ad = displayed_al_matrices(p, k), A = build_al_matrices(p, k);
    out.push_back(mat_record("M_omega_frakp displayed = derived" + tag, Ad.omega_frakp, A.omega_frakp));
    out.push_back(mat_record("M_omega_frakpbar displayed = derived" + tag, Ad.omega_frakpbar, A.omega_frakpbar));
    out.push_back(mat_record("M_omega_p displayed = derived" + tag, Ad.omega_p, A.omega_p));
    out.push_back(mat_record("M_omega_p = M_omega_frakp M_omega_frakpbar" + tag, Ad.omega_p,
                             Ad.omega_frakp * Ad.omega_frakpbar));
    out.push_back(mat_record("M_omega_frakp^2 = (-p)^k I" + tag, Ad.omega_frakp * Ad.omega_frakp,
                             id4().scaled(RatFunc(mpk(p, k)))));
    out.push_back(mat_record("M_omega_frakpbar^2 = (-p)^k I" + tag, Ad.omega_frakpbar * Ad.omega_frakpbar,
                             id4().scaled(RatFunc(mpk(p, k)))));
    out.push_back(
        mat_record("M_omega_p^2 = p^{2k} I" + tag, Ad.omega_p * Ad.omega_p, id4().scaled(RatFunc(pw(p, 2 * k)))));

    HeckeMatrices Sd = displayed_adjoint_matrices(p, k), S = adjoint_matrices(p, k);
    out.push_back(mat_record("U_frakp^* displayed = omega_p^-1 U omega_p" + tag, Sd.U_frakp, S.U_frakp));
    out.push_back(mat_record("U_frakpbar^* displayed = omega_p^-1 U omega_p" + tag, Sd.U_frakpbar, S.U_frakpbar));
    out.push_back(mat_record("U_p^* displayed = omega_p^-1 U omega_p" + tag, Sd.U_p, S.U_p));
    out.push_back(mat_record("(U_p^*)^* = U_p" + tag, conjugate_by(S.U_p, A.omega_p), H.U_p));

    // char poly of M_U_p against prod (X - a_i b_j)
    {
        std::array<RatFunc, 4> c = char_poly(H.U_p);
        std::vector<StabScalar> r;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) r.push_back(alpha_choice(i, p, k) * alphabar_choice(j, p, k));
        StabScalar e1 = r[0] + r[1] + r[2] + r[3];
        StabScalar e2 = r[0] * r[1] + r[0] * r[2] + r[0] * r[3] + r[1] * r[2] + r[1] * r[3] + r[2] * r[3];
        StabScalar e3 = r[0] * r[1] * r[2] + r[0] * r[1] * r[3] + r[0] * r[2] * r[3] + r[1] * r[2] * r[3];
        StabScalar e4 = r[0] * r[1] * r[2] * r[3];
        StabScalar d = (lift(c[3], p, k) + e1) + (lift(c[2], p, k) - e2) + (lift(c[1], p, k) + e3) +
                       (lift(c[0], p, k) - e4);
        bool ok = (lift(c[3], p, k) + e1).is_zero() && (lift(c[2], p, k) - e2).is_zero() &&
                  (lift(c[1], p, k) + e3).is_zero() && (lift(c[0], p, k) - e4).is_zero();
        out.push_back({"char poly of M_U_p = prod (X - a_i b_j)" + tag, ok, ok ? "0" : d.to_string()});
    }

    GramSolution g = solve_gram(p, k);
    {
        const bool ok = g.homogeneous_nullity == 1 && g.unique;
        out.push_back({"Gram system has a 1-dim solution space" + tag, ok,
                       ok ? "0" : "nullity " + std::to_string(g.homogeneous_nullity)});
    }
    if (g.unique) {
        out.push_back(mat_record("Gram adjointness U_frakp" + tag, H.U_frakp.transpose() * g.G, g.G * S.U_frakp));
        out.push_back(
            mat_record("Gram adjointness U_frakpbar" + tag, H.U_frakpbar.transpose() * g.G, g.G * S.U_frakpbar));
        const OperatorMatrix4 Gd = displayed_gram(p, k);
        for (std::size_t a = 0; a < 4; ++a)
            for (std::size_t b = 0; b < 4; ++b) {
                RatFunc d = g.G(a, b) - Gd(a, b);
                out.push_back({"Gram g" + std::to_string(a + 1) + std::to_string(b + 1) + " = displayed" + tag,
                               d.is_zero(), d.is_zero() ? "0" : d.to_string()});
            }
        for (std::size_t a = 0; a < 4; ++a)
            for (std::size_t b = a + 1; b < 4; ++b) {
                RatFunc d = g.G(a, b) - g.G(b, a);
                out.push_back({"Gram symmetry g" + std::to_string(a + 1) + std::to_string(b + 1) + " = g" +
                                   std::to_string(b + 1) + std::to_string(a + 1) + tag,
                               d.is_zero(), d.is_zero() ? "0" : d.to_string()});
            }
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                std::string ij = "(" + std::to_string(i) + "," + std::to_string(j) + ")";
                out.push_back(
                    scalar_record("expansion display = pairing with displayed Gram " + ij + tag,
                                  expansion_display(i, j, p, k), pair_stabilized(i, j, p, k, displayed_gram(p, k))));
                out.push_back(scalar_record("Theta closed form = derived pairing " + ij + tag,
                                            pair_stabilized(i, j, p, k, g.G), theta_closed_form(i, j, p, k)));
            }
    }
    return out;
}

// ---------------------------------------------------------------------------

bool PowerSeries::is_zero() const {
    for (const auto& x : c)
        if (x != 0) return false;
    return true;
}

long PowerSeries::valuation() const {
    for (std::size_t i = 0; i < c.size(); ++i)
        if (c[i] != 0) return long(i);
    return -1;
}

LadjSeries ladj_generator(const GramFamily& family, std::size_t a, std::size_t b) {
    if (family.empty()) throw std::invalid_argument("ladj_generator: empty family");
    const Q g0 = family[0](0, 0);
    if (g0 == 0) throw std::invalid_argument("ladj_generator: g11 has zero constant term");
    LadjSeries out;
    for (const auto& Gn : family) out.series.c.push_back(Gn(a, b) / g0);
    out.indeterminate = out.series.is_zero();
    out.unit_constant_term = out.series.c[0] != 0;
    return out;
}

namespace {

std::vector<Q> series_mul(const std::vector<Q>& x, const std::vector<Q>& y, std::size_t M) {
    std::vector<Q> r(M);
    for (std::size_t i = 0; i < std::min(M, x.size()); ++i)
        if (x[i] != 0)
            for (std::size_t j = 0; i + j < M && j < y.size(); ++j) r[i + j] += x[i] * y[j];
    return r;
}

std::vector<Q> poly_series(const Poly& f, const Q& lam0, const Q& lamb0, const Q& dlam, const Q& dlamb,
                           std::size_t M) {
    std::vector<Q> out(M);
    const std::vector<Q> l{lam0, dlam}, lb{lamb0, dlamb};
    for (const auto& [mono, c] : f.terms()) {
        std::vector<Q> t{c};
        for (int e = 0; e < mono.first; ++e) t = series_mul(t, l, M);
        for (int e = 0; e < mono.second; ++e) t = series_mul(t, lb, M);
        for (std::size_t i = 0; i < t.size() && i < M; ++i) out[i] += t[i];
    }
    return out;
}

}  // namespace

PowerSeries ratfunc_series(const RatFunc& x, const Q& lam0, const Q& lamb0, const Q& dlam, const Q& dlamb,
                           std::size_t M) {
    std::vector<Q> n = poly_series(x.num(), lam0, lamb0, dlam, dlamb, M);
    std::vector<Q> d = poly_series(x.den(), lam0, lamb0, dlam, dlamb, M);
    if (d.empty() || d[0] == 0) throw std::domain_error("ratfunc_series: pole at the base point");
    PowerSeries s;
    s.c.assign(M, Q(0));
    for (std::size_t i = 0; i < M; ++i) {
        Q v = n[i];
        for (std::size_t j = 1; j <= i; ++j) v -= d[j] * s.c[i - j];
        s.c[i] = v / d[0];
    }
    return s;
}

GramFamily gram_family_along_line(const OperatorMatrix4& G, const Q& lam0, const Q& lamb0, const Q& dlam,
                                  const Q& dlamb, std::size_t M) {
    GramFamily fam(M, Matrix<Q>(G.rows(), G.cols()));
    for (std::size_t a = 0; a < G.rows(); ++a)
        for (std::size_t b = 0; b < G.cols(); ++b) {
            PowerSeries s = ratfunc_series(G(a, b), lam0, lamb0, dlam, dlamb, M);
            for (std::size_t n = 0; n < M; ++n) fam[n](a, b) = s.c[n];
        }
    return fam;
}

}  // namespace bianchi
