#include "bianchi/distributions.hpp"

#include "bianchi/hecke.hpp"

#include <algorithm>
#include <climits>
#include <random>

namespace bianchi {

namespace {

Z fact(unsigned long n) {
    Z f = 1;
    for (unsigned long i = 2; i <= n; ++i) f *= i;
    return f;
}

unsigned long fl(unsigned long i, unsigned long p, unsigned r) { return i / zpow(p, r).get_ui(); }

// generalized binomial binom(n, i), n any integer
Z gbinom(const Z& n, unsigned long i) {
    Z num = 1;
    for (unsigned long t = 0; t < i; ++t) num *= n - t;
    return num / fact(i);
}

// S(a, i), Stirling numbers of the second kind
std::vector<std::vector<Z>> stirling2(unsigned n) {
    std::vector<std::vector<Z>> S(n + 1, std::vector<Z>(n + 1, 0));
    S[0][0] = 1;
    for (unsigned a = 1; a <= n; ++a)
        for (unsigned i = 1; i <= a; ++i) S[a][i] = Z(i) * S[a - 1][i] + S[a - 1][i - 1];
    return S;
}

Matrix<Q> identity_q(std::size_t n) { return Matrix<Q>::identity(n, Q(0), Q(1)); }

// row a: coefficients of the monomial moment mu(X^a) in the coordinates mu_i, one variable
Matrix<Q> monomial_from_coords_1var(unsigned long p, unsigned k, unsigned N, unsigned r) {
    auto S = stirling2(k);
    Matrix<Q> M(k + 1, N + 1);
    for (unsigned a = 0; a <= k; ++a)
        for (unsigned i = 0; i <= a; ++i) M(a, i) = Q(S[a][i] * fact(i)) / Q(fact(fl(i, p, r)));
    return M;
}

void check_prime(unsigned long p) {
    if (p < 3 || !is_prime(p)) throw std::invalid_argument("distributions: p must be an odd prime");
}

}  // namespace

bool TruncDistribution::is_integral() const {
    for (const auto& x : c)
        if (x != 0 && valuation(x, p) < 0) return false;
    return true;
}

Matrix<Q> shift_matrix_1var(unsigned long p, unsigned N, unsigned r, long c) {
    Matrix<Q> A(N + 1, N + 1);
    for (unsigned i = 0; i <= N; ++i) {
        // Mahler coefficients of l -> binom(c + p l, i)
        std::vector<Z> f(i + 1);
        for (unsigned l = 0; l <= i; ++l) f[l] = gbinom(Z(c) + Z(p) * l, i);
        for (unsigned j = 0; j <= i; ++j) {
            Z a = 0;
            for (unsigned l = 0; l <= j; ++l) a += ((j - l) % 2 ? -1 : 1) * gbinom(j, l) * f[l];
            if (a != 0) A(i, j) = Q(a * fact(fl(i, p, r))) / Q(fact(fl(j, p, r)));
        }
    }
    return A;
}

Matrix<Q> upsilon_action_matrix(unsigned long p, unsigned N, unsigned r, long c1, long c2) {
    return kron(shift_matrix_1var(p, N, r, c1), shift_matrix_1var(p, N, r, c2));
}

Matrix<Q> upsilon_action_matrix_1(unsigned long p, unsigned N, unsigned r, long c, bool second_factor) {
    Matrix<Q> A = shift_matrix_1var(p, N, r, c), I = identity_q(N + 1);
    return second_factor ? kron(I, A) : kron(A, I);
}

Matrix<Q> up_moment_matrix(unsigned k, unsigned long p, unsigned N, unsigned r) {
    check_prime(p);
    if (N < k) throw std::invalid_argument("up_moment_matrix: N < k");
    Matrix<Q> A(N + 1, N + 1);
    for (unsigned long c = 0; c < p; ++c) A = A + shift_matrix_1var(p, N, r, long(c));
    return kron(A, A);
}

Matrix<PAdicNum> to_padic(const Matrix<Q>& A, unsigned long p, long M) {
    Matrix<PAdicNum> B(A.rows(), A.cols(), PAdicNum::zero(p));
    for (std::size_t i = 0; i < A.rows(); ++i)
        for (std::size_t j = 0; j < A.cols(); ++j) B(i, j) = PAdicNum::from_rational(A(i, j), p, M);
    return B;
}

TruncDistribution apply(const Matrix<Q>& A, const TruncDistribution& mu) {
    TruncDistribution out = mu;
    out.c = A.apply(mu.c);
    return out;
}

std::vector<long> column_min_valuations(const Matrix<Q>& A, unsigned long p) {
    std::vector<long> v(A.cols(), LONG_MAX);
    for (std::size_t i = 0; i < A.rows(); ++i)
        for (std::size_t j = 0; j < A.cols(); ++j)
            if (A(i, j) != 0) v[j] = std::min(v[j], valuation(A(i, j), p));
    return v;
}

Matrix<Q> specialization_matrix(unsigned long p, unsigned k, unsigned N, unsigned r) {
    if (N < k) throw std::invalid_argument("specialize_to_vk: N < k");
    Matrix<Q> M = monomial_from_coords_1var(p, k, N, r);
    for (unsigned a = 0; a <= k; ++a)
        for (unsigned i = 0; i <= N; ++i) M(a, i) *= Q(zpow(p, a));
    return kron(M, M);
}

DualModuleElement low_moments(const TruncDistribution& mu) {
    if (mu.N < mu.k) throw std::invalid_argument("low_moments: N < k");
    Matrix<Q> M = monomial_from_coords_1var(mu.p, mu.k, mu.N, mu.r);
    DualModuleElement out(WeightK::parallel(mu.k));
    out.m = kron(M, M).apply(mu.c);
    return out;
}

DualModuleElement specialize_to_vk(const TruncDistribution& mu) {
    DualModuleElement out(WeightK::parallel(mu.k));
    out.m = specialization_matrix(mu.p, mu.k, mu.N, mu.r).apply(mu.c);
    return out;
}

Matrix<Q> intertwining_residual(unsigned k, unsigned long p, unsigned N, unsigned r) {
    Matrix<Q> S = specialization_matrix(p, k, N, r);
    return S * up_moment_matrix(k, p, N, r) - hecke_matrix(HeckeOp::U_p, p, WeightK::parallel(k)) * S;
}

bool filtration_level(const TruncDistribution& mu, unsigned r, long j) {
    if (r <= 1) throw std::invalid_argument("filtration_level: r must be > 1");
    if (mu.r != r) throw std::invalid_argument("filtration_level: coordinates are for another radius");
    for (unsigned i1 = 0; i1 <= mu.N; ++i1)
        for (unsigned i2 = 0; i2 <= mu.N; ++i2) {
            const Q& x = mu.c[mu.index(i1, i2)];
            if (x == 0) continue;
            long v = valuation(x, mu.p);
            if (v < 0) return false;
            long need = std::max(0L, j - basis_scaling_valuation({i1, i2}, r - 1, r, mu.p));
            if (v < need) return false;
        }
    return true;
}

Q pair_low_moments(const DualModuleElement& m, const DualModuleElement& n, unsigned long p) {
    if (!(m.k == n.k)) throw std::invalid_argument("pair: weight mismatch");
    const WeightK k = m.k;
    Q s = 0;
    for (unsigned a = 0; a <= k.k1; ++a)
        for (unsigned b = 0; b <= k.k2; ++b) {
            std::size_t t = k.index(a, b);
            if (m.m[t] == 0 || n.m[t] == 0) continue;
            s += Q(gbinom(k.k1, a) * gbinom(k.k2, b) * zpow(p, a + b)) * m.m[t] * n.m[t];
        }
    return s;
}

Q pair_specialized(const DualModuleElement& mu, const DualModuleElement& nu, unsigned long p) {
    if (!(mu.k == nu.k)) throw std::invalid_argument("pair: weight mismatch");
    const WeightK k = mu.k;
    Q s = 0;
    for (unsigned a = 0; a <= k.k1; ++a)
        for (unsigned b = 0; b <= k.k2; ++b) {
            std::size_t t = k.index(a, b);
            s += Q(gbinom(k.k1, a) * gbinom(k.k2, b)) / Q(zpow(p, a + b)) * mu.m[t] * nu.m[t];
        }
    return s;
}

Q pair_distributions(const TruncDistribution& mu, const TruncDistribution& nu) {
    if (mu.k != nu.k) throw std::invalid_argument("pair_distributions: weight mismatch");
    if (mu.p != nu.p) throw std::invalid_argument("pair_distributions: prime mismatch");
    return pair_low_moments(low_moments(mu), low_moments(nu), mu.p);
}

namespace {

// (gamma m)(X^a) = m(p^{-a} (C + D p X)^a (A + B p X)^{k-a}) on one variable
Matrix<Q> xi_moment_matrix_1var(const Mat2& g, unsigned k, unsigned long p) {
    const Q P{long(p)};
    auto mul = [](const std::vector<Q>& x, const std::vector<Q>& y) {
        std::vector<Q> z(x.size() + y.size() - 1);
        for (std::size_t i = 0; i < x.size(); ++i)
            for (std::size_t j = 0; j < y.size(); ++j) z[i + j] += x[i] * y[j];
        return z;
    };
    const std::vector<Q> num{g.c, Q(g.d * P)}, den{g.a, Q(g.b * P)};
    Matrix<Q> M(k + 1, k + 1);
    for (unsigned a = 0; a <= k; ++a) {
        std::vector<Q> f{qpow(P, -long(a))};
        for (unsigned t = 0; t < a; ++t) f = mul(f, num);
        for (unsigned t = a; t < k; ++t) f = mul(f, den);
        for (unsigned j = 0; j < f.size() && j <= k; ++j) M(a, j) = f[j];
    }
    return M;
}

}  // namespace

DualModuleElement act_xi_low_moments(const GroupElemPair& g, const DualModuleElement& m, unsigned long p) {
    if (!in_xi(g, p)) throw std::domain_error("act_xi_low_moments: element not in Xi");
    Matrix<Q> A = kron(xi_moment_matrix_1var(g.g1, m.k.k1, p), xi_moment_matrix_1var(g.g2, m.k.k2, p));
    DualModuleElement out(m.k);
    out.m = A.apply(m.m);
    return out;
}

// ---------------------------------------------------------------------------

namespace {

unsigned long prime_of(const Matrix<PAdicNum>& A) {
    for (const auto& x : A.data())
        if (x.prime()) return x.prime();
    return 0;
}

long max_abs_prec(const Matrix<PAdicNum>& A) {
    long m = 1;
    for (const auto& x : A.data())
        if (x.abs_prec() < PAdicNum::kExact) m = std::max(m, x.abs_prec());
    return m;
}

bool exact_zero(const PAdicNum& x) { return x.is_zero() && x.abs_prec() >= PAdicNum::kExact; }

// index of the entry with least valuation among nonzero-at-precision ones, or npos
template <class F>
std::size_t argmin_val(std::size_t from, std::size_t to, F get) {
    std::size_t best = std::size_t(-1);
    long bv = LONG_MAX;
    for (std::size_t i = from; i < to; ++i) {
        const PAdicNum& x = get(i);
        if (!x.is_zero() && x.val() < bv) {
            bv = x.val();
            best = i;
        }
    }
    return best;
}

using PPoly = std::vector<PAdicNum>;


}  // namespace

std::vector<PAdicNum> char_poly_padic(const Matrix<PAdicNum>& A) {
    const std::size_t n = A.rows();
    if (A.cols() != n) throw std::invalid_argument("char_poly_padic: matrix not square");
    const unsigned long p = prime_of(A);
    const PAdicNum one = PAdicNum::from_integer(1, p ? p : 3, max_abs_prec(A) + 1);
    Matrix<PAdicNum> H = A;
    // Hessenberg form by similarity, pivoting on least valuation
    for (std::size_t j = 0; j + 2 < n; ++j) {
        std::size_t piv = argmin_val(j + 1, n, [&](std::size_t i) -> const PAdicNum& { return H(i, j); });
        if (piv == std::size_t(-1)) continue;
        if (piv != j + 1) {
            for (std::size_t t = 0; t < n; ++t) std::swap(H(piv, t), H(j + 1, t));
            for (std::size_t t = 0; t < n; ++t) std::swap(H(t, piv), H(t, j + 1));
        }
        const PAdicNum pv = H(j + 1, j);
        for (std::size_t l = j + 2; l < n; ++l) {
            if (exact_zero(H(l, j))) continue;
            const PAdicNum m = H(l, j) / pv;
            for (std::size_t t = 0; t < n; ++t)
                if (!exact_zero(H(j + 1, t))) H(l, t) -= m * H(j + 1, t);
            for (std::size_t t = 0; t < n; ++t)
                if (!exact_zero(H(t, l))) H(t, j + 1) += m * H(t, l);
        }
    }
    // p_j = (X - h_jj) p_{j-1} - sum_{i<j} h_ij (h_{j,j-1} ... h_{i+1,i}) p_{i-1}
    std::vector<PPoly> P(n + 1);
    P[0] = {one};
    for (std::size_t j = 1; j <= n; ++j) {
        PPoly q(j + 1);
        for (std::size_t d = 0; d < j; ++d) {
            q[d + 1] += P[j - 1][d];
            q[d] -= H(j - 1, j - 1) * P[j - 1][d];
        }
        PAdicNum prod = one;
        for (std::size_t i = j - 1; i >= 1; --i) {
            prod = prod * H(i, i - 1);
            if (exact_zero(prod)) break;
            const PAdicNum coef = H(i - 1, j - 1) * prod;
            if (!exact_zero(coef))
                for (std::size_t d = 0; d < P[i - 1].size(); ++d) q[d] -= coef * P[i - 1][d];
        }
        P[j] = std::move(q);
    }
    return P[n];
}

std::vector<Q> char_poly_exact(const Matrix<Q>& A) {
    const std::size_t n = A.rows();
    if (A.cols() != n) throw std::invalid_argument("char_poly_exact: matrix not square");
    Matrix<Q> H = A;
    for (std::size_t j = 0; j + 2 < n; ++j) {
        std::size_t piv = n;
        for (std::size_t i = j + 1; i < n; ++i)
            if (H(i, j) != 0) {
                piv = i;
                break;
            }
        if (piv == n) continue;
        if (piv != j + 1) {
            for (std::size_t t = 0; t < n; ++t) std::swap(H(piv, t), H(j + 1, t));
            for (std::size_t t = 0; t < n; ++t) std::swap(H(t, piv), H(t, j + 1));
        }
        const Q pv = H(j + 1, j);
        for (std::size_t l = j + 2; l < n; ++l) {
            if (H(l, j) == 0) continue;
            const Q m = H(l, j) / pv;
            for (std::size_t t = 0; t < n; ++t)
                if (H(j + 1, t) != 0) H(l, t) -= m * H(j + 1, t);
            for (std::size_t t = 0; t < n; ++t)
                if (H(t, l) != 0) H(t, j + 1) += m * H(t, l);
        }
    }
    std::vector<std::vector<Q>> P(n + 1);
    P[0] = {Q(1)};
    for (std::size_t j = 1; j <= n; ++j) {
        std::vector<Q> q(j + 1);
        for (std::size_t d = 0; d < j; ++d) {
            q[d + 1] += P[j - 1][d];
            q[d] -= H(j - 1, j - 1) * P[j - 1][d];
        }
        Q prod = 1;
        for (std::size_t i = j - 1; i >= 1; --i) {
            prod *= H(i, i - 1);
            if (prod == 0) break;
            const Q coef = H(i - 1, j - 1) * prod;
            if (coef != 0)
                for (std::size_t d = 0; d < P[i - 1].size(); ++d) q[d] -= coef * P[i - 1][d];
        }
        P[j] = std::move(q);
    }
    return P[n];
}

// ---------------------------------------------------------------------------

std::vector<Q> NewtonPolygon::slopes() const {
    std::vector<Q> s;
    for (const auto& seg : segments) {
        if (!seg.certified) break;
        for (std::size_t t = 0; t < seg.length; ++t) s.push_back(seg.slope);
    }
    return s;
}

std::vector<Q> NewtonPolygon::slopes_below(const Q& h) const {
    std::vector<Q> s;
    for (const Q& x : slopes())
        if (x < h) s.push_back(x);
    return s;
}

bool NewtonPolygon::all_certified() const {
    for (const auto& seg : segments)
        if (!seg.certified) return false;
    return true;
}

namespace {

Q ratio(long a, long b) {
    Q x(a, b);
    x.canonicalize();
    return x;
}

struct NPoint {
    long i;
    long y;
    bool known;
};

std::vector<NPoint> newton_points(const std::vector<PAdicNum>& fred) {
    std::vector<NPoint> pts;
    for (std::size_t i = 0; i < fred.size(); ++i) {
        const PAdicNum& x = fred[i];
        if (exact_zero(x)) continue;
        pts.push_back({long(i), x.val(), !x.is_zero()});
    }
    return pts;
}

// q lies on or above the line through a and b, by at least margin
bool above(const NPoint& a, const NPoint& b, const NPoint& q, long margin) {
    // y_q - y_a - (i_q - i_a)(y_b - y_a)/(i_b - i_a) >= margin
    Q lhs = Q(q.y - a.y) - Q(q.i - a.i) * ratio(b.y - a.y, b.i - a.i);
    return lhs >= margin;
}

}  // namespace

namespace {

NewtonPolygon newton_from_fredholm(unsigned long p, std::vector<PAdicNum> fred, long margin) {
    NewtonPolygon np;
    np.p = p;
    np.fredholm = std::move(fred);

    std::vector<NPoint> pts = newton_points(np.fredholm);
    std::vector<NPoint> hull;
    for (const auto& q : pts) {
        while (hull.size() >= 2) {
            const NPoint &a = hull[hull.size() - 2], &b = hull.back();
            // drop b if it is not strictly below the chord a-q
            if ((b.y - a.y) * (q.i - a.i) >= (q.y - a.y) * (b.i - a.i))
                hull.pop_back();
            else
                break;
        }
        hull.push_back(q);
    }
    for (const auto& v : hull) np.vertices.push_back({v.i, v.y});
    for (std::size_t s = 0; s + 1 < hull.size(); ++s) {
        const NPoint &a = hull[s], &b = hull[s + 1];
        NewtonSegment seg;
        seg.slope = ratio(b.y - a.y, b.i - a.i);
        seg.length = std::size_t(b.i - a.i);
        seg.certified = a.known && b.known;
        for (const auto& q : pts)
            if (!q.known && q.i != a.i && q.i != b.i && !above(a, b, q, margin)) seg.certified = false;
        np.segments.push_back(seg);
    }
    return np;
}

}  // namespace

NewtonPolygon newton_from_padic(const Matrix<PAdicNum>& A, long margin) {
    const std::size_t n = A.rows();
    std::vector<PAdicNum> chi = char_poly_padic(A), fred(n + 1);
    for (std::size_t i = 0; i <= n; ++i) fred[i] = chi[n - i];
    return newton_from_fredholm(prime_of(A), std::move(fred), margin);
}

NewtonPolygon char_poly_and_newton(const Matrix<Q>& A, unsigned long p, long M, long margin) {
    if (A.rows() != A.cols()) throw std::invalid_argument("char_poly_and_newton: matrix not square");
    // exact entries: the polynomial is computed over Q and only then rounded to M digits
    const std::size_t n = A.rows();
    std::vector<Q> chi = char_poly_exact(A);
    std::vector<PAdicNum> fred(n + 1);
    for (std::size_t i = 0; i <= n; ++i) fred[i] = PAdicNum::from_rational(chi[n - i], p, M);
    return newton_from_fredholm(p, std::move(fred), margin);
}

// ---------------------------------------------------------------------------

namespace {

Matrix<Q> inverse_exact(Matrix<Q> K) {
    const std::size_t m = K.rows();
    Matrix<Q> B = identity_q(m);
    for (std::size_t c = 0; c < m; ++c) {
        std::size_t piv = m;
        for (std::size_t r = c; r < m; ++r)
            if (K(r, c) != 0) {
                piv = r;
                break;
            }
        if (piv == m) throw InsufficientPrecision("slope_le_h_projector: singular pairing of subspaces", 0);
        for (std::size_t j = 0; j < m; ++j) {
            std::swap(K(c, j), K(piv, j));
            std::swap(B(c, j), B(piv, j));
        }
        const Q inv = 1 / K(c, c);
        for (std::size_t j = 0; j < m; ++j) {
            K(c, j) *= inv;
            B(c, j) *= inv;
        }
        for (std::size_t r = 0; r < m; ++r) {
            if (r == c || K(r, c) == 0) continue;
            const Q f = K(r, c);
            for (std::size_t j = 0; j < m; ++j) {
                K(r, j) -= f * K(c, j);
                B(r, j) -= f * B(c, j);
            }
        }
    }
    return B;
}

long vz(const Z& x, unsigned long p, long cap) {
    if (x == 0) return cap;
    return std::min(cap, valuation(x, p));
}

// x mod p^M for p-integral x
Z reduce_mod(const Q& x, const Z& mod) {
    Z inv;
    mpz_invert(inv.get_mpz_t(), x.get_den().get_mpz_t(), mod.get_mpz_t());
    Z r = (x.get_num() * inv) % mod;
    if (r < 0) r += mod;
    return r;
}

// m-dimensional dominant subspace of B (entries mod p^M) by normalized block iteration.
// Each step multiplies by B and column-reduces with least-valuation pivots.
std::vector<std::vector<Z>> dominant_subspace(const std::vector<std::vector<Z>>& B, std::size_t m, unsigned long p,
                                              long M, unsigned long steps) {
    const std::size_t n = B.size();
    const Z mod = zpow(p, M);
    std::mt19937_64 rng(0x5eed);
    std::vector<std::vector<Z>> X(n, std::vector<Z>(m));
    for (auto& row : X)
        for (auto& x : row) x = Z(long(rng() % 1000));
    for (unsigned long step = 0; step < steps; ++step) {
        std::vector<std::vector<Z>> Y(n, std::vector<Z>(m, 0));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t l = 0; l < n; ++l) {
                if (B[i][l] == 0) continue;
                for (std::size_t s = 0; s < m; ++s) Y[i][s] += B[i][l] * X[l][s];
            }
        for (auto& row : Y)
            for (auto& y : row) y %= mod;
        std::vector<bool> used(n);
        std::vector<std::size_t> prow;
        for (std::size_t s = 0; s < m; ++s) {
            for (std::size_t t = 0; t < s; ++t) {
                const Z f = Y[prow[t]][s];
                if (f == 0) continue;
                for (std::size_t i = 0; i < n; ++i) Y[i][s] = (Y[i][s] - f * Y[i][t]) % mod;
            }
            std::size_t best = n;
            long bv = M;
            for (std::size_t i = 0; i < n; ++i)
                if (!used[i]) {
                    long v = vz(Y[i][s], p, M);
                    if (v < bv) bv = v, best = i;
                }
            if (best == n || bv >= M - kDefaultMargin)
                throw InsufficientPrecision("slope_le_h_projector: iteration lost rank at working precision", 2 * M);
            used[best] = true;
            prow.push_back(best);
            const Z pv = zpow(p, bv);
            Z u = Y[best][s] / pv, uinv;
            mpz_invert(uinv.get_mpz_t(), u.get_mpz_t(), mod.get_mpz_t());
            for (std::size_t i = 0; i < n; ++i) {
                Z y = Y[i][s] % mod;
                if (y < 0) y += mod;
                Y[i][s] = (y / pv) * uinv % mod;
            }
        }
        X = std::move(Y);
    }
    return X;
}

}  // namespace

SlopeProjector slope_le_h_projector(const Matrix<Q>& A, unsigned long p, const Q& h, long M, long min_digits) {
    const std::size_t n = A.rows();
    if (A.cols() != n) throw std::invalid_argument("slope_le_h_projector: matrix not square");
    if (M < min_digits + kDefaultMargin)
        throw InsufficientPrecision("slope_le_h_projector: working precision below the requested digits",
                                    min_digits + kDefaultMargin);
    NewtonPolygon np = char_poly_and_newton(A, p, M);
    std::vector<NPoint> pts = newton_points(np.fredholm);

    // split vertex m: slopes < h to its left, > h to its right
    std::size_t m = 0;
    Q h1 = 0;
    bool have_h1 = false;
    for (const auto& seg : np.segments) {
        if (seg.slope == h) throw SlopeBoundaryError("slope_le_h_projector: h is a slope");
        if (seg.slope > h) break;
        if (!seg.certified) throw SlopeBoundaryError("slope_le_h_projector: slopes below h are not certified");
        m += seg.length;
        h1 = seg.slope;
        have_h1 = true;
    }
    const NPoint* vm = nullptr;
    for (const auto& q : pts)
        if (q.i == long(m)) vm = &q;
    if (!vm || !vm->known) throw SlopeBoundaryError("slope_le_h_projector: split vertex not certified");
    Q gap_slope = 0;
    bool have_gap = false;
    for (const auto& q : pts) {
        if (q.i <= long(m)) continue;
        Q s = ratio(q.y - vm->y, q.i - vm->i);
        if (s <= h || (!q.known && Q(q.y) < Q(vm->y) + h * Q(q.i - vm->i) + kDefaultMargin))
            throw SlopeBoundaryError("slope_le_h_projector: h within the certification margin");
        if (!have_gap || s < gap_slope) gap_slope = s;
        have_gap = true;
    }

    SlopeProjector out;
    out.rank = m;
    if (m == 0) {
        out.P = Matrix<Q>(n, n);
        out.factor = {PAdicNum::from_integer(1, p, M)};
        out.precision = PAdicNum::kExact;
        return out;
    }
    if (m == n) {
        out.P = identity_q(n);
        std::vector<Q> chi = char_poly_exact(A);
        for (const Q& c : chi) out.factor.push_back(PAdicNum::from_rational(c, p, M));
        out.precision = PAdicNum::kExact;
        return out;
    }

    // integral rescaling p^e A
    long e = 0;
    for (const auto& x : A.data())
        if (x != 0) e = std::max(e, -valuation(x, p));
    const Z mod = zpow(p, M);
    std::vector<std::vector<Z>> B(n, std::vector<Z>(n)), Bt(n, std::vector<Z>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            B[i][j] = A(i, j) == 0 ? Z(0) : reduce_mod(A(i, j) * Q(zpow(p, e)), mod);
            Bt[j][i] = B[i][j];
        }
    // convergence rate p^{-(h2 - h1)} per step; nilpotent parts die after n steps
    const Q gap = have_gap ? gap_slope - (have_h1 ? h1 : Q(0)) : Q(M);
    Q need = Q(M + kDefaultMargin) / gap;
    unsigned long steps = std::max<unsigned long>(n, Z(need.get_num() / need.get_den()).get_ui() + 2);
    auto S = dominant_subspace(B, m, p, M, steps);
    auto W = dominant_subspace(Bt, m, p, M, steps);

    Matrix<Q> Sq(n, m), Wt(m, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t s = 0; s < m; ++s) {
            Sq(i, s) = Q(S[i][s]);
            Wt(s, i) = Q(W[i][s]);
        }
    const Matrix<Q> Kinv = inverse_exact(Wt * Sq);
    out.P = Sq * (Kinv * Wt);
    const Matrix<Q> R = A * out.P - out.P * A;
    long pr = PAdicNum::kExact;
    for (const auto& x : R.data())
        if (x != 0) pr = std::min(pr, valuation(x, p));
    out.precision = pr;
    if (pr < min_digits)
        throw InsufficientPrecision("slope_le_h_projector: projector known to " + std::to_string(pr) + " digits",
                                    M + (min_digits - pr) + kDefaultMargin);
    std::vector<Q> f = char_poly_exact(Kinv * (Wt * (A * Sq)));
    const long fp = std::max(1L, std::min(pr, M));
    for (const Q& c : f) out.factor.push_back(PAdicNum::from_rational(c, p, fp));
    return out;
}

}  // namespace bianchi
