#pragma once

#include "bianchi/amice.hpp"
#include "bianchi/matrix.hpp"
#include "bianchi/padic.hpp"
#include "bianchi/weight_action.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace bianchi {

// Coordinates c[i1*(N+1)+i2] = mu(e_{(i1,i2)}^{(r)}) with respect to the dual Amice basis,
// on T00 = Z_p^2 identified through X -> n(pX).
struct TruncDistribution {
    unsigned long p = 3;
    unsigned k = 0;  // parallel weight
    unsigned N = 8;  // truncation per variable
    unsigned r = 1;
    std::vector<Q> c;

    TruncDistribution() = default;
    TruncDistribution(unsigned long p_, unsigned k_, unsigned N_, unsigned r_ = 1)
        : p(p_), k(k_), N(N_), r(r_), c(std::size_t(N_ + 1) * (N_ + 1)) {}

    std::size_t dim() const { return c.size(); }
    std::size_t index(unsigned i1, unsigned i2) const { return std::size_t(i1) * (N + 1) + i2; }
    bool is_integral() const;  // lies in D^{r,o}
};

// e_i^{(r)}(c + pX) = sum_j A(i, j) e_j^{(r)}(X) on one variable, 0 <= j <= i <= N.
Matrix<Q> shift_matrix_1var(unsigned long p, unsigned N, unsigned r, long c);
// Coordinate action of upsilon_{p,(c1,c2)} on D: mu -> mu(f(c1 + pX1, c2 + pX2)).
Matrix<Q> upsilon_action_matrix(unsigned long p, unsigned N, unsigned r, long c1, long c2);
// Only one variable moved.
Matrix<Q> upsilon_action_matrix_1(unsigned long p, unsigned N, unsigned r, long c, bool second_factor);

// U_p on coordinates: sum over the p^2 representatives. Exact (integer entries).
Matrix<Q> up_moment_matrix(unsigned k, unsigned long p, unsigned N, unsigned r = 1);
Matrix<PAdicNum> to_padic(const Matrix<Q>& A, unsigned long p, long M);
TruncDistribution apply(const Matrix<Q>& A, const TruncDistribution& mu);

// min_i v_p(A(i, j)) for each column j (LONG_MAX for a zero column).
std::vector<long> column_min_valuations(const Matrix<Q>& A, unsigned long p);

// rho(mu)(Y1^a Y2^b) = p^{a+b} mu(X1^a X2^b), a, b <= k, with Y = pX the variable of V_k.
DualModuleElement specialize_to_vk(const TruncDistribution& mu);
// mu(X1^a X2^b), a, b <= k (no rescaling).
DualModuleElement low_moments(const TruncDistribution& mu);
Matrix<Q> specialization_matrix(unsigned long p, unsigned k, unsigned N, unsigned r = 1);
// rho U_p^{dist} - U_p^{classical} rho.
Matrix<Q> intertwining_residual(unsigned k, unsigned long p, unsigned N, unsigned r = 1);

// Fil^j = ker(D^{r,o} -> D^{r-1,o} / p^j).
bool filtration_level(const TruncDistribution& mu, unsigned r, long j);

// int int prod (1 + p X_i X_i')^k dmu dnu.
Q pair_distributions(const TruncDistribution& mu, const TruncDistribution& nu);
// The same kernel on low moments mu(X^a).
Q pair_low_moments(const DualModuleElement& m, const DualModuleElement& n, unsigned long p);
// int int prod (1 + Y_i Y_i' / p)^k on V_k^vee: the pairing the specialization carries.
Q pair_specialized(const DualModuleElement& mu, const DualModuleElement& nu, unsigned long p);

// Action of gamma in Xi on low moments through (f|gamma)(X) = (a+bpX)^k f(p^{-1}(c+dpX)/(a+bpX)).
DualModuleElement act_xi_low_moments(const GroupElemPair& g, const DualModuleElement& m, unsigned long p);

// ---------------------------------------------------------------------------

// Monic characteristic polynomial a[0] + a[1] X + ... + X^n, Hessenberg route.
std::vector<PAdicNum> char_poly_padic(const Matrix<PAdicNum>& A);
std::vector<Q> char_poly_exact(const Matrix<Q>& A);

struct NewtonSegment {
    Q slope;
    std::size_t length = 0;
    bool certified = false;
};

struct NewtonPolygon {
    unsigned long p = 0;
    std::vector<PAdicNum> fredholm;  // det(1 - T A) = sum fredholm[i] T^i
    std::vector<std::pair<long, long>> vertices;  // (index, valuation)
    std::vector<NewtonSegment> segments;
    // certified slopes with multiplicity, nondecreasing
    std::vector<Q> slopes() const;
    std::vector<Q> slopes_below(const Q& h) const;
    bool all_certified() const;
};

inline constexpr long kDefaultDigits = 30;
inline constexpr long kDefaultMargin = 2;

NewtonPolygon char_poly_and_newton(const Matrix<Q>& A, unsigned long p, long M = kDefaultDigits,
                                   long margin = kDefaultMargin);
NewtonPolygon newton_from_padic(const Matrix<PAdicNum>& A, long margin = kDefaultMargin);

struct SlopeBoundaryError : std::domain_error {
    using std::domain_error::domain_error;
};
struct InsufficientPrecision : std::runtime_error {
    long required;
    InsufficientPrecision(const std::string& what, long req) : std::runtime_error(what), required(req) {}
};

struct SlopeProjector {
    Matrix<Q> P;  // exact idempotent of rank `rank`
    std::size_t rank = 0;
    std::vector<PAdicNum> factor;  // monic, slope <= h part of the char poly
    long precision = 0;            // min valuation of A P - P A
};

// Spectral projector onto the slope <= h part: block iteration with A and A^T modulo p^M
// gives the two invariant subspaces; P = S (W^T S)^{-1} W^T.
SlopeProjector slope_le_h_projector(const Matrix<Q>& A, unsigned long p, const Q& h, long M = kDefaultDigits,
                                    long min_digits = 10);

}  // namespace bianchi
