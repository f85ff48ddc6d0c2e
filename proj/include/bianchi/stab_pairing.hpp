#pragma once

#include "bianchi/hecke.hpp"
#include "bianchi/symalg.hpp"

#include <string>
#include <vector>

namespace bianchi {

// 4x4 matrices on ([mu], ups_p^* mu, ups_pbar^* mu, ups_p^* ups_pbar^* mu); columns are images.
using OperatorMatrix4 = Matrix<RatFunc>;

struct HeckeMatrices {
    OperatorMatrix4 U_frakp, U_frakpbar, U_p;
};
struct ALMatrices {
    OperatorMatrix4 omega_frakp, omega_frakpbar, omega_p;
};

// Displayed forms, entry by entry.
HeckeMatrices displayed_hecke_matrices(unsigned long p, unsigned k);
ALMatrices displayed_al_matrices(unsigned long p, unsigned k);
HeckeMatrices displayed_adjoint_matrices(unsigned long p, unsigned k);

// Second route: hecke class matrices, and AL matrices from the group identities
// omega upsilon^* = s w (w in GL2(Z)) and omega^2 = c I.
HeckeMatrices build_hecke_matrices(unsigned long p, unsigned k);
ALMatrices build_al_matrices(unsigned long p, unsigned k);
// U^* = omega_p^{-1} U omega_p.
HeckeMatrices adjoint_matrices(unsigned long p, unsigned k);
OperatorMatrix4 conjugate_by(const OperatorMatrix4& M, const OperatorMatrix4& omega);

OperatorMatrix4 inverse4(const OperatorMatrix4& M);

// Gram matrix G(a,b) = <e_a, e_b> / s, where s = <[mu_1], [mu_2]>.
struct GramSolution {
    bool consistent = false;
    bool unique = false;
    std::size_t homogeneous_nullity = 0;  // both adjointness directions
    std::size_t one_sided_nullity = 0;    // only M^T G = G M^*
    OperatorMatrix4 G;
};

// Solves {M^T G = G M^*, M^{*T} G = G M} for M in {U_frakp, U_frakpbar} with g11 = 1.
GramSolution solve_gram(unsigned long p, unsigned k);
GramSolution solve_gram_with(const OperatorMatrix4& Up, const OperatorMatrix4& Upbar, const OperatorMatrix4& omega);
// The sixteen values as stated (g23 = g32 = -lam lamb / sigma^2), sigma = (-1)^k p + 1.
OperatorMatrix4 displayed_gram(unsigned long p, unsigned k);

// v^T G M_omega conj(v), v = stabilize(i, j); the coefficient of s.
StabScalar pair_stabilized(int i, int j, unsigned long p, unsigned k, const OperatorMatrix4& G);
StabScalar pair_stabilized(int i, int j, unsigned long p, unsigned k);

// Closed form for the twisted pairing of stabilizations, transcribed as printed.
StabScalar theta_closed_form(int i, int j, unsigned long p, unsigned k);
// The four-row expansion printed just before the closed form.
StabScalar expansion_display(int i, int j, unsigned long p, unsigned k);

struct ThetaFactor {
    StabScalar value;
    unsigned k_parity = 0;
    int i = 0, j = 0;
};
ThetaFactor theta_factor(int i, int j, unsigned long p, unsigned k);

// One record per checked identity.
struct VerificationRecord {
    std::string name;
    bool ok = false;
    std::string residual;  // "0" when ok
};
std::vector<VerificationRecord> verification_report(unsigned long p, unsigned k);

// Power series in w modulo w^M.
struct PowerSeries {
    std::vector<Q> c;
    std::size_t precision() const { return c.size(); }
    bool is_zero() const;
    long valuation() const;  // -1 for the zero series
};

// Gram family G(w) = sum_n G_n w^n, truncated.
using GramFamily = std::vector<Matrix<Q>>;

struct LadjSeries {
    PowerSeries series;
    bool indeterminate = false;  // zero to working precision
    bool unit_constant_term = false;
};

// Entry (a, b) of the family divided by the constant term of g11.
LadjSeries ladj_generator(const GramFamily& family, std::size_t a = 0, std::size_t b = 0);

// Taylor expansion of x along lam = lam0 + dlam w, lamb = lamb0 + dlamb w.
PowerSeries ratfunc_series(const RatFunc& x, const Q& lam0, const Q& lamb0, const Q& dlam, const Q& dlamb,
                           std::size_t M);
GramFamily gram_family_along_line(const OperatorMatrix4& G, const Q& lam0, const Q& lamb0, const Q& dlam,
                                  const Q& dlamb, std::size_t M);

}  // namespace bianchi
