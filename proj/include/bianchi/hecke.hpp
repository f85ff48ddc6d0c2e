#pragma once

#include "bianchi/symalg.hpp"
#include "bianchi/weight_action.hpp"

#include <array>
#include <string>
#include <vector>

namespace bianchi {

enum class HeckeOp { U_frakp, U_frakpbar, U_p, T_frakp, T_frakpbar };
enum class Level { iwahori, maximal };

std::string to_string(HeckeOp op);
HeckeOp hecke_op_from_string(const std::string& s);

struct CosetDecomposition {
    HeckeOp op = HeckeOp::U_frakp;
    unsigned long p = 0;
    GroupElemPair double_coset_generator;
    std::vector<GroupElemPair> representatives;
    Level level = Level::iwahori;
};

// upsilon_{frakp,c} = ((1 0; pc p), 1), and the analogue in the second factor.
GroupElemPair upsilon_c(unsigned long p, unsigned long c, bool second_factor);
// ((p 0; 0 1), 1) and (1, (p 0; 0 1)).
GroupElemPair upsilon_star(unsigned long p, bool second_factor);

// Representatives exactly as printed. For T the p matrices (1 0; pc p) all lie in
// one GL2(Z_p)-coset, so the printed set does not decompose the double coset.
CosetDecomposition enumerate_coset_reps(HeckeOp op, unsigned long p);
// Same as above for U; for T uses (1 0; c p), c = 0..p-1, together with upsilon^*.
CosetDecomposition corrected_coset_reps(HeckeOp op, unsigned long p);

struct FactorReport {
    std::size_t distinct_reps = 0;  // distinct representatives in this factor
    std::size_t cosets_hit = 0;     // right cosets reached by K g
    std::size_t enumerated = 0;     // elements of K mod p^e visited
    bool disjoint = false;
    bool covering = false;
    bool contained = false;  // every representative lies in K g K
    bool inconclusive = false;
};

struct DecompositionReport {
    bool disjoint = false;
    bool covering = false;
    bool inconclusive = false;
    std::size_t representatives = 0;
    std::size_t index = 0;  // number of right cosets in the double coset
    std::array<FactorReport, 2> factors;
    std::string detail;
    bool ok() const { return disjoint && covering && !inconclusive; }
};

inline constexpr unsigned long long kDefaultEnumerationBudget = 400'000'000ULL;

// Exhaustive check over K mod p^e (K the Iwahori or GL2(Z_p)); pair decompositions
// are checked factor by factor and must be the full product of the factor sets.
DecompositionReport verify_decomposition(const CosetDecomposition& dec, unsigned e = 3,
                                         unsigned long long budget = kDefaultEnumerationBudget);

// Sum of dual actions over the printed representatives.
Matrix<Q> hecke_matrix(HeckeOp op, unsigned long p, WeightK k);
Matrix<Q> hecke_matrix(const CosetDecomposition& dec, WeightK k);
DualModuleElement apply_hecke(HeckeOp op, const DualModuleElement& mu, unsigned long p);

// Residual U(upsilon^* mu) - p^{k_i+1} mu as a matrix on V_k^vee (i = 1 for frakp).
Matrix<Q> key_identity_residual(bool second_factor, unsigned long p, WeightK k);

// upsilon_c upsilon^* = s_c gamma_c with s_c scalar and gamma_c in the Iwahori subgroup.
struct KeyFactorization {
    std::vector<Q> scalars;
    std::vector<GroupElemPair> gammas;
    bool all_iwahori = false;
};
KeyFactorization factor_key_products(bool second_factor, unsigned long p);
// sum_c s_c^{k_i} from the factorization; the scalar the identity predicts once
// each gamma_c acts trivially.
Q key_identity_scalar(bool second_factor, unsigned long p, WeightK k);
// Checks U upsilon^* = sum_c s_c^{k_i} D(gamma_c) exactly on V_k^vee.
bool key_factorization_holds(bool second_factor, unsigned long p, WeightK k);

// dim of V_k^vee / span{(gamma - 1) V_k^vee : gamma in Iw_G}.
std::size_t iwahori_coinvariant_dim(unsigned long p, WeightK k);

// Coordinates in ([mu], upsilon_p^* mu, upsilon_pbar^* mu, upsilon_p^* upsilon_pbar^* mu).
using StabVector = std::array<StabScalar, 4>;

// (1, -a_i^{-1}, -b_j^{-1}, a_i^{-1} b_j^{-1}); a_0 = a, a_1 = lam - a.
StabVector stabilize(int i, int j, unsigned long p, unsigned k);
StabScalar alpha_choice(int i, unsigned long p, unsigned k);
StabScalar alphabar_choice(int j, unsigned long p, unsigned k);

// Action on the four basis classes for parallel weight k, from the coset data:
// U = T - upsilon^* on classes without upsilon^*, and the key identity on the rest.
// Columns are images of basis vectors.
Matrix<RatFunc> hecke_class_matrix(HeckeOp op, unsigned long p, unsigned k);

StabVector apply_class(const Matrix<RatFunc>& M, const StabVector& v);

}  // namespace bianchi
