#pragma once

#include "bianchi/matrix.hpp"
#include "bianchi/padic.hpp"

#include <string>
#include <vector>

namespace bianchi {

struct WeightK {
    unsigned k1 = 0, k2 = 0;
    WeightK() = default;
    WeightK(unsigned a, unsigned b) : k1(a), k2(b) {}
    static WeightK parallel(unsigned k) { return {k, k}; }
    bool is_parallel() const { return k1 == k2; }
    std::size_t dim() const { return std::size_t(k1 + 1) * (k2 + 1); }
    // flat index of X1^a X2^b
    std::size_t index(unsigned a, unsigned b) const { return std::size_t(a) * (k2 + 1) + b; }
    bool operator==(const WeightK& o) const { return k1 == o.k1 && k2 == o.k2; }
};

struct Mat2 {
    Q a = 1, b = 0, c = 0, d = 1;
    Mat2() = default;
    Mat2(Q a_, Q b_, Q c_, Q d_) : a(std::move(a_)), b(std::move(b_)), c(std::move(c_)), d(std::move(d_)) {}
    Q det() const { return a * d - b * c; }
    Mat2 operator*(const Mat2& o) const;
    bool operator==(const Mat2& o) const { return a == o.a && b == o.b && c == o.c && d == o.d; }
    Mat2 inverse() const;
    std::string to_string() const;
};

struct GroupElemPair {
    Mat2 g1, g2;
    GroupElemPair() = default;
    GroupElemPair(Mat2 x, Mat2 y) : g1(std::move(x)), g2(std::move(y)) {}
    GroupElemPair operator*(const GroupElemPair& o) const { return {g1 * o.g1, g2 * o.g2}; }
    bool operator==(const GroupElemPair& o) const { return g1 == o.g1 && g2 == o.g2; }
    std::string to_string() const { return "(" + g1.to_string() + ", " + g2.to_string() + ")"; }
};

// Membership via entry valuations.
bool is_p_integral(const Q& x, unsigned long p);
bool in_gl2_zp(const Mat2& g, unsigned long p);
bool in_iwahori(const Mat2& g, unsigned long p);  // GL2(Z_p) with c in pZ_p
bool in_xi(const Mat2& g, unsigned long p);       // a unit, b integral, c in pZ_p, d integral
bool in_gl2_zp(const GroupElemPair& g, unsigned long p);
bool in_iwahori(const GroupElemPair& g, unsigned long p);
bool in_xi(const GroupElemPair& g, unsigned long p);

// Coefficients c[index(a,b)] of sum c_ab X1^a X2^b.
struct PolyModuleElement {
    WeightK k;
    std::vector<Q> c;
    explicit PolyModuleElement(WeightK w) : k(w), c(w.dim()) {}
    bool operator==(const PolyModuleElement& o) const { return k == o.k && c == o.c; }
};

// Moments m[index(a,b)] = mu(X1^a X2^b).
struct DualModuleElement {
    WeightK k;
    std::vector<Q> m;
    explicit DualModuleElement(WeightK w) : k(w), m(w.dim()) {}
    bool operator==(const DualModuleElement& o) const { return k == o.k && m == o.m; }
};

Q evaluate(const DualModuleElement& mu, const PolyModuleElement& phi);

// A[i][j] = coefficient of X^i in (a+bX)^{k-j} (c+dX)^j.
Matrix<Q> action_matrix(const Mat2& g, unsigned k);
// Kronecker product of the two factors in the flat monomial order.
Matrix<Q> action_matrix(const GroupElemPair& g, WeightK k);
// Matrix of mu -> g mu on moment vectors (transpose of the above).
Matrix<Q> dual_action_matrix(const GroupElemPair& g, WeightK k);

PolyModuleElement act_right(const PolyModuleElement& phi, const GroupElemPair& g);
DualModuleElement act_dual(const DualModuleElement& mu, const GroupElemPair& g);

// <mu, nu>_k = int int (X1' - X1)^{k1} (X2' - X2)^{k2} dnu(X') dmu(X).
Q pair_algebraic(const DualModuleElement& mu, const DualModuleElement& nu);
// [mu, nu]_k = int int (1 + p X1 X1')^{k1} (1 + p X2 X2')^{k2}.
Q pair_twisted(const DualModuleElement& mu, const DualModuleElement& nu, unsigned long p);
// Gram matrix of pair_algebraic on the monomial-dual basis.
Matrix<Q> algebraic_gram(WeightK k);

// Atkin-Lehner elements: omega = (0 -p; 1 0) in one or both factors.
Mat2 omega_matrix(unsigned long p);
GroupElemPair omega_frakp(unsigned long p);
GroupElemPair omega_frakpbar(unsigned long p);
GroupElemPair omega_p(unsigned long p);

// (a b; c d) -> (a c/p; pb d) in both factors; throws std::domain_error outside Xi.
GroupElemPair sharp(const GroupElemPair& g, unsigned long p);
// (a b; c d) -> (a pc; b/p d): the adjoint of g for pair_twisted, i.e. for the
// twist by omega = (0 -p; 1 0). sharp is the adjoint for the twist by (0 -1; p 0).
GroupElemPair twisted_adjoint(const GroupElemPair& g, unsigned long p);

}  // namespace bianchi
