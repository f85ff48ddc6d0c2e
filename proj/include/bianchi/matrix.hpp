#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace bianchi {

inline bool is_zero_elem(const mpq_class& x) { return x == 0; }
inline bool is_zero_elem(const mpz_class& x) { return x == 0; }

// Dense row-major matrix over any ring type with value semantics.
template <class T>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, const T& fill = T())
        : r_(rows), c_(cols), a_(rows * cols, fill) {}

    static Matrix identity(std::size_t n, const T& zero, const T& one) {
        Matrix m(n, n, zero);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = one;
        return m;
    }

    std::size_t rows() const { return r_; }
    std::size_t cols() const { return c_; }

    T& operator()(std::size_t i, std::size_t j) { return a_[i * c_ + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return a_[i * c_ + j]; }

    Matrix operator*(const Matrix& o) const {
        if (c_ != o.r_) throw std::invalid_argument("Matrix: dimension mismatch in product");
        Matrix m(r_, o.c_, zero_like());
        for (std::size_t i = 0; i < r_; ++i)
            for (std::size_t k = 0; k < c_; ++k) {
                const T& x = (*this)(i, k);
                if (is_zero_value(x)) continue;
                for (std::size_t j = 0; j < o.c_; ++j) m(i, j) += x * o(k, j);
            }
        return m;
    }

    Matrix operator+(const Matrix& o) const {
        check_same(o);
        Matrix m = *this;
        for (std::size_t i = 0; i < a_.size(); ++i) m.a_[i] += o.a_[i];
        return m;
    }

    Matrix operator-(const Matrix& o) const {
        check_same(o);
        Matrix m = *this;
        for (std::size_t i = 0; i < a_.size(); ++i) m.a_[i] -= o.a_[i];
        return m;
    }

    Matrix scaled(const T& s) const {
        Matrix m = *this;
        for (auto& x : m.a_) x = s * x;
        return m;
    }

    Matrix transpose() const {
        Matrix m(c_, r_, zero_like());
        for (std::size_t i = 0; i < r_; ++i)
            for (std::size_t j = 0; j < c_; ++j) m(j, i) = (*this)(i, j);
        return m;
    }

    std::vector<T> apply(const std::vector<T>& v) const {
        if (v.size() != c_) throw std::invalid_argument("Matrix: vector length mismatch");
        std::vector<T> out(r_, zero_like());
        for (std::size_t i = 0; i < r_; ++i)
            for (std::size_t j = 0; j < c_; ++j) out[i] += (*this)(i, j) * v[j];
        return out;
    }

    bool operator==(const Matrix& o) const { return r_ == o.r_ && c_ == o.c_ && a_ == o.a_; }
    bool operator!=(const Matrix& o) const { return !(*this == o); }

    bool is_zero() const {
        for (const auto& x : a_)
            if (!is_zero_value(x)) return false;
        return true;
    }

    const std::vector<T>& data() const { return a_; }

private:
    std::size_t r_ = 0, c_ = 0;
    std::vector<T> a_;

    static T zero_like() { return T(); }
    static bool is_zero_value(const T& x) { return is_zero_elem(x); }
    void check_same(const Matrix& o) const {
        if (r_ != o.r_ || c_ != o.c_) throw std::invalid_argument("Matrix: dimension mismatch");
    }
};

template <class T>
Matrix<T> kron(const Matrix<T>& A, const Matrix<T>& B) {
    Matrix<T> m(A.rows() * B.rows(), A.cols() * B.cols(), T());
    for (std::size_t i = 0; i < A.rows(); ++i)
        for (std::size_t j = 0; j < A.cols(); ++j)
            for (std::size_t k = 0; k < B.rows(); ++k)
                for (std::size_t l = 0; l < B.cols(); ++l)
                    m(i * B.rows() + k, j * B.cols() + l) = A(i, j) * B(k, l);
    return m;
}

}  // namespace bianchi
