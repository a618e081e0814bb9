#pragma once

// Small dense linear algebra for dimensions up to kMaxDim. Everything here is
// self-contained: one-sided Jacobi SVD for singular values and null spaces,
// complex shifted-QR for eigenvalues of general real matrices.

#include <array>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include "aff/error.hpp"

namespace aff {

inline constexpr int kMaxDim = 8;

/// Fixed-capacity point/vector in R^n, n <= kMaxDim. No heap allocation.
class Vec {
public:
    Vec() = default;
    explicit Vec(int n, double fill = 0.0) : n_(n) {
        require(n >= 0 && n <= kMaxDim, "Vec: dimension out of range");
        v_.fill(0.0);
        for (int i = 0; i < n; ++i) v_[i] = fill;
    }
    Vec(std::initializer_list<double> xs) : n_(static_cast<int>(xs.size())) {
        require(n_ <= kMaxDim, "Vec: dimension out of range");
        int i = 0;
        for (double x : xs) v_[i++] = x;
    }
    static Vec from(const std::vector<double>& xs) {
        Vec v(static_cast<int>(xs.size()));
        for (int i = 0; i < v.n_; ++i) v.v_[i] = xs[i];
        return v;
    }

    int dim() const { return n_; }
    double& operator[](int i) { return v_[i]; }
    double operator[](int i) const { return v_[i]; }
    const double* begin() const { return v_.data(); }
    const double* end() const { return v_.data() + n_; }
    std::vector<double> to_vector() const { return {begin(), end()}; }

    Vec& operator+=(const Vec& o) {
        for (int i = 0; i < n_; ++i) v_[i] += o.v_[i];
        return *this;
    }
    Vec& operator-=(const Vec& o) {
        for (int i = 0; i < n_; ++i) v_[i] -= o.v_[i];
        return *this;
    }
    Vec& operator*=(double s) {
        for (int i = 0; i < n_; ++i) v_[i] *= s;
        return *this;
    }
    friend Vec operator+(Vec a, const Vec& b) { return a += b; }
    friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
    friend Vec operator*(double s, Vec a) { return a *= s; }
    friend Vec operator-(Vec a) { return a *= -1.0; }
    friend bool operator==(const Vec& a, const Vec& b) {
        if (a.n_ != b.n_) return false;
        for (int i = 0; i < a.n_; ++i)
            if (a.v_[i] != b.v_[i]) return false;
        return true;
    }

    double norm2() const;
    double norm_inf() const;
    std::string str() const;

private:
    std::array<double, kMaxDim> v_{};
    int n_ = 0;
};

/// Dense row-major matrix. Square matrices of size <= kMaxDim are the common
/// case; the SVD routines accept any shape.
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols, double fill = 0.0)
        : r_(rows), c_(cols), a_(static_cast<std::size_t>(rows) * cols, fill) {}
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(int n);
    static Matrix diag(const std::vector<double>& d);
    static Matrix from_row_major(int n, const std::vector<double>& xs);

    int rows() const { return r_; }
    int cols() const { return c_; }
    bool square() const { return r_ == c_; }
    double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * c_ + j]; }
    double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * c_ + j]; }
    const std::vector<double>& data() const { return a_; }

    Vec apply(const Vec& x) const;
    Matrix transpose() const;
    friend Matrix operator*(const Matrix& a, const Matrix& b);
    friend Matrix operator-(const Matrix& a, const Matrix& b);
    friend bool operator==(const Matrix& a, const Matrix& b) {
        return a.r_ == b.r_ && a.c_ == b.c_ && a.a_ == b.a_;
    }

    double norm_inf() const;  ///< max absolute row sum
    double max_abs() const;
    bool is_diagonal() const;

private:
    int r_ = 0, c_ = 0;
    std::vector<double> a_;
};

double determinant(const Matrix& a);
/// Throws InputError when the matrix is singular to working precision.
Matrix inverse(const Matrix& a);
Matrix matrix_power(const Matrix& a, long exponent);

struct SvdResult {
    std::vector<double> sigma;  ///< descending
    Matrix v;                   ///< right singular vectors as columns
    int sweeps = 0;
};

/// One-sided Jacobi SVD. Tolerance 1e-12 on column orthogonality, at most
/// max_sweeps sweeps.
SvdResult jacobi_svd(const Matrix& a, double tol = 1e-12, int max_sweeps = 200);
std::vector<double> singular_values(const Matrix& a);

/// Orthonormal basis (as columns) of the right null space: singular vectors
/// whose singular value is <= rel_tol * sigma_max.
Matrix null_space(const Matrix& a, double rel_tol);
/// The k right singular vectors with the smallest singular values.
Matrix smallest_singular_vectors(const Matrix& a, int k);

using cplx = std::complex<double>;
using CMatrix = std::vector<std::vector<cplx>>;

/// Eigenvalues of a general real square matrix via Hessenberg reduction and
/// Wilkinson-shifted complex QR with deflation.
std::vector<cplx> eigenvalues(const Matrix& a);

/// Real 2n x 2n embedding [[Re, -Im], [Im, Re]] of (A - lambda I). Its rank is
/// twice the complex rank of A - lambda I.
Matrix real_embedding_shifted(const Matrix& a, cplx lambda);

}  // namespace aff
