#include "aff/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace aff {

double Vec::norm2() const {
    double s = 0.0;
    for (int i = 0; i < n_; ++i) s += v_[i] * v_[i];
    return std::sqrt(s);
}

double Vec::norm_inf() const {
    double m = 0.0;
    for (int i = 0; i < n_; ++i) m = std::max(m, std::abs(v_[i]));
    return m;
}

std::string Vec::str() const {
    std::ostringstream os;
    os.precision(17);
    os << '(';
    for (int i = 0; i < n_; ++i) os << (i ? ", " : "") << v_[i];
    os << ')';
    return os.str();
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    r_ = static_cast<int>(rows.size());
    c_ = r_ ? static_cast<int>(rows.begin()->size()) : 0;
    for (const auto& row : rows) {
        require(static_cast<int>(row.size()) == c_, "Matrix: ragged initializer");
        a_.insert(a_.end(), row.begin(), row.end());
    }
}

Matrix Matrix::identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::diag(const std::vector<double>& d) {
    const int n = static_cast<int>(d.size());
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = d[i];
    return m;
}

Matrix Matrix::from_row_major(int n, const std::vector<double>& xs) {
    require(n > 0 && static_cast<int>(xs.size()) == n * n,
            "matrix needs " + std::to_string(n * n) + " row-major entries, got " +
                std::to_string(xs.size()));
    Matrix m(n, n);
    for (int i = 0; i < n * n; ++i) m.a_[i] = xs[i];
    return m;
}

Vec Matrix::apply(const Vec& x) const {
    Vec y(r_);
    for (int i = 0; i < r_; ++i) {
        double s = 0.0;
        const double* row = &a_[static_cast<std::size_t>(i) * c_];
        for (int j = 0; j < c_; ++j) s += row[j] * x[j];
        y[i] = s;
    }
    return y;
}

Matrix Matrix::transpose() const {
    Matrix t(c_, r_);
    for (int i = 0; i < r_; ++i)
        for (int j = 0; j < c_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
    require(a.c_ == b.r_, "matrix product: shape mismatch");
    Matrix m(a.r_, b.c_);
    for (int i = 0; i < a.r_; ++i)
        for (int k = 0; k < a.c_; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < b.c_; ++j) m(i, j) += aik * b(k, j);
        }
    return m;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
    require(a.r_ == b.r_ && a.c_ == b.c_, "matrix difference: shape mismatch");
    Matrix m = a;
    for (std::size_t i = 0; i < m.a_.size(); ++i) m.a_[i] -= b.a_[i];
    return m;
}

double Matrix::norm_inf() const {
    double m = 0.0;
    for (int i = 0; i < r_; ++i) {
        double s = 0.0;
        for (int j = 0; j < c_; ++j) s += std::abs((*this)(i, j));
        m = std::max(m, s);
    }
    return m;
}

double Matrix::max_abs() const {
    double m = 0.0;
    for (double x : a_) m = std::max(m, std::abs(x));
    return m;
}

bool Matrix::is_diagonal() const {
    for (int i = 0; i < r_; ++i)
        for (int j = 0; j < c_; ++j)
            if (i != j && (*this)(i, j) != 0.0) return false;
    return true;
}

namespace {

// LU with partial pivoting; returns false when a pivot vanishes.
bool lu_decompose(Matrix& a, std::vector<int>& perm, int& sign) {
    const int n = a.rows();
    perm.resize(n);
    std::iota(perm.begin(), perm.end(), 0);
    sign = 1;
    const double scale = std::max(a.max_abs(), 1e-300);
    for (int k = 0; k < n; ++k) {
        int p = k;
        for (int i = k + 1; i < n; ++i)
            if (std::abs(a(i, k)) > std::abs(a(p, k))) p = i;
        if (std::abs(a(p, k)) <= 1e-14 * scale) return false;
        if (p != k) {
            for (int j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
            std::swap(perm[k], perm[p]);
            sign = -sign;
        }
        for (int i = k + 1; i < n; ++i) {
            a(i, k) /= a(k, k);
            for (int j = k + 1; j < n; ++j) a(i, j) -= a(i, k) * a(k, j);
        }
    }
    return true;
}

}  // namespace

double determinant(const Matrix& a) {
    require(a.square(), "determinant: matrix must be square");
    Matrix lu = a;
    std::vector<int> perm;
    int sign = 1;
    if (!lu_decompose(lu, perm, sign)) return 0.0;
    double d = sign;
    for (int i = 0; i < a.rows(); ++i) d *= lu(i, i);
    return d;
}

Matrix inverse(const Matrix& a) {
    require(a.square(), "inverse: matrix must be square");
    const int n = a.rows();
    if (n == 1) {
        require(a(0, 0) != 0.0, "inverse: singular matrix");
        return Matrix{{1.0 / a(0, 0)}};
    }
    if (a.is_diagonal()) {
        Matrix inv(n, n);
        for (int i = 0; i < n; ++i) {
            require(a(i, i) != 0.0, "inverse: singular matrix");
            inv(i, i) = 1.0 / a(i, i);
        }
        return inv;
    }
    Matrix lu = a;
    std::vector<int> perm;
    int sign = 1;
    if (!lu_decompose(lu, perm, sign)) throw InputError("inverse: singular matrix");
    Matrix inv(n, n);
    for (int col = 0; col < n; ++col) {
        std::vector<double> x(n);
        for (int i = 0; i < n; ++i) x[i] = perm[i] == col ? 1.0 : 0.0;
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < i; ++k) x[i] -= lu(i, k) * x[k];
        for (int i = n - 1; i >= 0; --i) {
            for (int k = i + 1; k < n; ++k) x[i] -= lu(i, k) * x[k];
            x[i] /= lu(i, i);
        }
        for (int i = 0; i < n; ++i) inv(i, col) = x[i];
    }
    return inv;
}

Matrix matrix_power(const Matrix& a, long exponent) {
    require(a.square(), "matrix_power: matrix must be square");
    Matrix base = exponent < 0 ? inverse(a) : a;
    unsigned long e = exponent < 0 ? static_cast<unsigned long>(-exponent)
                                   : static_cast<unsigned long>(exponent);
    Matrix result = Matrix::identity(a.rows());
    while (e) {
        if (e & 1UL) result = result * base;
        e >>= 1;
        if (e) base = base * base;
    }
    return result;
}

SvdResult jacobi_svd(const Matrix& a, double tol, int max_sweeps) {
    // Work on columns of U = A V; rotate pairs of columns until mutually
    // orthogonal. Singular values are the final column norms.
    const int m = a.rows(), n = a.cols();
    Matrix u = a;
    Matrix v = Matrix::identity(n);
    int sweep = 0;
    for (; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        for (int p = 0; p < n - 1; ++p)
            for (int q = p + 1; q < n; ++q) {
                double app = 0.0, aqq = 0.0, apq = 0.0;
                for (int i = 0; i < m; ++i) {
                    app += u(i, p) * u(i, p);
                    aqq += u(i, q) * u(i, q);
                    apq += u(i, p) * u(i, q);
                }
                if (apq == 0.0 || std::abs(apq) <= tol * std::sqrt(app * aqq)) continue;
                rotated = true;
                const double zeta = (aqq - app) / (2.0 * apq);
                const double t = (zeta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (int i = 0; i < m; ++i) {
                    const double up = u(i, p), uq = u(i, q);
                    u(i, p) = c * up - s * uq;
                    u(i, q) = s * up + c * uq;
                }
                for (int i = 0; i < n; ++i) {
                    const double vp = v(i, p), vq = v(i, q);
                    v(i, p) = c * vp - s * vq;
                    v(i, q) = s * vp + c * vq;
                }
            }
        if (!rotated) break;
    }
    std::vector<double> sigma(n);
    for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int i = 0; i < m; ++i) s += u(i, j) * u(i, j);
        sigma[j] = std::sqrt(s);
    }
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int x, int y) { return sigma[x] > sigma[y]; });
    SvdResult res;
    res.sigma.resize(n);
    res.v = Matrix(n, n);
    for (int k = 0; k < n; ++k) {
        res.sigma[k] = sigma[order[k]];
        for (int i = 0; i < n; ++i) res.v(i, k) = v(i, order[k]);
    }
    res.sweeps = sweep;
    return res;
}

std::vector<double> singular_values(const Matrix& a) {
    // For wide matrices use the transpose so columns >= rows is never needed.
    if (a.cols() > a.rows()) return jacobi_svd(a.transpose()).sigma;
    return jacobi_svd(a).sigma;
}

Matrix null_space(const Matrix& a, double rel_tol) {
    SvdResult s = jacobi_svd(a);
    const int n = a.cols();
    const double smax = s.sigma.empty() ? 0.0 : s.sigma.front();
    std::vector<int> cols;
    for (int k = 0; k < n; ++k)
        if (s.sigma[k] <= rel_tol * smax || smax == 0.0) cols.push_back(k);
    Matrix ns(n, static_cast<int>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c)
        for (int i = 0; i < n; ++i) ns(i, static_cast<int>(c)) = s.v(i, cols[c]);
    return ns;
}

Matrix smallest_singular_vectors(const Matrix& a, int k) {
    SvdResult s = jacobi_svd(a);
    const int n = a.cols();
    require(k >= 0 && k <= n, "smallest_singular_vectors: bad k");
    Matrix out(n, k);
    for (int c = 0; c < k; ++c)
        for (int i = 0; i < n; ++i) out(i, c) = s.v(i, n - k + c);
    return out;
}

namespace {

void givens(cplx a, cplx b, cplx& c, cplx& s) {
    // Find unitary [[c, s], [-conj(s), conj(c)]] zeroing b.
    const double na = std::abs(a), nb = std::abs(b);
    if (nb == 0.0) {
        c = 1.0;
        s = 0.0;
        return;
    }
    const double r = std::hypot(na, nb);
    if (na == 0.0) {
        c = 0.0;
        s = std::conj(b) / nb;
        return;
    }
    c = na / r;
    s = (a / na) * std::conj(b) / r;
}

}  // namespace

std::vector<cplx> eigenvalues(const Matrix& a) {
    require(a.square(), "eigenvalues: matrix must be square");
    const int n = a.rows();
    CMatrix h(n, std::vector<cplx>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) h[i][j] = a(i, j);
    if (n == 1) return {h[0][0]};

    // Hessenberg reduction by Givens similarity transforms.
    for (int k = 0; k < n - 2; ++k)
        for (int i = k + 2; i < n; ++i) {
            cplx c, s;
            givens(h[k + 1][k], h[i][k], c, s);
            for (int j = 0; j < n; ++j) {
                const cplx x = h[k + 1][j], y = h[i][j];
                h[k + 1][j] = c * x + s * y;
                h[i][j] = -std::conj(s) * x + std::conj(c) * y;
            }
            for (int j = 0; j < n; ++j) {
                const cplx x = h[j][k + 1], y = h[j][i];
                h[j][k + 1] = x * std::conj(c) + y * std::conj(s);
                h[j][i] = -x * s + y * c;
            }
        }

    std::vector<cplx> eig(n);
    const double eps = 1e-15;
    int hi = n - 1;
    int iter = 0;
    while (hi >= 0) {
        if (hi == 0) {
            eig[0] = h[0][0];
            break;
        }
        // Deflation check on the active block [lo, hi].
        int lo = hi;
        while (lo > 0) {
            const double scale = std::abs(h[lo][lo]) + std::abs(h[lo - 1][lo - 1]);
            if (std::abs(h[lo][lo - 1]) <= eps * std::max(scale, 1e-300)) {
                h[lo][lo - 1] = 0.0;
                break;
            }
            --lo;
        }
        if (lo == hi) {
            eig[hi] = h[hi][hi];
            --hi;
            iter = 0;
            continue;
        }
        if (++iter > 1000) throw ResourceError("eigenvalues: QR iteration did not converge");

        // Wilkinson shift from the trailing 2x2 block; exceptional shift
        // every 11 iterations to break cycles.
        cplx mu;
        if (iter % 11 == 0) {
            mu = h[hi][hi] + std::abs(h[hi][hi - 1]) * 0.75;
        } else {
            const cplx p = h[hi - 1][hi - 1], q = h[hi - 1][hi], r = h[hi][hi - 1],
                       t = h[hi][hi];
            const cplx tr = p + t, det = p * t - q * r;
            const cplx disc = std::sqrt(tr * tr * 0.25 - det);
            const cplx m1 = tr * 0.5 + disc, m2 = tr * 0.5 - disc;
            mu = std::abs(m1 - t) < std::abs(m2 - t) ? m1 : m2;
        }
        for (int i = lo; i <= hi; ++i) h[i][i] -= mu;
        std::vector<cplx> cs(hi - lo), ss(hi - lo);
        for (int k = lo; k < hi; ++k) {
            cplx c, s;
            givens(h[k][k], h[k + 1][k], c, s);
            cs[k - lo] = c;
            ss[k - lo] = s;
            for (int j = k; j < n; ++j) {
                const cplx x = h[k][j], y = h[k + 1][j];
                h[k][j] = c * x + s * y;
                h[k + 1][j] = -std::conj(s) * x + std::conj(c) * y;
            }
        }
        for (int k = lo; k < hi; ++k) {
            const cplx c = cs[k - lo], s = ss[k - lo];
            for (int i = 0; i <= std::min(k + 2, hi); ++i) {
                const cplx x = h[i][k], y = h[i][k + 1];
                h[i][k] = x * std::conj(c) + y * std::conj(s);
                h[i][k + 1] = -x * s + y * c;
            }
        }
        for (int i = lo; i <= hi; ++i) h[i][i] += mu;
    }
    return eig;
}

Matrix real_embedding_shifted(const Matrix& a, cplx lambda) {
    require(a.square(), "real_embedding_shifted: matrix must be square");
    const int n = a.rows();
    Matrix e(2 * n, 2 * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double re = a(i, j) - (i == j ? lambda.real() : 0.0);
            const double im = i == j ? -lambda.imag() : 0.0;
            e(i, j) = re;
            e(i, j + n) = -im;
            e(i + n, j) = im;
            e(i + n, j + n) = re;
        }
    return e;
}

}  // namespace aff
