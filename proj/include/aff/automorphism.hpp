#pragma once

#include <cstdint>
#include <string>

#include "aff/linalg.hpp"
#include "aff/metric.hpp"

namespace aff {

enum class AutomorphismKind { matrix, matrix_power, shearlet, gabor_shift };

/// Dual automorphism acting on frequency points. Every supported kind is
/// linear, so it is stored as a matrix together with its inverse; the
/// parameters of the named kinds are kept for reporting and closed forms.
class Automorphism {
public:
    static Automorphism matrix(const Matrix& m);
    static Automorphism matrix_power(const Matrix& base, long exponent);
    /// A_a S_s realized as [[a, 0], [s*sqrt(a), sqrt(a)]].
    static Automorphism shearlet(double a, double s);
    /// (xi, k) -> (xi - k p, k) on the Gabor group.
    static Automorphism gabor_shift(double p);
    static Automorphism identity(int dim);

    AutomorphismKind kind() const { return kind_; }
    int dim() const { return m_.rows(); }
    const Matrix& forward() const { return m_; }
    const Matrix& backward() const { return inv_; }

    Vec apply(const Vec& xi) const { return m_.apply(xi); }
    Vec inverse_apply(const Vec& xi) const { return inv_.apply(xi); }
    Automorphism inverse() const;

    /// delta(h) = |det| of the linear realization (1 for gabor_shift).
    double jacobian() const { return jacobian_; }

    // Named-kind parameters (zero when not applicable).
    double shear_a() const { return a_; }
    double shear_s() const { return s_; }
    double shift_p() const { return p_; }
    long exponent() const { return exponent_; }

    std::string describe() const;

private:
    AutomorphismKind kind_ = AutomorphismKind::matrix;
    Matrix m_, inv_;
    double jacobian_ = 1.0;
    double a_ = 0.0, s_ = 0.0, p_ = 0.0;
    long exponent_ = 1;
};

enum class LipschitzMethod { closed_form, numerical_oracle };
const char* to_string(LipschitzMethod m);

struct LipschitzConstants {
    double lower = 0.0;  ///< l(h)
    double upper = 0.0;  ///< L(h)
    LipschitzMethod method = LipschitzMethod::closed_form;
};

struct OracleOptions {
    int directions = 100000;
    std::uint64_t seed = 0x5eed0acc1e;
    /// Pattern-search refinement from the best sampled directions. Refinement
    /// only ever moves the extremes outward, so the result stays an inner
    /// approximation of (l, L).
    bool refine = true;
};

/// Closed forms where available (see README), otherwise the sampling oracle.
/// Throws InputError when metric and automorphism dimensions disagree, or when
/// a matrix does not preserve the integer coordinate of the Gabor group.
LipschitzConstants lipschitz_constants(const Automorphism& alpha, const MetricSpace& metric);

/// max / min of d(alpha xi, e) / d(xi, e) over a dense direction sample.
LipschitzConstants lipschitz_oracle(const Automorphism& alpha, const MetricSpace& metric,
                                    const OracleOptions& opts = {});

/// (a[(a+s^2+1) - sqrt(.)], a[(a+s^2+1) + sqrt(.)]): twice the eigenvalues of
/// the Gram matrix of the shearlet matrix. Reported next to the l2 constants,
/// which are the square roots of those eigenvalues.
std::pair<double, double> shearlet_doubled_gram_eigenvalues(double a, double s);

}  // namespace aff
