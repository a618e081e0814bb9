#include "aff/automorphism.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "aff/numerics.hpp"

namespace aff {

Automorphism Automorphism::matrix(const Matrix& m) {
    require(m.square() && m.rows() >= 1 && m.rows() <= kMaxDim, "automorphism: matrix must be square, dim <= 8");
    Automorphism h;
    h.kind_ = AutomorphismKind::matrix;
    h.m_ = m;
    h.inv_ = aff::inverse(m);  // throws on singular input
    h.jacobian_ = std::abs(determinant(m));
    require(h.jacobian_ > 0.0 && std::isfinite(h.jacobian_), "automorphism: singular matrix");
    return h;
}

Automorphism Automorphism::matrix_power(const Matrix& base, long exponent) {
    require(base.square() && base.rows() >= 1 && base.rows() <= kMaxDim,
            "automorphism: matrix must be square, dim <= 8");
    Automorphism h;
    h.kind_ = AutomorphismKind::matrix_power;
    const Matrix base_inv = aff::inverse(base);
    h.m_ = exponent >= 0 ? aff::matrix_power(base, exponent) : aff::matrix_power(base_inv, -exponent);
    h.inv_ = exponent >= 0 ? aff::matrix_power(base_inv, exponent) : aff::matrix_power(base, -exponent);
    h.jacobian_ = std::pow(std::abs(determinant(base)), static_cast<double>(exponent));
    require(h.jacobian_ > 0.0 && std::isfinite(h.jacobian_), "automorphism: power overflows");
    h.exponent_ = exponent;
    return h;
}

Automorphism Automorphism::shearlet(double a, double s) {
    require(a > 0.0 && std::isfinite(a) && std::isfinite(s), "shearlet: need a > 0 and finite s");
    const double ra = std::sqrt(a);
    Automorphism h;
    h.kind_ = AutomorphismKind::shearlet;
    h.m_ = Matrix{{a, 0.0}, {s * ra, ra}};
    h.inv_ = Matrix{{1.0 / a, 0.0}, {-s / a, 1.0 / ra}};
    h.jacobian_ = a * ra;
    h.a_ = a;
    h.s_ = s;
    return h;
}

Automorphism Automorphism::gabor_shift(double p) {
    require(std::isfinite(p), "gabor_shift: non-finite p");
    Automorphism h;
    h.kind_ = AutomorphismKind::gabor_shift;
    h.m_ = Matrix{{1.0, -p}, {0.0, 1.0}};
    h.inv_ = Matrix{{1.0, p}, {0.0, 1.0}};
    h.jacobian_ = 1.0;
    h.p_ = p;
    return h;
}

Automorphism Automorphism::identity(int dim) { return matrix(Matrix::identity(dim)); }

Automorphism Automorphism::inverse() const {
    Automorphism h = *this;
    std::swap(h.m_, h.inv_);
    h.jacobian_ = 1.0 / jacobian_;
    h.kind_ = AutomorphismKind::matrix;
    return h;
}

std::string Automorphism::describe() const {
    std::ostringstream os;
    os.precision(12);
    switch (kind_) {
        case AutomorphismKind::shearlet: os << "shearlet(a=" << a_ << ", s=" << s_ << ")"; break;
        case AutomorphismKind::gabor_shift: os << "gabor_shift(p=" << p_ << ")"; break;
        case AutomorphismKind::matrix_power: os << "matrix_power(j=" << exponent_ << ")"; break;
        case AutomorphismKind::matrix: {
            os << "matrix[";
            for (int i = 0; i < m_.rows(); ++i)
                for (int j = 0; j < m_.cols(); ++j) os << (i || j ? "," : "") << m_(i, j);
            os << "]";
            break;
        }
    }
    return os.str();
}

const char* to_string(LipschitzMethod m) {
    return m == LipschitzMethod::closed_form ? "closed_form" : "numerical_oracle";
}

std::pair<double, double> shearlet_doubled_gram_eigenvalues(double a, double s) {
    const double t = a + s * s + 1.0;
    const double root = std::sqrt(t * t - 4.0 * a);
    return {a * (t - root), a * (t + root)};
}

namespace {

void check_compatible(const Automorphism& alpha, const MetricSpace& metric) {
    if (alpha.dim() != metric.point_dim())
        throw InputError("automorphism of dimension " + std::to_string(alpha.dim()) +
                         " is incompatible with the " + metric.name() + " metric of dimension " +
                         std::to_string(metric.point_dim()));
    if (metric.is_gabor()) {
        const Matrix& m = alpha.forward();
        if (m(1, 0) != 0.0 || std::abs(m(1, 1)) != 1.0)
            throw InputError("automorphism does not preserve the integer coordinate of the gabor group");
    }
}

struct Extremes {
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    Vec arg_lo, arg_hi;
};

// Local pattern search on the metric unit sphere; moves only to strictly
// better directions, so each accepted value is itself a sampled ratio.
double refine_direction(const Matrix& m, const MetricSpace& metric, Vec x, bool maximize) {
    auto ratio = [&](const Vec& v) { return metric.norm(m.apply(v)) / metric.norm(v); };
    auto better = [&](double a, double b) { return maximize ? a > b : a < b; };
    double best = ratio(x);
    const int n = x.dim();
    for (double h = 1e-2; h > 1e-13; h *= 0.25) {
        for (int iter = 0; iter < 200; ++iter) {
            bool moved = false;
            for (int i = 0; i < n; ++i)
                for (double sgn : {1.0, -1.0}) {
                    Vec y = x;
                    y[i] += sgn * h * std::max(1.0, std::abs(x[i]));
                    const double ny = metric.norm(y);
                    if (ny == 0.0) continue;
                    y *= 1.0 / ny;
                    const double v = ratio(y);
                    if (better(v, best)) {
                        best = v;
                        x = y;
                        moved = true;
                    }
                }
            if (!moved) break;
        }
    }
    return best;
}

void consider(Extremes& e, const Matrix& m, const MetricSpace& metric, const Vec& x) {
    const double nx = metric.norm(x);
    if (nx == 0.0) return;
    const double r = metric.norm(m.apply(x)) / nx;
    if (r > e.hi) {
        e.hi = r;
        e.arg_hi = x;
    }
    if (r < e.lo) {
        e.lo = r;
        e.arg_lo = x;
    }
}

Extremes sample_extremes(const Matrix& m, const MetricSpace& metric, int count, const OracleOptions& opts) {
    const int n = metric.point_dim();
    Extremes e;
    const bool linf = metric.kind() == MetricKind::euclidean_linf;
    if (n == 2 && !linf) {
        // Half circle suffices: the ratio is even in x.
        for (int i = 0; i < count; ++i) {
            const double th = std::numbers::pi * i / count;
            consider(e, m, metric, Vec{std::cos(th), std::sin(th)});
        }
    } else if (n == 2 && linf) {
        // Half of the unit square's boundary, corners included.
        for (int i = 0; i < count; ++i) {
            const double t = 4.0 * i / count;
            const Vec x = t < 2.0 ? Vec{1.0, t - 1.0} : Vec{1.0 - (t - 2.0), 1.0};
            consider(e, m, metric, x);
        }
    } else {
        Rng rng(opts.seed);
        if (linf) {
            for (long v = 0; v < (1L << n); ++v) {
                Vec x(n);
                for (int i = 0; i < n; ++i) x[i] = (v >> i) & 1 ? 1.0 : -1.0;
                consider(e, m, metric, x);
            }
            for (int i = 0; i < count; ++i) {
                Vec x(n);
                for (int k = 0; k < n; ++k) x[k] = rng.uniform(-1.0, 1.0);
                x[static_cast<int>(rng.integer(0, n - 1))] = rng.uniform() < 0.5 ? -1.0 : 1.0;
                consider(e, m, metric, x);
            }
        } else if (n == 3) {
            // Fibonacci sphere.
            const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
            for (int i = 0; i < count; ++i) {
                const double z = 1.0 - 2.0 * (i + 0.5) / count;
                const double rad = std::sqrt(1.0 - z * z);
                consider(e, m, metric, Vec{rad * std::cos(golden * i), rad * std::sin(golden * i), z});
            }
        } else {
            for (int i = 0; i < count; ++i) {
                Vec x(n);
                for (int k = 0; k < n; ++k) x[k] = rng.normal();
                consider(e, m, metric, x);
            }
        }
    }
    if (opts.refine) {
        e.hi = std::max(e.hi, refine_direction(m, metric, (1.0 / metric.norm(e.arg_hi)) * e.arg_hi, true));
        e.lo = std::min(e.lo, refine_direction(m, metric, (1.0 / metric.norm(e.arg_lo)) * e.arg_lo, false));
    }
    return e;
}

}  // namespace

LipschitzConstants lipschitz_oracle(const Automorphism& alpha, const MetricSpace& metric,
                                    const OracleOptions& opts) {
    check_compatible(alpha, metric);
    require(opts.directions >= 16, "oracle: need at least 16 directions");
    const Matrix& m = alpha.forward();
    const int n = metric.point_dim();
    const int count = opts.directions;
    Extremes e;

    if (metric.is_gabor()) {
        // Not homogeneous: sample xi on a grid per modulation slice.
        const int slices = 7;
        const int per = count / slices;
        for (int k = -3; k <= 3; ++k)
            for (int i = 0; i < per; ++i) {
                const double xi = -10.0 + 20.0 * i / (per - 1);
                consider(e, m, metric, Vec{xi, static_cast<double>(k)});
            }
        // Shrinking-step search along xi from the best samples.
        for (bool maximize : {true, false}) {
            Vec x = maximize ? e.arg_hi : e.arg_lo;
            double best = metric.norm(m.apply(x)) / metric.norm(x);
            for (double h = 20.0 / per; h > 1e-14; h *= 0.5)
                for (int iter = 0; iter < 64; ++iter) {
                    bool moved = false;
                    for (double sgn : {1.0, -1.0}) {
                        Vec y = x;
                        y[0] += sgn * h;
                        if (metric.norm(y) == 0.0) continue;
                        const double v = metric.norm(m.apply(y)) / metric.norm(y);
                        if (maximize ? v > best : v < best) {
                            best = v;
                            x = y;
                            moved = true;
                        }
                    }
                    if (!moved) break;
                }
            (maximize ? e.hi : e.lo) = best;
        }
        return {e.lo, e.hi, LipschitzMethod::numerical_oracle};
    }

    if (n == 1) {
        consider(e, m, metric, Vec{1.0});
        return {e.lo, e.hi, LipschitzMethod::numerical_oracle};
    }

    // Sample both sides: every image direction y gives the ratio realised by
    // x = alpha^-1 y. The linf minimiser sits at a cube vertex on the image
    // side, where the direct search stalls on a kink.
    const Extremes fwd = sample_extremes(m, metric, count, opts);
    const Extremes bwd = sample_extremes(alpha.backward(), metric, count, opts);
    e.lo = std::min(fwd.lo, 1.0 / bwd.hi);
    e.hi = std::max(fwd.hi, 1.0 / bwd.lo);
    return {e.lo, e.hi, LipschitzMethod::numerical_oracle};
}

LipschitzConstants lipschitz_constants(const Automorphism& alpha, const MetricSpace& metric) {
    check_compatible(alpha, metric);
    switch (metric.kind()) {
        case MetricKind::gabor_product:
            if (alpha.kind() == AutomorphismKind::gabor_shift) {
                const double q = 1.0 + std::abs(alpha.shift_p());
                return {1.0 / q, q, LipschitzMethod::closed_form};
            }
            return lipschitz_oracle(alpha, metric);
        case MetricKind::euclidean_linf:
            return {1.0 / alpha.backward().norm_inf(), alpha.forward().norm_inf(),
                    LipschitzMethod::closed_form};
        case MetricKind::euclidean_l2: {
            if (alpha.kind() == AutomorphismKind::shearlet) {
                const auto [lo2, hi2] = shearlet_doubled_gram_eigenvalues(alpha.shear_a(), alpha.shear_s());
                (void)lo2;
                const double upper = std::sqrt(0.5 * hi2);
                // The small root via the determinant avoids cancellation.
                return {alpha.jacobian() / upper, upper, LipschitzMethod::closed_form};
            }
            const std::vector<double> sv = singular_values(alpha.forward());
            return {sv.back(), sv.front(), LipschitzMethod::closed_form};
        }
    }
    return {};
}

}  // namespace aff
