#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "aff/automorphism.hpp"
#include "aff/linalg.hpp"
#include "aff/metric.hpp"
#include "aff/profile.hpp"

namespace aff {

/// Full-rank annihilator lattice basis * Z^n, fundamental domain the half-open
/// parallelepiped basis * [0,1)^n. The Gabor variant is a one-dimensional
/// lattice crossed with {0} in the modulation coordinate; its fundamental
/// domain is [0, b) x Z.
class Lattice {
public:
    /// Columns of `basis` generate the lattice.
    static Lattice from_basis(const Matrix& basis);
    static Lattice integer(int dim);
    /// Annihilator of the spatial lattice B Z^n under <xi, x> = exp(2 pi i xi.x):
    /// B^{-T} Z^n.
    static Lattice annihilator_of(const Matrix& spatial_basis);
    static Lattice gabor(double spacing);

    bool is_gabor() const { return gabor_; }
    /// Point dimension (2 for the Gabor group).
    int dim() const { return gabor_ ? 2 : rank(); }
    /// Number of generators.
    int rank() const { return basis_.rows(); }
    const Matrix& basis() const { return basis_; }
    const Matrix& inverse_basis() const { return inv_; }
    /// |det(basis)|; for the Gabor lattice the measure of one slice of Omega.
    double covolume() const { return covolume_; }

    Vec point(std::span<const long> m) const;
    /// Real lattice coordinates basis^{-1} xi of the continuous part.
    Vec coordinates(const Vec& xi) const;
    /// Omega point for unit-cube coordinates u (continuous part only; the
    /// modulation coordinate, if any, is set to k).
    Vec omega_point(std::span<const double> u, double k = 0.0) const;

    struct Reduction {
        std::vector<long> m;
        Vec lambda;
        Vec remainder;  ///< xi - lambda, inside Omega
    };
    /// The unique lattice point lambda with xi - lambda in Omega.
    Reduction reduce(const Vec& xi) const;
    bool in_fundamental_domain(const Vec& xi) const;

    /// Integer coordinate ranges [lo_i, hi_i] containing every m whose
    /// coordinates lie within `halfwidth` of `center` (both in lattice
    /// coordinates). Conservative by one unit of rounding slack.
    static std::vector<std::pair<long, long>> integer_ranges(const Vec& center, const Vec& halfwidth);

    /// Number of integer points in a range list (saturating at 2^62).
    static long range_volume(const std::vector<std::pair<long, long>>& ranges);

private:
    Matrix basis_, inv_;
    double covolume_ = 1.0;
    bool gabor_ = false;
};

/// Calls fn(m) for every integer vector in the product of ranges; fn returns
/// false to stop early. Returns false iff stopped.
bool for_each_integer_point(const std::vector<std::pair<long, long>>& ranges,
                            const std::function<bool(std::span<const long>)>& fn);

/// xi -> sum_lambda phi(xi + lambda) on Omega, the lambda-sum truncated to
/// the lattice points that can bring a point of Omega into the support box.
class Periodization {
public:
    Periodization(const FrequencyProfile& phi, const Lattice& lattice);
    double operator()(const Vec& xi) const;
    const std::vector<Vec>& shifts() const { return shifts_; }

private:
    const FrequencyProfile* phi_;
    std::vector<Vec> shifts_;
};

Periodization periodize(const FrequencyProfile& phi, const Lattice& lattice);

enum class WeilMethod {
    /// Exact cell integration: piecewise Gauss-Legendre between breakpoints in
    /// dimension 1, polygon clipping of profile cells against Omega in
    /// dimension 2. Falls back to `tensor` when the profile has no cell grid.
    automatic,
    /// Composite tensor Gauss-Legendre with `cells` per axis on both sides.
    tensor,
};

struct WeilOptions {
    WeilMethod method = WeilMethod::automatic;
    int cells = 16;
    int order = 4;
};

struct WeilResult {
    double residual = 0.0;
    double lhs = 0.0;  ///< integral of phi over the group
    double rhs = 0.0;  ///< integral over Omega of the periodization
    std::string method;
};

WeilResult weil_check(const FrequencyProfile& phi, const Lattice& lattice, const WeilOptions& opts = {});
inline double weil_residual(const FrequencyProfile& phi, const Lattice& lattice,
                            const WeilOptions& opts = {}) {
    return weil_check(phi, lattice, opts).residual;
}

struct MonteCarloOptions {
    long samples = 1000000;
    std::uint64_t seed = 20240617;
    int workers = 0;  ///< 0 = default worker count
};

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
    long samples = 0;
};

/// nu(Omega intersect union_lambda (alpha B(e, r) + lambda)) by Monte Carlo over
/// Omega, with the binomial standard error. Deterministic given the seed and
/// independent of the worker count.
Estimate overlap_measure(const Lattice& lattice, const MetricSpace& metric, const Automorphism& alpha,
                         double r, const MonteCarloOptions& opts = {});

}  // namespace aff
