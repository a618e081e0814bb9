#pragma once

// Quadrature, compensated summation and deterministic random streams.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace aff {

/// Neumaier compensated summation; order of add() calls fixes the result.
class CompensatedSum {
public:
    void add(double x);
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

struct GaussRule {
    std::vector<double> nodes;    ///< on [-1, 1]
    std::vector<double> weights;
};

/// Gauss-Legendre rule of the given order (Newton iteration on P_n).
const GaussRule& gauss_legendre(int order);

/// Fixed-order Gauss-Legendre on [a, b].
double integrate_gl(const std::function<double(double)>& f, double a, double b,
                    int order = 16);

/// Gauss-Legendre on each cell between consecutive (sorted, deduplicated)
/// breakpoints. Exact for piecewise polynomials of degree < 2*order whose
/// pieces meet only at breakpoints.
double integrate_piecewise(const std::function<double(double)>& f,
                           std::vector<double> breakpoints, int order = 16);

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    int cells = 0;
    bool converged = false;
};

/// Composite Gauss-Legendre (order 16 per cell) with dyadic refinement until
/// the relative change between levels drops below rel_tol.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a,
                                    double b, double rel_tol = 1e-6, int max_level = 16,
                                    double abs_tol = 1e-15);

/// Tensor-product composite Gauss-Legendre over the unit cube [0,1)^dim,
/// `cells` per axis, `order` nodes per cell and axis.
double integrate_unit_cube(const std::function<double(std::span<const double>)>& f,
                           int dim, int cells, int order);

/// splitmix64 step; used to derive independent per-chunk seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/// xoshiro256** generator with a portable [0,1) double conversion, so that
/// sample streams are identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed);
    std::uint64_t next();
    double uniform();                       ///< [0, 1)
    double uniform(double lo, double hi);   ///< [lo, hi)
    double normal();                        ///< Box-Muller, standard normal
    long integer(long lo, long hi);         ///< inclusive range

private:
    std::uint64_t s_[4];
};

}  // namespace aff

namespace aff {

/// Worker count used by parallel loops when a caller passes 0. Defaults to the
/// hardware concurrency; the CLI's --workers flag sets it.
int default_workers();
void set_default_workers(int n);

/// Runs body(i) for i in [0, n) on up to `workers` threads (0 = default).
/// Callers must write results into per-index slots; merging happens after
/// the loop in index order, so results never depend on the worker count.
void parallel_for(long n, int workers, const std::function<void(long)>& body);

}  // namespace aff
