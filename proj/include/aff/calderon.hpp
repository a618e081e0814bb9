#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "aff/family.hpp"
#include "aff/profile.hpp"

namespace aff {

/// Which part of the index set an orbit integral runs over.
enum class LevelSet {
    all,
    below,  ///< H_M: L(h) < M
    above,  ///< H_M^c: L(h) >= M, the complement of H_M
};
const char* to_string(LevelSet s);

struct OrbitOptions {
    double rel_tol = 1e-10;        ///< continuous families: adaptive quadrature tolerance
    long max_terms = 4096;         ///< per side of an integer family without an exit certificate
    double divergence_cap = 1e12;  ///< partial sums beyond this are flagged divergent
    int cells = 32;                ///< tensor quadrature over K in dimension >= 2
    int order = 4;
};

struct PartialSum {
    long terms = 0;
    double value = 0.0;
};

/// Integer families without an exit certificate are summed in dyadic blocks
/// of terms. The evaluation is flagged divergent when the partial sum passes
/// the cap, or when each of the last three blocks holds at least 3/4 of the
/// previous block's mass.
struct CalderonEvaluation {
    Vec xi;
    double value = 0.0;
    /// Index (integer families) or parameter (continuous) bounds actually
    /// covered; for grids, the first and last grid position.
    double truncation_lo = 0.0, truncation_hi = 0.0;
    long terms = 0;  ///< nonzero terms, or quadrature cells
    double tail_estimate = 0.0;
    double quadrature_error = 0.0;
    /// True when every omitted index provably contributes zero.
    bool certified = true;
    bool divergent = false;
    std::string note;
    std::vector<PartialSum> trace;
};

/// int_level w(h) delta(h)^p |psi(alpha_h xi)|^2 dsigma(h), p = 1 with
/// jacobian_weight, else p = 0. Integer families stop once the orbit provably
/// leaves the support box, using the closed-form Lipschitz constants of the
/// current power: beyond index j nothing contributes when l(A) >= 1 and
/// l(A^j) d(xi, e) exceeds the support circumradius, or when L(A) <= 1 and
/// L(A^j) d(xi, e) is below the support inradius (and symmetrically for
/// negative j). Gabor shift families sum the exact index range whose shifts
/// meet the support.
/// Throws SingularPointError for xi = e (or a Gabor point with k = 0) when
/// the family is unbounded and the profile does not vanish there.
CalderonEvaluation orbit_integral(const FrequencyProfile& psi, const AutomorphismFamily& family, const Vec& xi,
                                  bool jacobian_weight, LevelSet level, double M, const OrbitOptions& opts = {});

/// C_psi(xi) = int |psi(alpha_h xi)|^2 dsigma(h).
CalderonEvaluation calderon_sum(const FrequencyProfile& psi, const AutomorphismFamily& family, const Vec& xi,
                                const OrbitOptions& opts = {});

/// Psi_M(xi) = int over H_M^c of delta(h) |psi(alpha_h xi)|^2 dsigma(h).
CalderonEvaluation psi_M(const FrequencyProfile& psi, const AutomorphismFamily& family, const Vec& xi, double M,
                         const OrbitOptions& opts = {});

enum class IntegrabilityVerdict { finite, divergent };
const char* to_string(IntegrabilityVerdict v);

struct IntegrabilityReport {
    IntegrabilityVerdict verdict = IntegrabilityVerdict::finite;
    double value = 0.0;  ///< int_K Psi_M, or the last partial sum when divergent
    bool certified = true;
    long terms = 0;
    std::vector<PartialSum> trace;
    std::string note;
};

/// int_K int_level w(h) delta(h)^p int_K |psi(alpha_h xi)|^2 dxi dsigma(h),
/// the box analogue of orbit_integral, with the same truncation rules.
IntegrabilityReport orbit_box_integral(const FrequencyProfile& psi, const AutomorphismFamily& family, const Box& K,
                                       bool jacobian_weight, LevelSet level, double M, const OrbitOptions& opts = {});

/// int_K Psi_M(xi) dxi. For discrete families the h-sum is taken outside:
/// each term is w(h) delta(h) int_K |psi(alpha_h xi)|^2 dxi, computed exactly
/// in dimension 1 and for piecewise-constant profiles in dimension 2, by
/// tensor quadrature otherwise. K must stay away from e: a closed box
/// containing e is rejected. For the Gabor group K is an interval on the base
/// line, taken on the modulation line of the profile.
IntegrabilityReport local_integrability_check(const FrequencyProfile& psi, const AutomorphismFamily& family,
                                              const Box& K, double M, const OrbitOptions& opts = {});

/// int_K |psi(A xi + t)|^2 dxi for an invertible linear A (base coordinates).
/// Exact in dimension 1 and for piecewise-constant profiles in dimension 2.
double pullback_square_integral(const FrequencyProfile& psi, const Matrix& A, const Vec& t, const Box& K,
                                int cells = 32, int order = 4);

/// Bounds for walk_powers: the pushed-forward set has d(., e) in [dmin, dmax]
/// and the profile support has d(., e) in [r_in, R_out].
struct PowerWalkBounds {
    double dmin = 0.0, dmax = 0.0;
    double r_in = 0.0, R_out = 0.0;
    LevelSet level = LevelSet::all;
    double M = 0.0;
};

struct PowerWalkResult {
    double value = 0.0;
    long lo = 0, hi = 0;  ///< index range walked
    long terms = 0;       ///< nonzero terms
    bool certified = true;
    bool divergent = false;
    std::vector<PartialSum> trace;  ///< (signed term count, side partial sum) at dyadic marks
    std::string note;
};

/// Sums term(j, A^j) over an integer matrix-power family, walking outwards
/// from the index nearest 0 and stopping each side at the exit certificate
/// described for orbit_integral. The total is summed in index order.
PowerWalkResult walk_powers(const AutomorphismFamily& family, const PowerWalkBounds& bounds, const OrbitOptions& opts,
                            const std::function<double(long, const Matrix&)>& term);

/// Axis box containing A b + t.
Box image_box(const Matrix& A, const Box& b, const Vec& t);
bool closed_boxes_meet(const Box& a, const Box& b);
/// Index window [j_lo, j_hi] (one unit of slack per side) of the shifts
/// x - c j landing in [lo, hi).
std::pair<long, long> gabor_index_window(double x, double c, double lo, double hi);

/// Smallest and largest d(x, e) over the support of a profile: the inradius
/// is taken over the nonzero pieces, so band-pass profiles whose bounding box
/// contains e still get a positive inradius.
std::pair<double, double> support_radii(const FrequencyProfile& psi, const MetricSpace& metric);

/// Smallest and largest d(x, e) over the closure of a box.
double box_min_norm(const MetricSpace& metric, const Box& b);
double box_max_norm(const MetricSpace& metric, const Box& b);

}  // namespace aff
