#pragma once

#include <optional>
#include <string>
#include <vector>

#include "aff/automorphism.hpp"
#include "aff/family.hpp"
#include "aff/lattice.hpp"
#include "aff/metric.hpp"

namespace aff {

struct CountOptions {
    long candidate_cap = 100'000'000;
    std::size_t point_cap = 10'000;  ///< points kept in the result list
    /// Relative guard band for |d - r|: such points are counted outside the
    /// open ball and reported as boundary hits.
    double guard = 1e-12;
};

struct BoundInputs {
    double nu_alpha_ball_r = 0.0;   ///< delta * nu(B(e, r)), exact
    double nu_alpha_ball_2r = 0.0;  ///< delta * nu(B(e, 2r)), exact
    Estimate omega_r;               ///< nu(Omega^r_alpha), Monte Carlo
};

struct CountResult {
    long count = 0;
    std::vector<Vec> points;
    bool points_overflow = false;
    long candidates = 0;
    long boundary_hits = 0;
    std::optional<double> upper_bound;        ///< nu(alpha B(e,2r)) / nu(Omega^r)
    std::optional<double> upper_error;        ///< propagated standard error
    std::optional<double> lower_bound_at_2r;  ///< nu(alpha B(e,r)) / nu(Omega^r)
    std::optional<double> lower_error;
    std::optional<BoundInputs> inputs;
};

/// #{lambda in Gamma-perp : d(alpha^{-1}(lambda + shift), e) < r}; shift = 0
/// gives #(Gamma-perp intersect alpha B(e, r)). Exact by bounding-box walk in
/// lattice coordinates. Throws ResourceError past the candidate cap.
CountResult enumerate(const Lattice& lattice, const Automorphism& alpha, double r, const MetricSpace& metric,
                      const CountOptions& opts = {}, const Vec* shift = nullptr);

/// enumerate() plus the two-sided bounds. Throws DegenerateDomainError when the
/// overlap measure is indistinguishable from zero.
CountResult counting_bounds(const Lattice& lattice, const Automorphism& alpha, double r, const MetricSpace& metric,
                            const MonteCarloOptions& mc = {}, const CountOptions& opts = {});

struct ScanRow {
    long index = 0;
    std::vector<double> param;
    double L = 0.0;
    double lower = 0.0;
    double delta = 1.0;
    long count = 0;
    double ratio = 0.0;  ///< (count - 1) / delta
};

enum class PropertyXVerdict { holds, violated };
const char* to_string(PropertyXVerdict v);

struct PropertyXOptions {
    double explosion_factor = 10.0;
    int workers = 0;
    CountOptions count;
};

struct PropertyXReport {
    PropertyXVerdict verdict = PropertyXVerdict::holds;
    double C = 0.0;
    double r = 0.0, M = 0.0;
    std::optional<ScanRow> witness;    ///< violated: the row with the largest ratio
    double attempted_bound = 0.0;      ///< 1 + C delta at the witness
    std::vector<ScanRow> trace;        ///< scanned rows in index order
    std::string scope = "on truncation";
};

/// Scans {h : L(h) > M} of a finite truncation. C = max (count - 1)/delta.
/// "violated" when, with rows grouped into equal-L levels ordered by L (max
/// ratio per level), the ratios over the last quartile of levels (at least
/// two) increase strictly and the last exceeds the first by the explosion
/// factor.
PropertyXReport property_x_scan(const AutomorphismFamily& family, const Lattice& lattice, const MetricSpace& metric,
                                double r, double M, const PropertyXOptions& opts = {});

}  // namespace aff
