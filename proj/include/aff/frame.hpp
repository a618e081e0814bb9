#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "aff/calderon.hpp"
#include "aff/family.hpp"
#include "aff/lattice.hpp"
#include "aff/profile.hpp"

namespace aff {

/// Where test functions may be centred. For L^2 of a euclidean group this is
/// the whole space; for the Gabor group it is the modulation line k = kappa,
/// where balls of radius eps < 1 stay on the line.
struct AdmissibleRegion {
    enum class Kind { whole_space, modulation_line };
    Kind kind = Kind::whole_space;
    int kappa = 1;
    double eps0 = std::numeric_limits<double>::infinity();

    static AdmissibleRegion whole_space() { return {}; }
    static AdmissibleRegion modulation_line(int kappa = 1) { return {Kind::modulation_line, kappa, 1.0}; }
    std::string describe() const;
};

struct TestFunction {
    Vec center;
    double radius = 0.0;
    double normalization = 0.0;  ///< 1 / sqrt(nu(B(center, radius)))
    AdmissibleRegion region;
    FrequencyProfile profile;    ///< normalization * indicator of the ball
};

/// Normalized ball indicator. Box-shaped balls (dimension 1, linf, Gabor) are
/// piecewise-constant profiles; l2 balls in dimension >= 2 are ball profiles.
/// Throws InputError when eps >= eps0 or the centre is outside the region.
TestFunction make_test_function(const Vec& xi0, double eps, const MetricSpace& metric,
                                const AdmissibleRegion& region = {});

struct FrameOptions {
    OrbitOptions orbit;
    LevelSet level = LevelSet::all;
    double M = 0.0;
    int cells = 64;  ///< tensor quadrature over Omega in dimension >= 2
    int order = 4;
    /// Evaluate each h-term as delta^{-1} int |F_h|^2 over the whole group,
    /// dropping the lattice sum (valid when a single translate of Omega holds
    /// the support of F_h).
    bool single_term = false;
};

struct FrameValue {
    double value = 0.0;
    long terms = 0;  ///< nonzero h-terms, or quadrature cells for continuous families
    bool certified = true;
    std::string method;  ///< "exact_breakpoints" or "tensor_quadrature"
    std::string note;
};

/// int_H delta(h)^{-1} int_Omega |sum_lambda f(alpha_h^{-1}(xi + lambda)) psi(xi + lambda)|^2 dxi dsigma(h).
/// Exact in dimension 1 (piecewise Gauss-Legendre between all breakpoints),
/// tensor quadrature over Omega otherwise. Gabor systems are evaluated on the
/// modulation line of f.
FrameValue frame_functional(const FrequencyProfile& psi, const AutomorphismFamily& family, const Lattice& lattice,
                            const FrequencyProfile& f, const FrameOptions& opts = {});

/// One h-term delta(h)^{-1} int_Omega |sum_lambda ...|^2 for a euclidean
/// automorphism (or a Gabor shift, for Gabor profiles).
double frame_term(const FrequencyProfile& psi, const Automorphism& alpha, const Lattice& lattice,
                  const FrequencyProfile& f, const FrameOptions& opts = {});

/// Radius below which alpha B(xi0, eps) lies inside one translate of Omega:
/// the metric distance from alpha(xi0) to the boundary of its cell, divided
/// by L. Zero when alpha(xi0) sits on a cell boundary.
double single_term_threshold(const Automorphism& alpha, double L, const Lattice& lattice, const MetricSpace& metric,
                             const Vec& xi0);

struct GridVerdict {
    Vec xi;
    double value = 0.0;
    bool pass_lower = true;
    bool pass_upper = true;
    bool certified = true;
};

struct RemainderCheck {
    Vec xi0;
    double eps = 0.0;
    double ball_average = 0.0;  ///< average of C_psi over the test set
    double remainder = 0.0;     ///< R_M(eps, xi0) = C / nu(B) int_B Psi_M
    double frame_value = 0.0;   ///< frame functional of the test function
    double threshold = 0.0;     ///< smallest single-term threshold over H_M
    bool pass = true;           ///< A <= ball_average + remainder + tolerance
};

struct FrameReportOptions {
    double exclusion_radius = 1e-3;
    double tolerance = 1e-9;  ///< verdict slack on C_psi
    double remainder_tolerance = 5e-6;
    /// Points for the remainder check; empty picks three grid points at the
    /// quartiles of the grid.
    std::vector<Vec> remainder_points;
    double remainder_eps = 0.01;
    /// Property X constant used in R_M. Required for the remainder check;
    /// without it the check is skipped and the report says so.
    std::optional<double> property_x_C;
    OrbitOptions orbit;
    int workers = 0;
};

struct ProbeResult {
    double A_hat = 0.0, B_hat = 0.0;
    std::vector<double> values;
};

struct FrameReport {
    std::vector<GridVerdict> grid;
    double min_value = 0.0, max_value = 0.0;
    double A = 0.0, B = 0.0, M = 0.0;
    long lower_failures = 0, upper_failures = 0;
    bool all_pass = true;
    std::vector<RemainderCheck> remainder;
    std::optional<double> property_x_C;
    std::optional<ProbeResult> probe;
    std::string scope = "every grid point outside the exclusion radius";
    std::string note;
};

/// Per-point verdicts A - tol <= C_psi(xi) <= B + tol, plus the remainder
/// inequality A <= average + R_M at the remainder points. Throws InputError
/// when a grid point lies within the exclusion radius of e.
FrameReport calderon_inequality_report(const FrequencyProfile& psi, const AutomorphismFamily& family,
                                       const Lattice& lattice, const std::vector<Vec>& grid, double A, double B,
                                       double M, const FrameReportOptions& opts = {});

/// min and max of the frame functional over unit-norm test profiles. Inner
/// estimates: the true bounds satisfy A <= A_hat and B_hat <= B.
ProbeResult frame_bound_probe(const FrequencyProfile& psi, const AutomorphismFamily& family, const Lattice& lattice,
                              const std::vector<FrequencyProfile>& ensemble, const FrameOptions& opts = {},
                              int workers = 0);

/// Random unit-norm piecewise-constant profiles supported in `band`: each has
/// 1 to max_pieces cells along the first axis with values drawn uniformly
/// from [0.1, 1]. Lifted to the modulation line when kappa is set.
std::vector<FrequencyProfile> random_probe_ensemble(int count, const Box& band, std::uint64_t seed,
                                                    int max_pieces = 8, std::optional<int> kappa = std::nullopt);

}  // namespace aff
