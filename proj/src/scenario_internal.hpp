#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aff/calderon.hpp"
#include "aff/config.hpp"
#include "aff/expansiveness.hpp"
#include "aff/family.hpp"
#include "aff/lattice.hpp"
#include "aff/profile.hpp"
#include "aff/scenario.hpp"

namespace aff::detail {

/// Scan grid: `points` per axis between lo and hi inclusive, optionally with
/// the reflection -xi of every point, minus points within `exclude` of e.
/// Gabor grids run along the base line at modulation index k.
struct GridSpec {
    Vec lo, hi;
    int points = 0;
    bool mirror = false;
    double exclude = 0.0;
    int k = 1;
};

struct PropertyXKnobs {
    double r = 0.4, M = 1.0, explosion = 10.0, C_max = 0.0;
    long candidate_cap = 0;
};

struct CountingKnobs {
    std::string mode;
    double r = 0.4;
    long samples = 0;
    int instances = 0;
    double max_cond = 0.0, r_min = 0.0, r_max = 0.0, sigmas = 0.0;
    std::vector<int> dims;
};

struct LipschitzKnobs {
    int directions = 0;
    double tolerance = 0.0;
};

struct ClassifyKnobs {
    std::optional<double> M, N;
    std::string expect;
};

struct UcKnobs {
    MonotoneFunction f;
    double c = 2.0, t_min = 1.0, t_max = 1.0, M = 1.0, cap = 100.0;
    int t_points = 0;
    bool expect_bounded = true;
};

struct FrameReportKnobs {
    double M = 2.0, remainder_eps = 0.01, remainder_tolerance = 5e-6, test_tolerance = 1e-6;
    std::vector<Vec> remainder_points;  ///< empty: quartile grid points
    std::optional<double> C;            ///< empty: from property_x when it ran
    std::vector<double> test_eps;
    std::vector<Vec> test_centers;      ///< empty: quartile grid points
    int probe_count = 0;
};

struct WeilKnobs {
    std::string mode;
    int instances = 0;
    double tolerance = 0.0;
};

struct ResolvedScenario {
    std::string name, description;
    std::uint64_t seed = 0;
    bool gabor = false;
    int dim = 1;
    MetricSpace metric = MetricSpace::l2(1);
    Lattice lattice;
    AutomorphismFamily family;
    long truncate_lo = 0, truncate_hi = 0;
    int family_samples = 0;  ///< log-spaced members drawn from a continuous family
    FrequencyProfile profile;
    int modulation = 1;
    std::vector<std::string> analyses;

    GridSpec grid;
    double A = 0.0, B = 0.0, tolerance = 0.0;
    OrbitOptions orbit;
    PropertyXKnobs property_x;
    CountingKnobs counting;
    LipschitzKnobs lipschitz;
    ClassifyKnobs classify;
    UcKnobs u_c;
    FrameReportKnobs frame_report;
    WeilKnobs weil;

    Config echo;  ///< every knob with its resolved value
};

ResolvedScenario resolve(const ScenarioSource& src, const std::vector<std::string>& overrides);

/// The family clipped to the scenario's truncation when it has an open side.
AutomorphismFamily finite_family(const ResolvedScenario& s);

/// Members of finite_family, or family_samples log-spaced members of a
/// continuous family.
std::vector<FamilyMember> sample_members(const ResolvedScenario& s);

/// Grid points of the scan, in order.
std::vector<Vec> grid_points(const ResolvedScenario& s);

}  // namespace aff::detail
