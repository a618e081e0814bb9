#pragma once

#include <optional>
#include <string>
#include <vector>

#include "aff/family.hpp"
#include "aff/linalg.hpp"

namespace aff {

/// Nondecreasing function on [0, inf): identity, c * x^p, or piecewise linear
/// through knots (flat beyond the last knot, linear from the origin before
/// the first).
class MonotoneFunction {
public:
    enum class Kind { identity, power, piecewise_linear };

    static MonotoneFunction identity() { return {}; }
    static MonotoneFunction power(double coef, double exponent);
    static MonotoneFunction piecewise_linear(std::vector<std::pair<double, double>> knots);

    Kind kind() const { return kind_; }
    double operator()(double x) const;
    const std::vector<std::pair<double, double>>& knots() const { return knots_; }
    std::string describe() const;
    /// Throws InputError unless the function is nondecreasing on [lo, hi].
    void check_monotone_on(double lo, double hi) const;

private:
    Kind kind_ = Kind::identity;
    double coef_ = 1.0, exponent_ = 1.0;
    std::vector<std::pair<double, double>> knots_;
};

enum class ExpansivenessVerdict { uniformly_expanding, expanding, non_expanding };
const char* to_string(ExpansivenessVerdict v);

struct ExpansivenessProbe {
    std::optional<double> M;  ///< default: sqrt(L_min L_max) over the truncation
    std::optional<double> N;  ///< default: 1 / M
};

struct ExpansivenessReport {
    ExpansivenessVerdict verdict = ExpansivenessVerdict::expanding;
    double M = 0.0, N = 0.0;
    std::optional<FamilyMember> witness;  ///< non_expanding only
    std::optional<MonotoneFunction> envelope;  ///< uniformly_expanding only
    long probed = 0;
    double L_min = 0.0, L_max = 0.0;
    std::string scope = "on truncation";
};

/// Verdicts certify the sampled range only. A member with L > M and l <= N
/// makes the truncation non_expanding (witness: largest L/l, latest index on
/// ties). Otherwise, if l strictly increases with L across the L-levels above
/// M, the truncation is uniformly_expanding with the monotone least concave
/// majorant of the (l, L) cloud as envelope; else expanding.
ExpansivenessReport classify_expansiveness(const std::vector<FamilyMember>& truncation,
                                           const ExpansivenessProbe& probe = {});
ExpansivenessReport classify_expansiveness(const AutomorphismFamily& family,
                                           const ExpansivenessProbe& probe = {});

/// Monotone least concave majorant of points (x, y): upper hull, then running max.
MonotoneFunction monotone_concave_majorant(std::vector<std::pair<double, double>> pts);

enum class Tristate { yes, no, indeterminate };
const char* to_string(Tristate t);

struct SubspaceVerdict {
    Tristate answer = Tristate::no;
    std::string reason;
    Matrix F;  ///< columns span the modulus > 1 invariant subspace
    Matrix E;  ///< columns span the modulus = 1 invariant subspace
    std::vector<cplx> eigenvalues;
};

/// Spectral test for expansion on a subspace: every eigenvalue modulus >= 1,
/// at least one > 1, and modulus-1 eigenvalues semisimple.
SubspaceVerdict expanding_on_subspace(const Matrix& a);

struct UcResult {
    std::vector<double> t;
    std::vector<double> u;
    double max_value = 0.0;
    double cap = 0.0;
    bool bounded = false;  ///< "bounded on sampled range": max over the grid <= cap
    std::string scope = "on sampled range";
};

/// u_c(t) = weight of {h : t <= L(h) <= f(c t)}. Continuous dilation families
/// integrate the density over the level band; discrete families sum atoms.
UcResult u_c_profile(const AutomorphismFamily& family, const MonotoneFunction& f, double c,
                     const std::vector<double>& t_grid, double M, double cap = 100.0);

}  // namespace aff
