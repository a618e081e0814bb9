#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "aff/automorphism.hpp"
#include "aff/metric.hpp"

namespace aff {

enum class IndexKind { integer_range, real_grid, continuous };
enum class GeneratorKind { matrix_power, dilation, shearlet, gabor_shift };

const char* to_string(IndexKind k);
const char* to_string(GeneratorKind k);

/// Weight of the index measure: an atom mass for discrete index sets, a
/// density for the continuous one.
struct WeightSpec {
    enum class Kind { constant, power, geometric };
    Kind kind = Kind::constant;
    double scale = 1.0;
    double exponent = 0.0;  ///< power: scale * |a|^exponent, a = first parameter
    double base = 1.0;      ///< geometric: scale * base^j, j = integer index

    static WeightSpec constant(double c = 1.0) { return {Kind::constant, c, 0.0, 1.0}; }
    static WeightSpec power(double exponent, double scale = 1.0) { return {Kind::power, scale, exponent, 1.0}; }
    static WeightSpec geometric(double base, double scale = 1.0) { return {Kind::geometric, scale, 0.0, base}; }

    double operator()(double first_param, long index) const;
    std::string describe() const;
};

struct FamilyMember {
    long index = 0;              ///< position in the truncation (or integer j)
    std::vector<double> param;   ///< reported parameters
    Automorphism alpha;
    double weight = 0.0;
    double jacobian = 1.0;
    LipschitzConstants lip;
};

/// Indexed family of dual automorphisms with its weights and metric.
///
/// Integer families may declare an unbounded side (j_min = -inf or
/// j_max = +inf); operations that need a finite truncation reject them, while
/// Calderón sums truncate them with certified exit bounds.
class AutomorphismFamily {
public:
    static constexpr long kUnbounded = std::numeric_limits<long>::max();

    /// {base^j : j_min <= j <= j_max}; pass -kUnbounded / kUnbounded for an open side.
    static AutomorphismFamily matrix_powers(const Matrix& base, long j_min, long j_max, WeightSpec w,
                                            const MetricSpace& metric);
    /// xi -> a xi for a in the grid.
    static AutomorphismFamily dilations(std::vector<double> a_values, WeightSpec w, const MetricSpace& metric);
    /// xi -> a xi for a in [a_min, a_max] with the weight as a density.
    static AutomorphismFamily continuous_dilations(double a_min, double a_max, WeightSpec density,
                                                   const MetricSpace& metric);
    /// Shearlet matrices over the grid a_values x s_values (row-major, s fastest).
    static AutomorphismFamily shearlets(std::vector<double> a_values, std::vector<double> s_values,
                                        WeightSpec w, const MetricSpace& metric);
    /// Gabor shifts p = j * step, j_min <= j <= j_max (open sides allowed).
    static AutomorphismFamily gabor_shifts(double step, long j_min, long j_max, WeightSpec w,
                                           const MetricSpace& metric);
    /// Gabor shifts over an explicit p grid.
    static AutomorphismFamily gabor_shift_grid(std::vector<double> p_values, WeightSpec w,
                                               const MetricSpace& metric);

    IndexKind index_kind() const { return index_; }
    GeneratorKind generator() const { return gen_; }
    const MetricSpace& metric() const { return metric_; }
    const WeightSpec& weight() const { return weight_; }
    int param_dim() const { return gen_ == GeneratorKind::shearlet ? 2 : 1; }
    std::vector<std::string> param_names() const;
    std::string describe() const;

    bool is_finite() const;
    long size() const;  ///< number of members of a finite discrete family

    long j_min() const { return j_min_; }
    long j_max() const { return j_max_; }
    bool unbounded_below() const { return j_min_ == -kUnbounded; }
    bool unbounded_above() const { return j_max_ == kUnbounded; }
    const Matrix& base() const { return base_; }
    double step() const { return step_; }
    double a_min() const { return a_min_; }
    double a_max() const { return a_max_; }

    /// Grid values of a real_grid family (s values for shearlets only).
    const std::vector<double>& grid_a() const { return grid_a_; }
    const std::vector<double>& grid_s() const { return grid_s_; }
    /// Parameter vectors of a real_grid family in index order.
    std::vector<std::vector<double>> grid_points() const;

    /// The automorphism for a parameter vector, without Lipschitz constants.
    Automorphism automorphism_for(const std::vector<double>& param) const;

    /// Same family with the integer range clipped to [lo, hi].
    AutomorphismFamily truncated(long lo, long hi) const;

    /// Member for integer index j (integer families).
    FamilyMember member_at_index(long j) const;
    /// Member for a continuous or grid parameter vector.
    FamilyMember member_at(const std::vector<double>& param) const;
    /// All members of a finite discrete family, in index order. Per-member
    /// evaluation runs in parallel; the order is fixed.
    std::vector<FamilyMember> members(int workers = 0) const;

private:
    IndexKind index_ = IndexKind::integer_range;
    GeneratorKind gen_ = GeneratorKind::matrix_power;
    MetricSpace metric_ = MetricSpace::l2(1);
    WeightSpec weight_;
    Matrix base_;
    long j_min_ = 0, j_max_ = 0;
    double step_ = 1.0;
    double a_min_ = 0.0, a_max_ = 0.0;
    std::vector<double> grid_a_, grid_s_;
};

/// Level sets of a truncation.
std::vector<FamilyMember> level_below(const std::vector<FamilyMember>& ms, double M);      ///< H_M: L < M
/// H_M^c as the complement of H_M (L >= M), so that H_M and H_M^c partition.
std::vector<FamilyMember> level_above(const std::vector<FamilyMember>& ms, double M);
std::vector<FamilyMember> level_lower_above(const std::vector<FamilyMember>& ms, double N);  ///< K_N: l > N

}  // namespace aff
