#pragma once

#include <optional>
#include <vector>

#include "aff/linalg.hpp"
#include "aff/metric.hpp"

namespace aff {

/// Half-open axis box [lo, hi).
struct Box {
    Vec lo, hi;

    int dim() const { return lo.dim(); }
    bool contains(const Vec& x) const;
    bool empty() const;
    double volume() const;
    Box intersect(const Box& o) const;
    Box hull(const Box& o) const;
    Vec center() const { return 0.5 * (lo + hi); }
};

enum class ProfileKind { zero, piecewise_constant, sampled_grid, ball_indicator };

/// Frequency-side function psi-hat (or a Gabor window g-hat) with bounded
/// support. A profile may be lifted onto one modulation line {k = kappa} of
/// the Gabor group; it then lives on points (xi, k) and vanishes off k = kappa.
class FrequencyProfile {
public:
    FrequencyProfile() = default;

    static FrequencyProfile zero(int dim);
    /// Boxes must be pairwise disjoint.
    static FrequencyProfile piecewise_constant(std::vector<Box> boxes, std::vector<double> values);
    /// Uniform grid over `box` with nodes[i] >= 2 nodes per axis, including both
    /// ends; values in row-major order (last axis fastest). Multilinear
    /// interpolation inside the box, zero outside.
    static FrequencyProfile sampled_grid(Box box, std::vector<int> nodes, std::vector<double> values);
    static FrequencyProfile ball_indicator(const Ball& ball, double value);

    /// Lift a one-dimensional profile to the Gabor line {k = kappa}.
    FrequencyProfile on_modulation_line(int kappa) const;
    /// The profile on its base space (drops any modulation lift).
    FrequencyProfile base_profile() const;

    ProfileKind kind() const { return kind_; }
    /// Point dimension (base dimension + 1 when lifted).
    int dim() const { return modulation_ ? base_dim_ + 1 : base_dim_; }
    int base_dim() const { return base_dim_; }
    std::optional<int> modulation_index() const { return modulation_; }
    bool is_zero() const { return kind_ == ProfileKind::zero; }
    /// True when the profile is constant on the cells cut by its breakpoints.
    bool is_piecewise_constant() const {
        return kind_ == ProfileKind::zero || kind_ == ProfileKind::piecewise_constant;
    }

    double operator()(const Vec& xi) const;
    double eval_base(const Vec& base_point) const;

    /// Bounding box of the support in base coordinates.
    const Box& base_support() const { return support_; }
    /// Bounding box in point coordinates; the modulation axis is [kappa, kappa+1).
    Box support() const;

    /// Sorted per-axis coordinates (base coordinates) where the profile may fail
    /// to be smooth: box edges and grid nodes. Empty for ball indicators in
    /// dimension >= 2, which are not axis-separable.
    std::vector<std::vector<double>> axis_breakpoints() const;

    double integral() const;       ///< exact integral over the base space
    double norm_squared() const;   ///< exact squared L2 norm
    FrequencyProfile scaled(double c) const;

    const std::vector<Box>& boxes() const { return boxes_; }
    const std::vector<double>& values() const { return values_; }
    const std::vector<int>& grid_nodes() const { return nodes_; }
    const std::optional<Ball>& ball() const { return ball_; }

private:
    double eval_grid(const Vec& x) const;

    ProfileKind kind_ = ProfileKind::zero;
    int base_dim_ = 1;
    std::optional<int> modulation_;
    Box support_;
    std::vector<Box> boxes_;     // piecewise_constant
    std::vector<double> values_; // piecewise values or grid node values
    std::vector<int> nodes_;     // sampled_grid
    std::optional<Ball> ball_;
    double ball_value_ = 0.0;
};

}  // namespace aff
