#pragma once

#include <string>

#include "aff/linalg.hpp"

namespace aff {

enum class MetricKind { euclidean_l2, euclidean_linf, gabor_product };

/// Invariant metric on the frequency group. Euclidean kinds live on R^dim;
/// the Gabor product metric lives on R x Z, points (xi, k) with integral k,
/// and is d((xi,k),(eta,l)) = |xi - eta| + |k - l|.
class MetricSpace {
public:
    static MetricSpace l2(int dim);
    static MetricSpace linf(int dim);
    static MetricSpace gabor();

    MetricKind kind() const { return kind_; }
    bool is_gabor() const { return kind_ == MetricKind::gabor_product; }
    /// Dimension of points (2 for the Gabor group).
    int point_dim() const { return dim_; }
    /// Dimension of the continuous part carrying Lebesgue measure.
    int continuous_dim() const { return is_gabor() ? 1 : dim_; }
    Vec identity() const { return Vec(dim_); }
    std::string name() const;

    /// Throws InputError on dimension mismatch or non-integral Gabor index.
    void check_point(const Vec& x) const;

    double distance(const Vec& x, const Vec& y) const;
    /// d(x, e), no validation (hot path).
    double norm(const Vec& x) const;
    /// Open ball membership: d(x, center) < r.
    bool ball_contains(const Vec& center, double r, const Vec& x) const;

    /// Haar measure of B(e, r): Lebesgue for euclidean kinds; Lebesgue times
    /// counting measure for the Gabor group.
    double ball_measure(double r) const;
    /// Half-widths of an axis box containing B(e, r). For the Gabor index
    /// coordinate this is the largest |k| with |k| < r.
    Vec ball_box_halfwidths(double r) const;

    /// nu(B(e,2r)) / nu(B(e,r)).
    double doubling_ratio(double r) const;

    friend bool operator==(const MetricSpace& a, const MetricSpace& b) {
        return a.kind_ == b.kind_ && a.dim_ == b.dim_;
    }

private:
    MetricSpace(MetricKind k, int d) : kind_(k), dim_(d) {}
    MetricKind kind_ = MetricKind::euclidean_l2;
    int dim_ = 1;
};

/// Lebesgue measure of the unit l2 ball in R^n.
double unit_ball_volume(int n);

struct Ball {
    Vec center;
    double radius = 0.0;
    MetricSpace metric = MetricSpace::l2(1);

    bool contains(const Vec& x) const { return metric.ball_contains(center, radius, x); }
    Ball translated(const Vec& t) const { return {center + t, radius, metric}; }
};

}  // namespace aff
