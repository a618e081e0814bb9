#include "aff/metric.hpp"

#include <cmath>
#include <numbers>

namespace aff {

MetricSpace MetricSpace::l2(int dim) {
    require(dim >= 1 && dim <= kMaxDim, "l2 metric: dimension out of range");
    return {MetricKind::euclidean_l2, dim};
}

MetricSpace MetricSpace::linf(int dim) {
    require(dim >= 1 && dim <= kMaxDim, "linf metric: dimension out of range");
    return {MetricKind::euclidean_linf, dim};
}

MetricSpace MetricSpace::gabor() { return {MetricKind::gabor_product, 2}; }

std::string MetricSpace::name() const {
    switch (kind_) {
        case MetricKind::euclidean_l2: return "l2";
        case MetricKind::euclidean_linf: return "linf";
        case MetricKind::gabor_product: return "gabor";
    }
    return "?";
}

void MetricSpace::check_point(const Vec& x) const {
    if (x.dim() != dim_)
        throw InputError(name() + " metric expects points of dimension " +
                         std::to_string(dim_) + ", got " + std::to_string(x.dim()));
    if (is_gabor() && x[1] != std::round(x[1]))
        throw InputError("gabor point needs an integral modulation index, got " + x.str());
}

double MetricSpace::norm(const Vec& x) const {
    switch (kind_) {
        case MetricKind::euclidean_l2: return x.norm2();
        case MetricKind::euclidean_linf: return x.norm_inf();
        case MetricKind::gabor_product: return std::abs(x[0]) + std::abs(x[1]);
    }
    return 0.0;
}

double MetricSpace::distance(const Vec& x, const Vec& y) const {
    check_point(x);
    check_point(y);
    return norm(x - y);
}

bool MetricSpace::ball_contains(const Vec& center, double r, const Vec& x) const {
    return norm(x - center) < r;
}

double unit_ball_volume(int n) {
    return std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

double MetricSpace::ball_measure(double r) const {
    require(r > 0.0, "ball_measure: radius must be positive");
    switch (kind_) {
        case MetricKind::euclidean_l2: return unit_ball_volume(dim_) * std::pow(r, dim_);
        case MetricKind::euclidean_linf: return std::pow(2.0 * r, dim_);
        case MetricKind::gabor_product: {
            // Slices |k| < r each carry an interval of length 2(r - |k|).
            double m = 0.0;
            for (long k = -static_cast<long>(std::ceil(r)); k <= static_cast<long>(std::ceil(r)); ++k) {
                const double w = r - std::abs(static_cast<double>(k));
                if (w > 0.0) m += 2.0 * w;
            }
            return m;
        }
    }
    return 0.0;
}

Vec MetricSpace::ball_box_halfwidths(double r) const {
    Vec h(dim_, r);
    if (is_gabor()) h[1] = std::ceil(r) - 1.0;
    return h;
}

double MetricSpace::doubling_ratio(double r) const { return ball_measure(2.0 * r) / ball_measure(r); }

}  // namespace aff
