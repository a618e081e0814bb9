#pragma once

#include <cmath>

#include "aff/linalg.hpp"
#include "aff/metric.hpp"
#include "aff/numerics.hpp"

namespace aff::testing {

/// Random n x n matrix with entries in [-2, 2], condition number <= max_cond
/// and smallest singular value above min_sv.
inline Matrix random_matrix(Rng& rng, int n, double max_cond, double min_sv = 1e-2) {
    while (true) {
        Matrix m(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) m(i, j) = rng.uniform(-2.0, 2.0);
        const auto s = singular_values(m);
        if (s.back() > min_sv && s.front() / s.back() <= max_cond) return m;
    }
}

/// Uniform point of the open ball B(c, r), pulled inwards by a relative 1e-9
/// so that strict membership survives rounding.
inline Vec random_in_ball(Rng& rng, const MetricSpace& m, const Vec& c, double r) {
    const int n = m.point_dim();
    Vec x(n);
    if (m.kind() == MetricKind::euclidean_linf) {
        for (int i = 0; i < n; ++i) x[i] = rng.uniform(-r, r);
    } else {
        double norm = 0.0;
        for (int i = 0; i < n; ++i) {
            x[i] = rng.normal();
            norm += x[i] * x[i];
        }
        const double rad = r * std::pow(rng.uniform(), 1.0 / n);
        x *= rad / std::sqrt(norm);
    }
    return c + (1.0 - 1e-9) * x;
}

}  // namespace aff::testing
