#include "aff/counting.hpp"

#include <algorithm>
#include <cmath>

#include "aff/numerics.hpp"

namespace aff {

const char* to_string(PropertyXVerdict v) { return v == PropertyXVerdict::holds ? "holds" : "violated"; }

CountResult enumerate(const Lattice& lattice, const Automorphism& alpha, double r, const MetricSpace& metric,
                      const CountOptions& opts, const Vec* shift) {
    require(r > 0.0 && std::isfinite(r), "enumerate: r must be positive");
    require(metric.point_dim() == lattice.dim() && alpha.dim() == lattice.dim(),
            "enumerate: lattice, metric and automorphism dimensions differ");
    require(metric.is_gabor() == lattice.is_gabor(), "enumerate: gabor lattice needs the gabor metric");
    require(lattice.rank() <= 4, "enumerate: exact enumeration supports dimension <= 4");

    const int n = lattice.rank();
    const Matrix& a = alpha.forward();
    const Matrix& ainv = alpha.backward();
    const Matrix& binv = lattice.inverse_basis();
    const Vec h = metric.ball_box_halfwidths(r);

    Vec center(n), half(n);
    for (int i = 0; i < n; ++i) {
        double c = 0.0, w = 0.0;
        for (int q = 0; q < n; ++q) c -= shift ? binv(i, q) * (*shift)[q] : 0.0;
        for (int j = 0; j < alpha.dim(); ++j) {
            double g = 0.0;
            for (int q = 0; q < n; ++q) g += binv(i, q) * a(q, j);
            w += std::abs(g) * h[j];
        }
        center[i] = c;
        half[i] = w;
    }
    const auto ranges = Lattice::integer_ranges(center, half);
    const long volume = Lattice::range_volume(ranges);
    if (volume > opts.candidate_cap) {
        std::string box;
        for (const auto& [lo, hi] : ranges) box += "[" + std::to_string(lo) + "," + std::to_string(hi) + "]";
        throw ResourceError("enumerate: bounding box " + box + " holds " + std::to_string(volume) +
                            " candidates, cap " + std::to_string(opts.candidate_cap));
    }

    CountResult res;
    res.candidates = volume;
    const double band = opts.guard * std::max(1.0, r);
    for_each_integer_point(ranges, [&](std::span<const long> m) {
        Vec lam = lattice.point(m);
        if (shift) lam += *shift;
        const double d = metric.norm(ainv.apply(lam));
        if (std::abs(d - r) <= band) {
            ++res.boundary_hits;
        } else if (d < r) {
            ++res.count;
            if (res.points.size() < opts.point_cap)
                res.points.push_back(shift ? lam - *shift : lam);
            else
                res.points_overflow = true;
        }
        return true;
    });
    return res;
}

CountResult counting_bounds(const Lattice& lattice, const Automorphism& alpha, double r, const MetricSpace& metric,
                            const MonteCarloOptions& mc, const CountOptions& opts) {
    CountResult res = enumerate(lattice, alpha, r, metric, opts);
    BoundInputs in;
    in.nu_alpha_ball_r = alpha.jacobian() * metric.ball_measure(r);
    in.nu_alpha_ball_2r = alpha.jacobian() * metric.ball_measure(2.0 * r);
    in.omega_r = overlap_measure(lattice, metric, alpha, r, mc);
    const double w = in.omega_r.value;
    if (!(w > 3.0 * in.omega_r.std_error) || w <= 0.0)
        throw DegenerateDomainError("counting_bounds: overlap measure " + std::to_string(w) +
                                    " is indistinguishable from zero");
    const double s = in.omega_r.std_error;
    res.upper_bound = in.nu_alpha_ball_2r / w;
    res.upper_error = in.nu_alpha_ball_2r * s / (w * w);
    res.lower_bound_at_2r = in.nu_alpha_ball_r / w;
    res.lower_error = in.nu_alpha_ball_r * s / (w * w);
    res.inputs = in;
    return res;
}

PropertyXReport property_x_scan(const AutomorphismFamily& family, const Lattice& lattice, const MetricSpace& metric,
                                double r, double M, const PropertyXOptions& opts) {
    require(r > 0.0 && M > 0.0, "property_x_scan: r and M must be positive");
    require(opts.explosion_factor > 1.0, "property_x_scan: explosion factor must exceed 1");
    const auto all = family.members(opts.workers);
    std::vector<const FamilyMember*> scanned;
    for (const auto& m : all)
        if (m.lip.upper > M) scanned.push_back(&m);
    require(!scanned.empty(), "property_x_scan: no member with L(h) > M in the truncation");

    PropertyXReport rep;
    rep.r = r;
    rep.M = M;
    rep.trace.resize(scanned.size());
    parallel_for(static_cast<long>(scanned.size()), opts.workers, [&](long i) {
        const FamilyMember& m = *scanned[static_cast<std::size_t>(i)];
        CountOptions co = opts.count;
        co.point_cap = 0;
        const CountResult c = enumerate(lattice, m.alpha, r, metric, co);
        ScanRow& row = rep.trace[static_cast<std::size_t>(i)];
        row.index = m.index;
        row.param = m.param;
        row.L = m.lip.upper;
        row.lower = m.lip.lower;
        row.delta = m.jacobian;
        row.count = c.count;
        row.ratio = static_cast<double>(c.count - 1) / m.jacobian;
    });

    const ScanRow* best = &rep.trace.front();
    for (const ScanRow& row : rep.trace)
        if (row.ratio >= best->ratio) best = &row;  // ties go to the later index
    rep.C = best->ratio;

    std::vector<const ScanRow*> by_L;
    for (const ScanRow& row : rep.trace) by_L.push_back(&row);
    std::stable_sort(by_L.begin(), by_L.end(), [](const ScanRow* a, const ScanRow* b) { return a->L < b->L; });
    std::vector<double> level_ratio;
    double level_L = -1.0;
    for (const ScanRow* row : by_L) {
        if (!level_ratio.empty() && std::abs(row->L - level_L) <= 1e-12 * level_L) {
            level_ratio.back() = std::max(level_ratio.back(), row->ratio);
        } else {
            level_ratio.push_back(row->ratio);
            level_L = row->L;
        }
    }
    const std::size_t nlev = level_ratio.size();
    const std::size_t q = std::max<std::size_t>(2, (nlev + 3) / 4);
    bool violated = false;
    if (nlev >= 2) {
        const std::size_t start = nlev >= q ? nlev - q : 0;
        bool increasing = true;
        for (std::size_t i = start + 1; i < nlev; ++i)
            if (!(level_ratio[i] > level_ratio[i - 1])) increasing = false;
        const double first = level_ratio[start], last = level_ratio.back();
        const bool explodes = first > 0.0 ? last >= opts.explosion_factor * first : last > 0.0;
        violated = increasing && explodes;
    }
    if (violated) {
        rep.verdict = PropertyXVerdict::violated;
        rep.witness = *best;
        rep.attempted_bound = 1.0 + rep.C * best->delta;
    } else {
        rep.verdict = PropertyXVerdict::holds;
    }
    return rep;
}

}  // namespace aff
