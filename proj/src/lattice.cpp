#include "aff/lattice.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "aff/numerics.hpp"

namespace aff {

Lattice Lattice::from_basis(const Matrix& basis) {
    require(basis.square() && basis.rows() >= 1 && basis.rows() <= kMaxDim,
            "lattice: basis must be square with dim <= 8");
    Lattice l;
    l.basis_ = basis;
    l.inv_ = inverse(basis);
    l.covolume_ = std::abs(determinant(basis));
    require(l.covolume_ > 0.0 && std::isfinite(l.covolume_), "lattice: degenerate basis");
    return l;
}

Lattice Lattice::integer(int dim) { return from_basis(Matrix::identity(dim)); }

Lattice Lattice::annihilator_of(const Matrix& spatial_basis) {
    return from_basis(inverse(spatial_basis).transpose());
}

Lattice Lattice::gabor(double spacing) {
    require(spacing != 0.0 && std::isfinite(spacing), "gabor lattice: spacing must be nonzero");
    Lattice l = from_basis(Matrix{{spacing}});
    l.gabor_ = true;
    return l;
}

Vec Lattice::point(std::span<const long> m) const {
    require(static_cast<int>(m.size()) == rank(), "lattice point: wrong coordinate count");
    Vec x(dim());
    for (int i = 0; i < rank(); ++i) {
        double acc = 0.0;
        for (int j = 0; j < rank(); ++j) acc += basis_(i, j) * static_cast<double>(m[j]);
        x[i] = acc;
    }
    return x;
}

Vec Lattice::coordinates(const Vec& xi) const {
    Vec c(rank());
    for (int i = 0; i < rank(); ++i) {
        double acc = 0.0;
        for (int j = 0; j < rank(); ++j) acc += inv_(i, j) * xi[j];
        c[i] = acc;
    }
    return c;
}

Vec Lattice::omega_point(std::span<const double> u, double k) const {
    Vec x(dim());
    for (int i = 0; i < rank(); ++i) {
        double acc = 0.0;
        for (int j = 0; j < rank(); ++j) acc += basis_(i, j) * u[j];
        x[i] = acc;
    }
    if (gabor_) x[1] = k;
    return x;
}

Lattice::Reduction Lattice::reduce(const Vec& xi) const {
    require(xi.dim() == dim(), "lattice reduce: dimension mismatch");
    Reduction r;
    const Vec c = coordinates(xi);
    r.m.resize(rank());
    for (int i = 0; i < rank(); ++i) r.m[i] = static_cast<long>(std::floor(c[i]));
    // Rounding can leave the remainder a hair outside [0,1); nudge by one step.
    for (int pass = 0; pass < 2; ++pass) {
        r.lambda = point(r.m);
        r.remainder = xi - r.lambda;
        const Vec u = coordinates(r.remainder);
        bool ok = true;
        for (int i = 0; i < rank(); ++i) {
            if (u[i] < 0.0) {
                --r.m[i];
                ok = false;
            } else if (u[i] >= 1.0) {
                ++r.m[i];
                ok = false;
            }
        }
        if (ok) break;
    }
    r.lambda = point(r.m);
    r.remainder = xi - r.lambda;
    return r;
}

bool Lattice::in_fundamental_domain(const Vec& xi) const {
    const Vec u = coordinates(xi);
    for (int i = 0; i < rank(); ++i)
        if (!(u[i] >= 0.0 && u[i] < 1.0)) return false;
    return true;
}

std::vector<std::pair<long, long>> Lattice::integer_ranges(const Vec& center, const Vec& halfwidth) {
    std::vector<std::pair<long, long>> out(center.dim());
    for (int i = 0; i < center.dim(); ++i) {
        const double slack = 1e-9 * (1.0 + std::abs(center[i]) + halfwidth[i]);
        const double lo = std::floor(center[i] - halfwidth[i] - slack);
        const double hi = std::ceil(center[i] + halfwidth[i] + slack);
        if (!(std::abs(lo) < 4e18 && std::abs(hi) < 4e18))
            throw ResourceError("lattice coordinate range overflows");
        out[i] = {static_cast<long>(lo), static_cast<long>(hi)};
    }
    return out;
}

long Lattice::range_volume(const std::vector<std::pair<long, long>>& ranges) {
    constexpr long cap = 1L << 62;
    long v = 1;
    for (const auto& [lo, hi] : ranges) {
        const long n = hi - lo + 1;
        if (n <= 0) return 0;
        if (v > cap / n) return cap;
        v *= n;
    }
    return v;
}

bool for_each_integer_point(const std::vector<std::pair<long, long>>& ranges,
                            const std::function<bool(std::span<const long>)>& fn) {
    const int n = static_cast<int>(ranges.size());
    for (const auto& [lo, hi] : ranges)
        if (hi < lo) return true;
    std::vector<long> m(n);
    for (int i = 0; i < n; ++i) m[i] = ranges[i].first;
    for (;;) {
        if (!fn(m)) return false;
        int i = n - 1;
        while (i >= 0) {
            if (++m[i] <= ranges[i].second) break;
            m[i] = ranges[i].first;
            --i;
        }
        if (i < 0) return true;
    }
}

namespace {

// Lattice coordinate window containing Binv * (support box - Omega).
std::vector<std::pair<long, long>> shift_ranges(const Box& support, const Lattice& lattice) {
    const int n = lattice.rank();
    const Matrix& inv = lattice.inverse_basis();
    Vec c(n), h(n);
    for (int i = 0; i < n; ++i) {
        double ci = 0.0, hi = 0.0;
        for (int j = 0; j < n; ++j) {
            ci += inv(i, j) * 0.5 * (support.lo[j] + support.hi[j]);
            hi += std::abs(inv(i, j)) * 0.5 * (support.hi[j] - support.lo[j]);
        }
        // m = Binv s - u with u in [0,1)^n.
        c[i] = ci - 0.5;
        h[i] = hi + 0.5;
    }
    return Lattice::integer_ranges(c, h);
}

}  // namespace

Periodization::Periodization(const FrequencyProfile& phi, const Lattice& lattice) : phi_(&phi) {
    require(phi.dim() == lattice.dim(), "periodize: profile and lattice dimensions differ");
    if (lattice.is_gabor())
        require(phi.modulation_index().has_value(), "periodize: gabor lattice needs a lifted profile");
    if (phi.is_zero()) return;
    const Box& s = phi.base_support();
    for (int i = 0; i < s.dim(); ++i)
        require(std::isfinite(s.lo[i]) && std::isfinite(s.hi[i]), "periodize: unbounded support");
    const auto ranges = shift_ranges(s, lattice);
    if (Lattice::range_volume(ranges) > 50'000'000)
        throw ResourceError("periodize: too many lattice shifts");
    for_each_integer_point(ranges, [&](std::span<const long> m) {
        shifts_.push_back(lattice.point(m));
        return true;
    });
}

double Periodization::operator()(const Vec& xi) const {
    CompensatedSum s;
    for (const Vec& l : shifts_) s.add((*phi_)(xi + l));
    return s.value();
}

Periodization periodize(const FrequencyProfile& phi, const Lattice& lattice) { return {phi, lattice}; }

namespace {

WeilResult weil_exact_1d(const FrequencyProfile& phi, const Lattice& lattice, int order) {
    const auto bps = phi.axis_breakpoints();
    const Periodization per(phi, lattice);
    const double b = lattice.basis()(0, 0);
    const double om_lo = std::min(0.0, b), om_hi = std::max(0.0, b);
    auto f = [&](double x) { return phi.eval_base(Vec{x}); };
    std::vector<double> inside{om_lo, om_hi};
    for (const Vec& l : per.shifts())
        for (double t : bps[0]) {
            const double y = t - l[0];
            if (y > om_lo && y < om_hi) inside.push_back(y);
        }
    auto g = [&](double x) {
        CompensatedSum s;
        for (const Vec& l : per.shifts()) s.add(phi.eval_base(Vec{x + l[0]}));
        return s.value();
    };
    WeilResult r;
    r.method = "exact_breakpoints";
    r.lhs = integrate_piecewise(f, bps[0], order);
    r.rhs = integrate_piecewise(g, inside, order);
    r.residual = std::abs(r.lhs - r.rhs);
    return r;
}

using Poly = std::vector<std::array<double, 2>>;

Poly clip_halfplane(const Poly& in, int axis, double bound, bool keep_above) {
    Poly out;
    const std::size_t n = in.size();
    auto inside = [&](const std::array<double, 2>& p) {
        return keep_above ? p[axis] >= bound : p[axis] <= bound;
    };
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = in[i];
        const auto& b = in[(i + 1) % n];
        const bool ia = inside(a), ib = inside(b);
        if (ia) out.push_back(a);
        if (ia != ib) {
            const double t = (bound - a[axis]) / (b[axis] - a[axis]);
            out.push_back({a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])});
        }
    }
    return out;
}

WeilResult weil_exact_2d(const FrequencyProfile& phi, const Lattice& lattice, int order) {
    const auto bps = phi.axis_breakpoints();
    const Periodization per(phi, lattice);
    const Matrix& inv = lattice.inverse_basis();
    const Matrix& basis = lattice.basis();
    const GaussRule& g = gauss_legendre(order);

    CompensatedSum lhs, rhs;
    // Strang-Fix three-point rule, exact for quadratics on a triangle.
    static constexpr double bary[3][3] = {{2.0 / 3, 1.0 / 6, 1.0 / 6},
                                          {1.0 / 6, 2.0 / 3, 1.0 / 6},
                                          {1.0 / 6, 1.0 / 6, 2.0 / 3}};
    for (std::size_t ix = 0; ix + 1 < bps[0].size(); ++ix)
        for (std::size_t iy = 0; iy + 1 < bps[1].size(); ++iy) {
            const double x0 = bps[0][ix], x1 = bps[0][ix + 1];
            const double y0 = bps[1][iy], y1 = bps[1][iy + 1];
            // Left side: tensor Gauss-Legendre on the cell.
            for (int a = 0; a < order; ++a)
                for (int c = 0; c < order; ++c) {
                    const double x = x0 + 0.5 * (x1 - x0) * (1.0 + g.nodes[a]);
                    const double y = y0 + 0.5 * (y1 - y0) * (1.0 + g.nodes[c]);
                    lhs.add(0.25 * (x1 - x0) * (y1 - y0) * g.weights[a] * g.weights[c] *
                            phi.eval_base(Vec{x, y}));
                }
            // Right side: pieces of (cell - lambda) inside Omega, in unit-cube coordinates.
            for (const Vec& l : per.shifts()) {
                Poly poly;
                for (auto [px, py] : {std::pair{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}) {
                    const double dx = px - l[0], dy = py - l[1];
                    poly.push_back({inv(0, 0) * dx + inv(0, 1) * dy, inv(1, 0) * dx + inv(1, 1) * dy});
                }
                for (int axis = 0; axis < 2 && poly.size() >= 3; ++axis) {
                    poly = clip_halfplane(poly, axis, 0.0, true);
                    if (poly.size() >= 3) poly = clip_halfplane(poly, axis, 1.0, false);
                }
                if (poly.size() < 3) continue;
                for (std::size_t t = 1; t + 1 < poly.size(); ++t) {
                    const auto& p0 = poly[0];
                    const auto& p1 = poly[t];
                    const auto& p2 = poly[t + 1];
                    const double area = 0.5 * std::abs((p1[0] - p0[0]) * (p2[1] - p0[1]) -
                                                       (p2[0] - p0[0]) * (p1[1] - p0[1]));
                    if (area == 0.0) continue;
                    for (const auto& w : bary) {
                        const double u0 = w[0] * p0[0] + w[1] * p1[0] + w[2] * p2[0];
                        const double u1 = w[0] * p0[1] + w[1] * p1[1] + w[2] * p2[1];
                        const Vec x{basis(0, 0) * u0 + basis(0, 1) * u1 + l[0],
                                    basis(1, 0) * u0 + basis(1, 1) * u1 + l[1]};
                        rhs.add(area / 3.0 * lattice.covolume() * phi.eval_base(x));
                    }
                }
            }
        }
    WeilResult r;
    r.method = "exact_cells";
    r.lhs = lhs.value();
    r.rhs = rhs.value();
    r.residual = std::abs(r.lhs - r.rhs);
    return r;
}

WeilResult weil_tensor(const FrequencyProfile& phi, const Lattice& lattice, int cells, int order) {
    const Box& s = phi.base_support();
    const int n = lattice.rank();
    require(n <= 4, "weil_check: tensor quadrature supports dimension <= 4");
    const Periodization per(phi, lattice);
    WeilResult r;
    r.method = "tensor_quadrature";
    r.lhs = s.volume() * integrate_unit_cube(
                             [&](std::span<const double> u) {
                                 Vec x(n);
                                 for (int i = 0; i < n; ++i) x[i] = s.lo[i] + u[i] * (s.hi[i] - s.lo[i]);
                                 return phi.eval_base(x);
                             },
                             n, cells, order);
    r.rhs = lattice.covolume() * integrate_unit_cube(
                                     [&](std::span<const double> u) {
                                         const Vec x = lattice.omega_point(u);
                                         CompensatedSum acc;
                                         for (const Vec& l : per.shifts()) acc.add(phi.eval_base(x + l));
                                         return acc.value();
                                     },
                                     n, cells, order);
    r.residual = std::abs(r.lhs - r.rhs);
    return r;
}

}  // namespace

WeilResult weil_check(const FrequencyProfile& phi, const Lattice& lattice, const WeilOptions& opts) {
    require(opts.cells >= 1 && opts.order >= 1, "weil_check: cells and order must be positive");
    // The Gabor lattice only acts on the base line; the modulation slice rides along.
    if (lattice.is_gabor()) {
        require(phi.modulation_index().has_value(), "weil_check: gabor lattice needs a lifted profile");
        return weil_check(phi.base_profile(), Lattice::from_basis(lattice.basis()), opts);
    }
    require(phi.dim() == lattice.dim(), "weil_check: profile and lattice dimensions differ");
    if (phi.is_zero()) return {0.0, 0.0, 0.0, "zero"};
    if (opts.method == WeilMethod::automatic) {
        const auto bps = phi.axis_breakpoints();
        const int order = std::max(opts.order, 2);
        if (phi.base_dim() == 1 && !bps.empty()) return weil_exact_1d(phi, lattice, order);
        if (phi.base_dim() == 2 && !bps.empty()) return weil_exact_2d(phi, lattice, order);
    }
    return weil_tensor(phi, lattice, opts.cells, opts.order);
}

Estimate overlap_measure(const Lattice& lattice, const MetricSpace& metric, const Automorphism& alpha,
                         double r, const MonteCarloOptions& opts) {
    require(r > 0.0 && std::isfinite(r), "overlap_measure: r must be positive");
    require(opts.samples >= 1, "overlap_measure: need at least one sample");
    require(metric.point_dim() == lattice.dim() && alpha.dim() == lattice.dim(),
            "overlap_measure: lattice, metric and automorphism dimensions differ");
    require(metric.is_gabor() == lattice.is_gabor(), "overlap_measure: gabor lattice needs the gabor metric");

    const int n = lattice.rank();
    const Matrix& ainv = alpha.backward();
    const Vec ball_h = metric.ball_box_halfwidths(r);

    // Slices of Omega that can meet alpha B(e, r): all of Omega for euclidean
    // groups, the modulation indices |k| < r for the Gabor group.
    std::vector<double> slices{0.0};
    if (lattice.is_gabor()) {
        slices.clear();
        const long kmax = static_cast<long>(ball_h[1]);
        for (long k = -kmax; k <= kmax; ++k) slices.push_back(static_cast<double>(k));
    }

    // Half-widths, in lattice coordinates, of Binv * alpha * (ball box).
    Vec coord_h(n);
    {
        const Matrix& a = alpha.forward();
        const Matrix& binv = lattice.inverse_basis();
        for (int i = 0; i < n; ++i) {
            double acc = 0.0;
            for (int j = 0; j < alpha.dim(); ++j) {
                double g = 0.0;  // (Binv * A)_ij on the continuous rows
                for (int q = 0; q < n; ++q) g += binv(i, q) * a(q, j);
                acc += std::abs(g) * ball_h[j];
            }
            coord_h[i] = acc;
        }
    }

    // Per slice, the lattice points whose translate of alpha B(e, r) can meet
    // Omega: |alpha^{-1}(c - lambda)| < r + R, where c is the centre of the
    // slice and R the metric circumradius of alpha^{-1}(Omega - c), attained
    // at a vertex by convexity. Sorted by that distance so hits exit early.
    constexpr long per_slice_cap = 5'000'000;
    std::vector<std::vector<Vec>> candidates(slices.size());
    for (std::size_t sl = 0; sl < slices.size(); ++sl) {
        std::array<double, kMaxDim> half{};
        for (int i = 0; i < n; ++i) half[i] = 0.5;
        const Vec c = lattice.omega_point(std::span<const double>(half.data(), n), slices[sl]);
        double R = 0.0;
        for (unsigned mask = 0; mask < (1u << n); ++mask) {
            std::array<double, kMaxDim> v{};
            for (int i = 0; i < n; ++i) v[i] = (mask >> i) & 1u ? 1.0 : 0.0;
            const Vec corner = lattice.omega_point(std::span<const double>(v.data(), n), slices[sl]);
            R = std::max(R, metric.norm(ainv.apply(corner - c)));
        }
        Vec centre_coords(n), reach(n);
        for (int i = 0; i < n; ++i) {
            centre_coords[i] = 0.5;
            reach[i] = coord_h[i] + 0.5;
        }
        const auto ranges = Lattice::integer_ranges(centre_coords, reach);
        if (Lattice::range_volume(ranges) > per_slice_cap)
            throw ResourceError("overlap_measure: candidate box exceeds " + std::to_string(per_slice_cap));
        const double limit = (r + R) * (1.0 + 1e-12);
        std::vector<std::pair<double, Vec>> kept;
        for_each_integer_point(ranges, [&](std::span<const long> m) {
            const Vec p = ainv.apply(lattice.point(m));
            const double d = metric.norm(ainv.apply(c) - p);
            if (d < limit) kept.emplace_back(d, p);
            return true;
        });
        std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        for (auto& k : kept) candidates[sl].push_back(k.second);
    }

    const long per_slice = std::max<long>(1, opts.samples / static_cast<long>(slices.size()));
    constexpr long chunk = 1 << 14;
    const long chunks_per_slice = (per_slice + chunk - 1) / chunk;
    const long total_chunks = chunks_per_slice * static_cast<long>(slices.size());
    std::vector<long> hits(total_chunks, 0);

    parallel_for(total_chunks, opts.workers, [&](long c) {
        const long slice = c / chunks_per_slice;
        const long within = c % chunks_per_slice;
        const long count = std::min(chunk, per_slice - within * chunk);
        const std::vector<Vec>& cand = candidates[slice];
        Rng rng(mix_seed(opts.seed, static_cast<std::uint64_t>(c)));
        std::array<double, kMaxDim> u{};
        long h = 0;
        for (long s = 0; s < count; ++s) {
            for (int i = 0; i < n; ++i) u[i] = rng.uniform();
            const Vec y = ainv.apply(lattice.omega_point(std::span<const double>(u.data(), n), slices[slice]));
            for (const Vec& p : cand)
                if (metric.norm(y - p) < r) {
                    ++h;
                    break;
                }
        }
        hits[c] = h;
    });

    Estimate e;
    double var = 0.0;
    for (std::size_t s = 0; s < slices.size(); ++s) {
        long h = 0, cnt = 0;
        for (long k = 0; k < chunks_per_slice; ++k) {
            const long c = static_cast<long>(s) * chunks_per_slice + k;
            h += hits[c];
            cnt += std::min(chunk, per_slice - k * chunk);
        }
        const double p = static_cast<double>(h) / static_cast<double>(cnt);
        e.value += lattice.covolume() * p;
        var += lattice.covolume() * lattice.covolume() * p * (1.0 - p) / static_cast<double>(cnt);
        e.samples += cnt;
    }
    e.std_error = std::sqrt(var);
    return e;
}

}  // namespace aff
