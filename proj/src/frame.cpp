#include "aff/frame.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>
#include <sstream>

#include "aff/numerics.hpp"

namespace aff {

std::string AdmissibleRegion::describe() const {
    if (kind == Kind::whole_space) return "whole space";
    std::ostringstream os;
    os << "modulation line k = " << kappa << ", eps < " << eps0;
    return os.str();
}

TestFunction make_test_function(const Vec& xi0, double eps, const MetricSpace& metric,
                                const AdmissibleRegion& region_in) {
    require(eps > 0.0 && std::isfinite(eps), "test function: eps must be positive");
    metric.check_point(xi0);
    TestFunction t;
    t.center = xi0;
    t.radius = eps;
    if (metric.is_gabor()) {
        t.region = region_in.kind == AdmissibleRegion::Kind::modulation_line
                       ? region_in
                       : AdmissibleRegion::modulation_line(1);
        require(eps < t.region.eps0, "test function: the gabor metric needs eps < 1");
        require(xi0[1] == t.region.kappa, "test function: centre is off the admissible modulation line");
        t.normalization = 1.0 / std::sqrt(metric.ball_measure(eps));
        t.profile = FrequencyProfile::piecewise_constant({{Vec{xi0[0] - eps}, Vec{xi0[0] + eps}}}, {t.normalization})
                        .on_modulation_line(t.region.kappa);
        return t;
    }
    require(region_in.kind == AdmissibleRegion::Kind::whole_space,
            "test function: modulation lines belong to the gabor group");
    t.region = region_in;
    require(eps < t.region.eps0, "test function: eps must be below eps0");
    const int n = metric.point_dim();
    t.normalization = 1.0 / std::sqrt(metric.ball_measure(eps));
    if (n == 1 || metric.kind() == MetricKind::euclidean_linf) {
        const Vec h(n, eps);
        t.profile = FrequencyProfile::piecewise_constant({{xi0 - h, xi0 + h}}, {t.normalization});
    } else {
        t.profile = FrequencyProfile::ball_indicator({xi0, eps, metric}, t.normalization);
    }
    return t;
}

namespace {

// One h-term on a euclidean base space: F(eta) = f(Ainv eta + c) psi(eta),
// delta^{-1} int_Omega |sum_lambda F(xi + lambda)|^2.
double term_core(const FrequencyProfile& psi, const FrequencyProfile& f, const Matrix& Ainv, const Vec& c,
                 double delta, const Lattice& lat, const FrameOptions& opts) {
    const int n = lat.rank();
    if (psi.is_zero() || f.is_zero()) return 0.0;
    const Matrix A = aff::inverse(Ainv);
    const Box fbox = image_box(A, f.base_support(), -1.0 * A.apply(c));
    const Box& pbox = psi.base_support();
    if (!closed_boxes_meet(fbox, pbox)) return 0.0;
    const Box supp = fbox.intersect(pbox);
    auto F = [&](const Vec& eta) {
        const double p = psi.eval_base(eta);
        return p == 0.0 ? 0.0 : p * f.eval_base(Ainv.apply(eta) + c);
    };

    if (n == 1) {
        std::vector<double> bps = psi.axis_breakpoints()[0];
        const auto fbps = f.axis_breakpoints();
        for (double b : fbps[0]) bps.push_back((b - c[0]) / Ainv(0, 0));
        if (opts.single_term) {
            std::vector<double> cuts{supp.lo[0], supp.hi[0]};
            for (double b : bps)
                if (b > supp.lo[0] && b < supp.hi[0]) cuts.push_back(b);
            return integrate_piecewise([&](double x) { const double v = F(Vec{x}); return v * v; }, cuts, 16) /
                   delta;
        }
        const double b = lat.basis()(0, 0);
        const double om_lo = std::min(0.0, b), om_hi = std::max(0.0, b);
        double u0 = supp.lo[0] / b, u1 = supp.hi[0] / b;
        if (u0 > u1) std::swap(u0, u1);
        std::vector<double> shifts;
        for (long m = static_cast<long>(std::floor(u0)) - 1; m <= static_cast<long>(std::floor(u1)) + 1; ++m)
            shifts.push_back(static_cast<double>(m) * b);
        std::vector<double> cuts{om_lo, om_hi};
        for (double l : shifts)
            for (double t : bps) {
                const double y = t - l;
                if (y > om_lo && y < om_hi) cuts.push_back(y);
            }
        auto G = [&](double x) {
            CompensatedSum s;
            for (double l : shifts) s.add(F(Vec{x + l}));
            const double v = s.value();
            return v * v;
        };
        return integrate_piecewise(G, cuts, 16) / delta;
    }

    require(n <= 4, "frame functional: dimension <= 4");
    if (opts.single_term) {
        return supp.volume() *
               integrate_unit_cube(
                   [&](std::span<const double> u) {
                       Vec x(n);
                       for (int i = 0; i < n; ++i) x[i] = supp.lo[i] + u[i] * (supp.hi[i] - supp.lo[i]);
                       const double v = F(x);
                       return v * v;
                   },
                   n, opts.cells, opts.order) /
               delta;
    }
    // int_Omega |sum_lambda F(x + lambda)|^2 = int F(eta) sum_mu F(eta + mu) over
    // the support box; mu ranges over differences of lattice shifts meeting it.
    Box diff{supp.lo - supp.hi, supp.hi - supp.lo};
    const Box ubox = image_box(lat.inverse_basis(), diff, Vec(n));
    std::vector<std::pair<long, long>> ranges;
    for (int i = 0; i < n; ++i)
        ranges.push_back({static_cast<long>(std::floor(ubox.lo[i])), static_cast<long>(std::ceil(ubox.hi[i]))});
    require(Lattice::range_volume(ranges) <= 1'000'000, "frame functional: too many lattice shifts");
    std::vector<Vec> shifts;
    for_each_integer_point(ranges, [&](std::span<const long> m) {
        const Vec mu = lat.point(m);
        Box moved{supp.lo + mu, supp.hi + mu};
        if (closed_boxes_meet(moved, supp)) shifts.push_back(mu);
        return true;
    });
    return supp.volume() *
           integrate_unit_cube(
               [&](std::span<const double> u) {
                   Vec x(n);
                   for (int i = 0; i < n; ++i) x[i] = supp.lo[i] + u[i] * (supp.hi[i] - supp.lo[i]);
                   const double v = F(x);
                   if (v == 0.0) return 0.0;
                   CompensatedSum s;
                   for (const Vec& mu : shifts) s.add(F(x + mu));
                   return v * s.value();
               },
               n, opts.cells, opts.order) /
           delta;
}

struct GaborSetup {
    FrequencyProfile psi, f;  // base profiles on the modulation line of f
    int kappa = 1;
    bool disjoint = false;    // psi lives on another line
    Lattice base;
};

GaborSetup gabor_setup(const FrequencyProfile& psi, const FrequencyProfile& f, const Lattice& lattice) {
    require(f.modulation_index().has_value(), "frame functional: gabor test profiles must be lifted to a line");
    GaborSetup g;
    g.kappa = *f.modulation_index();
    g.f = f.base_profile();
    g.psi = psi.base_profile();
    g.disjoint = psi.modulation_index().has_value() && *psi.modulation_index() != g.kappa;
    require(g.psi.base_dim() == 1 && g.f.base_dim() == 1, "frame functional: gabor profiles are one-dimensional");
    g.base = Lattice::from_basis(lattice.basis());
    return g;
}

double gabor_term(const GaborSetup& g, const Automorphism& alpha, const FrameOptions& opts) {
    if (g.disjoint) return 0.0;
    // alpha^{-1}(eta, kappa) = (a eta + b kappa, kappa) for k-preserving maps.
    const Matrix& inv = alpha.backward();
    return term_core(g.psi, g.f, Matrix{{inv(0, 0)}}, Vec{inv(0, 1) * g.kappa}, alpha.jacobian(), g.base, opts);
}

bool in_level(LevelSet level, double L, double M) {
    if (level == LevelSet::below) return L < M;
    if (level == LevelSet::above) return !(L < M);
    return true;
}

}  // namespace

double frame_term(const FrequencyProfile& psi, const Automorphism& alpha, const Lattice& lattice,
                  const FrequencyProfile& f, const FrameOptions& opts) {
    if (lattice.is_gabor()) return gabor_term(gabor_setup(psi, f, lattice), alpha, opts);
    require(psi.dim() == lattice.dim() && f.dim() == lattice.dim() && alpha.dim() == lattice.dim(),
            "frame_term: dimensions differ");
    return term_core(psi, f, alpha.backward(), Vec(lattice.dim()), alpha.jacobian(), lattice, opts);
}

FrameValue frame_functional(const FrequencyProfile& psi, const AutomorphismFamily& family, const Lattice& lattice,
                            const FrequencyProfile& f, const FrameOptions& opts) {
    const MetricSpace& metric = family.metric();
    require(metric.is_gabor() == lattice.is_gabor(), "frame functional: gabor family needs the gabor lattice");
    require(opts.level == LevelSet::all || opts.M > 0.0, "frame functional: M must be positive");
    FrameValue out;
    out.method = lattice.rank() == 1 ? "exact_breakpoints" : "tensor_quadrature";
    if (psi.is_zero() || f.is_zero()) return out;

    if (metric.is_gabor()) {
        const GaborSetup g = gabor_setup(psi, f, lattice);
        std::vector<std::pair<double, long>> params;
        if (family.index_kind() == IndexKind::real_grid) {
            for (std::size_t i = 0; i < family.grid_a().size(); ++i) params.push_back({family.grid_a()[i], long(i)});
        } else {
            const double c = g.kappa * family.step();
            const Box& sb = g.psi.base_support();
            const Box& fb = g.f.base_support();
            const auto w1 = gabor_index_window(fb.lo[0], c, sb.lo[0], sb.hi[0]);
            const auto w2 = gabor_index_window(fb.hi[0], c, sb.lo[0], sb.hi[0]);
            const long lo = std::max(family.j_min(), std::min(w1.first, w2.first));
            const long hi = std::min(family.j_max(), std::max(w1.second, w2.second));
            for (long j = lo; j <= hi; ++j) params.push_back({family.step() * static_cast<double>(j), j});
        }
        CompensatedSum s;
        for (const auto& [p, j] : params) {
            if (!in_level(opts.level, 1.0 + std::abs(p), opts.M)) continue;
            const double v = gabor_term(g, Automorphism::gabor_shift(p), opts);
            if (v == 0.0) continue;
            s.add(family.weight()(p, j) * v);
            ++out.terms;
        }
        out.value = s.value();
        return out;
    }

    require(psi.dim() == lattice.dim() && f.dim() == lattice.dim(), "frame functional: dimensions differ");
    const Vec zero(lattice.dim());

    if (family.index_kind() == IndexKind::real_grid) {
        const auto pts = family.grid_points();
        CompensatedSum s;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const Automorphism a = family.automorphism_for(pts[i]);
            if (opts.level != LevelSet::all && !in_level(opts.level, lipschitz_constants(a, metric).upper, opts.M))
                continue;
            const double v = frame_term(psi, a, lattice, f, opts);
            if (v == 0.0) continue;
            s.add(family.weight()(pts[i][0], static_cast<long>(i)) * v);
            ++out.terms;
        }
        out.value = s.value();
        return out;
    }

    const double dmin = box_min_norm(metric, f.support()), dmax = box_max_norm(metric, f.support());
    const auto [r_in, R_out] = support_radii(psi, metric);

    if (family.index_kind() == IndexKind::continuous) {
        const int n = lattice.dim();
        double lo = family.a_min(), hi = family.a_max();
        if (opts.level == LevelSet::above) lo = std::max(lo, opts.M);
        if (opts.level == LevelSet::below) hi = std::min(hi, opts.M);
        if (dmax > 0.0) lo = std::max(lo, r_in / dmax * (1.0 - 1e-12));
        if (dmin > 0.0) hi = std::min(hi, R_out / dmin * (1.0 + 1e-12));
        if (!(lo < hi)) return out;
        std::vector<double> cuts{lo, hi};
        if (n == 1) {
            const auto pb = psi.axis_breakpoints(), fb = f.axis_breakpoints();
            for (double bp : pb[0])
                for (double bf : fb[0])
                    if (bf != 0.0 && bp / bf > lo && bp / bf < hi) cuts.push_back(bp / bf);
        }
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        auto g = [&](double a) {
            const Automorphism d = Automorphism::matrix(Matrix::diag(std::vector<double>(n, a)));
            return family.weight()(a, 0) * frame_term(psi, d, lattice, f, opts);
        };
        CompensatedSum s;
        for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
            const QuadratureResult q =
                integrate_adaptive(g, cuts[c], cuts[c + 1], std::max(opts.orbit.rel_tol, 1e-9), 14);
            s.add(q.value);
            out.terms += q.cells;
            if (!q.converged) {
                out.certified = false;
                out.note = "adaptive quadrature over the parameter did not reach the tolerance";
            }
        }
        out.value = s.value();
        return out;
    }

    PowerWalkBounds wb;
    wb.dmin = dmin;
    wb.dmax = dmax;
    wb.r_in = r_in;
    wb.R_out = R_out;
    wb.level = opts.level;
    wb.M = opts.M;
    const double det = std::abs(determinant(family.base()));
    const PowerWalkResult w = walk_powers(family, wb, opts.orbit, [&](long j, const Matrix& Aj) {
        if (!closed_boxes_meet(image_box(Aj, f.support(), zero), psi.support())) return 0.0;
        const double v = term_core(psi, f, aff::inverse(Aj), zero, std::pow(det, static_cast<double>(j)), lattice, opts);
        return family.weight()(static_cast<double>(j), j) * v;
    });
    out.value = w.value;
    out.terms = w.terms;
    out.certified = w.certified && !w.divergent;
    out.note = w.note;
    return out;
}

double single_term_threshold(const Automorphism& alpha, double L, const Lattice& lattice, const MetricSpace& metric,
                             const Vec& xi0) {
    require(L > 0.0, "single_term_threshold: L must be positive");
    const Vec y = alpha.apply(xi0);
    if (lattice.is_gabor()) {
        const double b = lattice.basis()(0, 0);
        const double u = y[0] / b;
        const double fr = u - std::floor(u);
        return std::min(fr, 1.0 - fr) * std::abs(b) / L;
    }
    const Matrix& inv = lattice.inverse_basis();
    const int n = lattice.rank();
    const Vec u = inv.apply(y);
    double best = INFINITY;
    for (int i = 0; i < n; ++i) {
        const double fr = u[i] - std::floor(u[i]);
        // Distance to the plane {(B^-1 x)_i = const} in the metric is the
        // coordinate gap over the dual norm of row i.
        double dual = 0.0;
        for (int j = 0; j < n; ++j) {
            const double r = inv(i, j);
            dual = metric.kind() == MetricKind::euclidean_linf ? dual + std::abs(r) : dual + r * r;
        }
        if (metric.kind() != MetricKind::euclidean_linf) dual = std::sqrt(dual);
        best = std::min(best, std::min(fr, 1.0 - fr) / dual);
    }
    return best / L;
}

namespace {

// Smallest single-term threshold over the members of H_M whose image of the
// test set can meet the support.
double h_m_threshold(const FrequencyProfile& psi, const AutomorphismFamily& family, const Lattice& lattice,
                     const TestFunction& t, double M, const OrbitOptions& orbit) {
    const MetricSpace& metric = family.metric();
    double best = INFINITY;
    auto visit = [&](const Automorphism& a) {
        const LipschitzConstants lc = lipschitz_constants(a, metric);
        if (!(lc.upper < M)) return;
        if (!lattice.is_gabor() &&
            !closed_boxes_meet(image_box(a.forward(), t.profile.support(), Vec(lattice.dim())), psi.support()))
            return;
        best = std::min(best, single_term_threshold(a, lc.upper, lattice, metric, t.center));
    };
    if (family.index_kind() == IndexKind::real_grid) {
        for (const auto& p : family.grid_points()) visit(family.automorphism_for(p));
    } else if (family.index_kind() == IndexKind::integer_range && family.generator() == GeneratorKind::gabor_shift) {
        const Box& sb = psi.base_support();
        const double c = t.center[1] * family.step();
        const auto w = gabor_index_window(t.center[0], c, sb.lo[0] - t.radius, sb.hi[0] + t.radius);
        for (long j = std::max(w.first, family.j_min()); j <= std::min(w.second, family.j_max()); ++j)
            visit(Automorphism::gabor_shift(family.step() * static_cast<double>(j)));
    } else if (family.index_kind() == IndexKind::integer_range) {
        PowerWalkBounds wb;
        wb.dmin = box_min_norm(metric, t.profile.support());
        wb.dmax = box_max_norm(metric, t.profile.support());
        std::tie(wb.r_in, wb.R_out) = support_radii(psi, metric);
        wb.level = LevelSet::below;
        wb.M = M;
        walk_powers(family, wb, orbit, [&](long, const Matrix& Aj) {
            visit(Automorphism::matrix(Aj));
            return 0.0;
        });
    }
    return best;
}

}  // namespace

FrameReport calderon_inequality_report(const FrequencyProfile& psi, const AutomorphismFamily& family,
                                       const Lattice& lattice, const std::vector<Vec>& grid, double A, double B,
                                       double M, const FrameReportOptions& opts) {
    require(!grid.empty(), "calderon_inequality_report: empty grid");
    require(A <= B && M > 0.0, "calderon_inequality_report: need A <= B and M > 0");
    const MetricSpace& metric = family.metric();
    for (const Vec& xi : grid) {
        metric.check_point(xi);
        require(metric.norm(xi) > opts.exclusion_radius,
                "calderon_inequality_report: grid point " + xi.str() + " is within the exclusion radius of e");
    }
    FrameReport rep;
    rep.A = A;
    rep.B = B;
    rep.M = M;
    rep.property_x_C = opts.property_x_C;
    rep.grid.resize(grid.size());
    parallel_for(static_cast<long>(grid.size()), opts.workers, [&](long i) {
        const Vec& xi = grid[static_cast<std::size_t>(i)];
        const CalderonEvaluation e = calderon_sum(psi, family, xi, opts.orbit);
        GridVerdict& g = rep.grid[static_cast<std::size_t>(i)];
        g.xi = xi;
        g.value = e.value;
        g.certified = e.certified && !e.divergent;
        g.pass_lower = !e.divergent && e.value >= A - opts.tolerance;
        g.pass_upper = !e.divergent && e.value <= B + opts.tolerance;
    });
    rep.min_value = INFINITY;
    rep.max_value = -INFINITY;
    for (const GridVerdict& g : rep.grid) {
        rep.min_value = std::min(rep.min_value, g.value);
        rep.max_value = std::max(rep.max_value, g.value);
        rep.lower_failures += !g.pass_lower;
        rep.upper_failures += !g.pass_upper;
    }

    if (!opts.property_x_C) {
        rep.note = "remainder check skipped: no Property X constant supplied";
    } else {
        std::vector<Vec> pts = opts.remainder_points;
        if (pts.empty()) {
            const std::size_t n = grid.size();
            for (std::size_t q : {n / 4, n / 2, (3 * n) / 4}) pts.push_back(grid[std::min(q, n - 1)]);
        }
        const double eps = opts.remainder_eps;
        for (const Vec& x0 : pts) {
            RemainderCheck rc;
            rc.xi0 = x0;
            rc.eps = eps;
            FrequencyProfile p = psi;
            Box K;
            if (metric.is_gabor()) {
                if (!p.modulation_index()) p = psi.on_modulation_line(static_cast<int>(x0[1]));
                K = {Vec{x0[0] - eps}, Vec{x0[0] + eps}};
            } else {
                const Vec h(metric.point_dim(), eps);
                K = {x0 - h, x0 + h};
            }
            const double vol = K.volume();
            rc.ball_average = orbit_box_integral(p, family, K, false, LevelSet::all, 0.0, opts.orbit).value / vol;
            rc.remainder =
                *opts.property_x_C / vol * orbit_box_integral(p, family, K, true, LevelSet::above, M, opts.orbit).value;
            // The test set is the linf box of radius eps; for l2 in dimension
            // >= 2 that differs from the metric ball, and the frame value below
            // uses the ball.
            const TestFunction t = make_test_function(x0, eps, metric);
            rc.frame_value = frame_functional(psi, family, lattice, t.profile, FrameOptions{opts.orbit}).value;
            rc.threshold = h_m_threshold(p, family, lattice, t, M, opts.orbit);
            rc.pass = A <= rc.ball_average + rc.remainder + opts.remainder_tolerance;
            rep.remainder.push_back(rc);
        }
    }
    rep.all_pass = rep.lower_failures == 0 && rep.upper_failures == 0;
    for (const RemainderCheck& rc : rep.remainder) rep.all_pass = rep.all_pass && rc.pass;
    return rep;
}

ProbeResult frame_bound_probe(const FrequencyProfile& psi, const AutomorphismFamily& family, const Lattice& lattice,
                              const std::vector<FrequencyProfile>& ensemble, const FrameOptions& opts, int workers) {
    require(!ensemble.empty(), "frame_bound_probe: empty ensemble");
    for (const FrequencyProfile& f : ensemble)
        require(std::abs(f.norm_squared() - 1.0) <= 1e-9, "frame_bound_probe: ensemble profiles must be unit-norm");
    ProbeResult r;
    r.values.resize(ensemble.size());
    parallel_for(static_cast<long>(ensemble.size()), workers, [&](long i) {
        r.values[static_cast<std::size_t>(i)] =
            frame_functional(psi, family, lattice, ensemble[static_cast<std::size_t>(i)], opts).value;
    });
    r.A_hat = *std::min_element(r.values.begin(), r.values.end());
    r.B_hat = *std::max_element(r.values.begin(), r.values.end());
    return r;
}

std::vector<FrequencyProfile> random_probe_ensemble(int count, const Box& band, std::uint64_t seed, int max_pieces,
                                                    std::optional<int> kappa) {
    require(count > 0 && max_pieces >= 1, "random_probe_ensemble: count and max_pieces must be positive");
    require(!band.empty(), "random_probe_ensemble: empty band");
    require(!kappa || band.dim() == 1, "random_probe_ensemble: gabor bands are one-dimensional");
    std::vector<FrequencyProfile> out;
    for (int e = 0; e < count; ++e) {
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(e)));
        const int pieces = static_cast<int>(rng.integer(1, max_pieces));
        std::vector<double> cuts{band.lo[0], band.hi[0]};
        for (int p = 1; p < pieces; ++p) cuts.push_back(rng.uniform(band.lo[0], band.hi[0]));
        std::sort(cuts.begin(), cuts.end());
        std::vector<Box> boxes;
        std::vector<double> values;
        double norm2 = 0.0;
        for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
            if (!(cuts[c] < cuts[c + 1])) continue;
            Box b = band;
            b.lo[0] = cuts[c];
            b.hi[0] = cuts[c + 1];
            const double v = rng.uniform(0.1, 1.0);
            norm2 += v * v * b.volume();
            boxes.push_back(b);
            values.push_back(v);
        }
        for (double& v : values) v /= std::sqrt(norm2);
        FrequencyProfile f = FrequencyProfile::piecewise_constant(std::move(boxes), std::move(values));
        out.push_back(kappa ? f.on_modulation_line(*kappa) : f);
    }
    return out;
}

}  // namespace aff
