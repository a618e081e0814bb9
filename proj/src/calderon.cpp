#include "aff/calderon.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <map>

#include "aff/numerics.hpp"

namespace aff {

const char* to_string(LevelSet s) {
    switch (s) {
        case LevelSet::all: return "all";
        case LevelSet::below: return "below";
        case LevelSet::above: return "above";
    }
    return "?";
}

const char* to_string(IntegrabilityVerdict v) {
    return v == IntegrabilityVerdict::finite ? "finite" : "divergent";
}

double box_min_norm(const MetricSpace& metric, const Box& b) {
    Vec x(b.dim());
    for (int i = 0; i < b.dim(); ++i) x[i] = std::clamp(0.0, b.lo[i], b.hi[i]);
    return metric.norm(x);
}

double box_max_norm(const MetricSpace& metric, const Box& b) {
    const int n = b.dim();
    double best = 0.0;
    for (int mask = 0; mask < (1 << n); ++mask) {
        Vec x(n);
        for (int i = 0; i < n; ++i) x[i] = (mask >> i) & 1 ? b.hi[i] : b.lo[i];
        best = std::max(best, metric.norm(x));
    }
    return best;
}

namespace {

bool in_level(LevelSet level, double L, double M) {
    switch (level) {
        case LevelSet::all: return true;
        case LevelSet::below: return L < M;
        case LevelSet::above: return !(L < M);
    }
    return true;
}

}  // namespace

Box image_box(const Matrix& A, const Box& b, const Vec& t) {
    const int n = b.dim();
    const Vec c = b.center();
    Box out{Vec(n), Vec(n)};
    for (int i = 0; i < n; ++i) {
        double ci = t[i], hi = 0.0;
        for (int j = 0; j < n; ++j) {
            ci += A(i, j) * c[j];
            hi += std::abs(A(i, j)) * 0.5 * (b.hi[j] - b.lo[j]);
        }
        out.lo[i] = ci - hi;
        out.hi[i] = ci + hi;
    }
    return out;
}

bool closed_boxes_meet(const Box& a, const Box& b) {
    for (int i = 0; i < a.dim(); ++i)
        if (a.hi[i] < b.lo[i] || b.hi[i] < a.lo[i]) return false;
    return true;
}

namespace {

// Lipschitz constants usable in an exit certificate; nullopt unless closed form.
std::optional<LipschitzConstants> certified_lip(const Matrix& m, const MetricSpace& metric) {
    const LipschitzConstants c = lipschitz_constants(Automorphism::matrix(m), metric);
    if (c.method != LipschitzMethod::closed_form) return std::nullopt;
    return c;
}

using Poly = std::vector<std::array<double, 2>>;

Poly clip(const Poly& in, int axis, double bound, bool keep_above) {
    Poly out;
    const std::size_t n = in.size();
    auto inside = [&](const std::array<double, 2>& p) { return keep_above ? p[axis] >= bound : p[axis] <= bound; };
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = in[i];
        const auto& b = in[(i + 1) % n];
        const bool ia = inside(a), ib = inside(b);
        if (ia) out.push_back(a);
        if (ia != ib) {
            const double s = (bound - a[axis]) / (b[axis] - a[axis]);
            out.push_back({a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])});
        }
    }
    return out;
}

double polygon_area(const Poly& p) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const auto& a = p[i];
        const auto& b = p[(i + 1) % p.size()];
        s += a[0] * b[1] - b[0] * a[1];
    }
    return 0.5 * std::abs(s);
}

// Profile defined on the group points of the family: lifts a base-line window
// onto the modulation line of the Gabor point.
FrequencyProfile on_family_points(const FrequencyProfile& psi, const AutomorphismFamily& family, const Vec& xi) {
    const MetricSpace& metric = family.metric();
    metric.check_point(xi);
    if (!metric.is_gabor()) {
        require(psi.dim() == metric.point_dim(), "calderon: profile and family dimensions differ");
        return psi;
    }
    if (psi.modulation_index()) return psi;
    require(psi.dim() == 1, "calderon: gabor window must be one-dimensional");
    return psi.on_modulation_line(static_cast<int>(xi[1]));
}

PowerWalkResult walk_powers_impl(const AutomorphismFamily& family, const PowerWalkBounds& s, const OrbitOptions& opts,
                        const std::function<double(long, const Matrix&)>& term) {
    const MetricSpace& metric = family.metric();
    const Matrix& A = family.base();
    const long j0 = std::clamp(0L, family.j_min(), family.j_max());
    PowerWalkResult out;
    out.lo = out.hi = j0;
    std::map<long, double> contrib;
    CompensatedSum running;
    std::string notes;

    for (int dir : {+1, -1}) {
        const Matrix step = dir > 0 ? A : aff::inverse(A);
        const auto step_lip = certified_lip(step, metric);
        long j = dir > 0 ? j0 : j0 - 1;
        if (dir < 0 && j < family.j_min()) continue;
        Matrix cur = aff::matrix_power(A, j);
        const double logdet_step = std::log(std::abs(aff::determinant(step)));
        double logdet = static_cast<double>(j) * std::log(std::abs(aff::determinant(A)));
        CompensatedSum side;
        std::vector<double> blocks;  // dyadic block sums of this side
        CompensatedSum block;
        long n = 0, next_mark = 1, zero_run = 0;
        bool stopped = false;
        while (true) {
            if (dir > 0 ? j > family.j_max() : j < family.j_min()) {
                stopped = true;
                break;
            }
            double biggest = 0.0;
            for (int r = 0; r < cur.rows(); ++r)
                for (int c = 0; c < cur.cols(); ++c) biggest = std::max(biggest, std::abs(cur(r, c)));
            if (std::abs(logdet) > 600.0 || !(biggest < 1e150)) {
                out.certified = false;
                notes += "matrix power left the floating-point range; ";
                stopped = true;
                break;
            }
            const auto lip = certified_lip(cur, metric);
            double v = 0.0;
            const double L = lip ? lip->upper : lipschitz_constants(Automorphism::matrix(cur), metric).upper;
            if (in_level(s.level, L, s.M)) v = term(j, cur);
            if (v != 0.0) {
                contrib[j] = v;
                ++out.terms;
                zero_run = 0;
            } else {
                ++zero_run;
            }
            out.lo = std::min(out.lo, j);
            out.hi = std::max(out.hi, j);
            side.add(v);
            block.add(v);
            running.add(v);
            ++n;
            if (n == next_mark) {
                blocks.push_back(block.value());
                block = CompensatedSum{};
                out.trace.push_back({n * dir, side.value()});
                next_mark *= 2;
            }
            if (!(std::abs(running.value()) <= opts.divergence_cap)) {
                out.divergent = true;
                notes += "partial sum passed the divergence cap; ";
                break;
            }
            if (lip && step_lip) {
                const bool outward = step_lip->lower >= 1.0 && lip->lower * s.dmin > s.R_out * (1.0 + 1e-12);
                const bool inward = step_lip->upper <= 1.0 && lip->upper * s.dmax < s.r_in * (1.0 - 1e-12);
                if (outward || inward) {
                    stopped = true;
                    break;
                }
            }
            // No certificate is available when the step both expands and
            // contracts; stop after a long run of vanishing terms instead.
            if (!(step_lip && (step_lip->lower >= 1.0 || step_lip->upper <= 1.0)) && zero_run >= 64) {
                out.certified = false;
                notes += "heuristic stop after 64 vanishing terms; ";
                stopped = true;
                break;
            }
            if (n >= opts.max_terms) {
                const std::size_t b = blocks.size();
                bool growing = b >= 4;
                for (std::size_t k = b >= 3 ? b - 3 : 0; growing && k < b; ++k)
                    growing = blocks[k] > 0.0 && blocks[k] >= 0.75 * blocks[k - 1];
                out.certified = false;
                if (growing) {
                    out.divergent = true;
                    notes += "dyadic block sums are not decaying; ";
                } else {
                    notes += "max_terms reached without an exit certificate; ";
                }
                break;
            }
            j += dir;
            cur = step * cur;
            logdet += logdet_step;
        }
        if (!stopped) out.certified = false;
        if (out.divergent) break;
    }
    CompensatedSum total;
    for (const auto& [j, v] : contrib) total.add(v);
    out.value = out.divergent ? running.value() : total.value();
    if (!notes.empty()) notes.resize(notes.size() - 2);
    out.note = notes;
    return out;
}

void support_radii_impl(const FrequencyProfile& psi, const MetricSpace& metric, double& r_in, double& R_out) {
    const Box s = psi.support();
    r_in = box_min_norm(metric, s);
    R_out = box_max_norm(metric, s);
    if (psi.modulation_index()) return;
    if (psi.kind() == ProfileKind::piecewise_constant) {
        double m = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < psi.boxes().size(); ++i)
            if (psi.values()[i] != 0.0) m = std::min(m, box_min_norm(metric, psi.boxes()[i]));
        if (std::isfinite(m)) r_in = std::max(r_in, m);
    } else if (psi.kind() == ProfileKind::ball_indicator && psi.ball()->metric == metric) {
        r_in = std::max(r_in, metric.norm(psi.ball()->center) - psi.ball()->radius);
    }
}

double weight_of(const AutomorphismFamily& f, const std::vector<double>& param, long index) {
    return f.weight()(param.at(0), index);
}

// Values of a at which a * xi crosses a discontinuity or kink of psi.
std::vector<double> dilation_breakpoints(const FrequencyProfile& psi, const Vec& xi) {
    std::vector<double> out;
    const auto bps = psi.axis_breakpoints();
    for (std::size_t i = 0; i < bps.size(); ++i)
        if (xi[static_cast<int>(i)] != 0.0)
            for (double b : bps[i]) out.push_back(b / xi[static_cast<int>(i)]);
    if (psi.kind() == ProfileKind::ball_indicator && psi.base_dim() >= 2) {
        const Ball& ball = *psi.ball();
        if (ball.metric.kind() == MetricKind::euclidean_l2) {
            double xx = 0.0, xc = 0.0, cc = 0.0;
            for (int i = 0; i < xi.dim(); ++i) {
                xx += xi[i] * xi[i];
                xc += xi[i] * ball.center[i];
                cc += ball.center[i] * ball.center[i];
            }
            const double disc = xc * xc - xx * (cc - ball.radius * ball.radius);
            if (xx > 0.0 && disc >= 0.0) {
                out.push_back((xc - std::sqrt(disc)) / xx);
                out.push_back((xc + std::sqrt(disc)) / xx);
            }
        } else {
            for (int i = 0; i < xi.dim(); ++i)
                if (xi[i] != 0.0) {
                    out.push_back((ball.center[i] - ball.radius) / xi[i]);
                    out.push_back((ball.center[i] + ball.radius) / xi[i]);
                }
        }
    }
    return out;
}

CalderonEvaluation continuous_orbit(const FrequencyProfile& psi, const AutomorphismFamily& family, const Vec& xi,
                                    bool jac, LevelSet level, double M, const OrbitOptions& opts) {
    const MetricSpace& metric = family.metric();
    const int n = metric.point_dim();
    double lo = family.a_min(), hi = family.a_max();
    // L(a) = a for a dilation in every euclidean metric.
    if (level == LevelSet::above) lo = std::max(lo, M);
    if (level == LevelSet::below) hi = std::min(hi, M);
    const double d = metric.norm(xi);
    if (d > 0.0) {
        double r_in, R_out;
        support_radii_impl(psi, metric, r_in, R_out);
        lo = std::max(lo, r_in / d * (1.0 - 1e-12));
        hi = std::min(hi, R_out / d * (1.0 + 1e-12));
    }
    CalderonEvaluation ev;
    ev.xi = xi;
    ev.truncation_lo = lo;
    ev.truncation_hi = hi;
    if (!(lo < hi) || psi.is_zero()) {
        ev.truncation_hi = ev.truncation_lo;
        return ev;
    }
    std::vector<double> cuts{lo, hi};
    for (double a : dilation_breakpoints(psi, xi))
        if (a > lo && a < hi) cuts.push_back(a);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    const WeightSpec& w = family.weight();
    auto f = [&](double a) {
        const double v = psi(a * xi);
        const double base = w(a, 0) * v * v;
        return jac ? base * std::pow(a, n) : base;
    };
    CompensatedSum total;
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
        const QuadratureResult q = integrate_adaptive(f, cuts[c], cuts[c + 1], opts.rel_tol, 20);
        total.add(q.value);
        ev.quadrature_error += q.error_estimate;
        ev.terms += q.cells;
        if (!q.converged) ev.certified = false;
    }
    ev.value = total.value();
    if (!ev.certified) ev.note = "adaptive quadrature did not reach the tolerance";
    return ev;
}

}  // namespace

std::pair<long, long> gabor_index_window(double x, double c, double lo, double hi) {
    double a = (x - hi) / c, b = (x - lo) / c;
    if (a > b) std::swap(a, b);
    const double jl = std::floor(a) - 1.0, jh = std::ceil(b) + 1.0;
    require(std::abs(jl) < 4e18 && std::abs(jh) < 4e18, "gabor: index window out of range");
    return {static_cast<long>(jl), static_cast<long>(jh)};
}

PowerWalkResult walk_powers(const AutomorphismFamily& family, const PowerWalkBounds& bounds, const OrbitOptions& opts,
                            const std::function<double(long, const Matrix&)>& term) {
    require(family.index_kind() == IndexKind::integer_range && family.generator() == GeneratorKind::matrix_power,
            "walk_powers: integer matrix-power families only");
    return walk_powers_impl(family, bounds, opts, term);
}

CalderonEvaluation orbit_integral(const FrequencyProfile& psi_in, const AutomorphismFamily& family, const Vec& xi,
                                  bool jac, LevelSet level, double M, const OrbitOptions& opts) {
    require(level == LevelSet::all || M > 0.0, "orbit_integral: M must be positive");
    const FrequencyProfile psi = on_family_points(psi_in, family, xi);
    const MetricSpace& metric = family.metric();
    CalderonEvaluation ev;
    ev.xi = xi;
    if (psi.is_zero()) {
        ev.note = "zero profile";
        return ev;
    }

    if (family.index_kind() == IndexKind::continuous) return continuous_orbit(psi, family, xi, jac, level, M, opts);

    if (family.index_kind() == IndexKind::real_grid) {
        const auto pts = family.grid_points();
        CompensatedSum s;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const Automorphism a = family.automorphism_for(pts[i]);
            if (level != LevelSet::all && !in_level(level, lipschitz_constants(a, metric).upper, M)) continue;
            const double v = psi(a.apply(xi));
            if (v == 0.0) continue;
            s.add(weight_of(family, pts[i], static_cast<long>(i)) * (jac ? a.jacobian() : 1.0) * v * v);
            ++ev.terms;
        }
        ev.value = s.value();
        ev.truncation_hi = static_cast<double>(pts.size()) - 1.0;
        return ev;
    }

    const bool unbounded = family.unbounded_below() || family.unbounded_above();
    if (family.generator() == GeneratorKind::gabor_shift) {
        const long k = static_cast<long>(xi[1]);
        const double c = static_cast<double>(k) * family.step();
        std::pair<long, long> win{family.j_min(), family.j_max()};
        if (k == 0) {
            // Stationary orbit: every shift fixes (xi, 0).
            if (psi(xi) != 0.0 && unbounded)
                throw SingularPointError("calderon: the orbit of a k = 0 point is stationary under an unbounded "
                                         "gabor family");
            if (psi(xi) == 0.0) return ev;
        } else {
            const Box& sb = psi.base_support();
            const auto w = gabor_index_window(xi[0], c, sb.lo[0], sb.hi[0]);
            win = {std::max(win.first, w.first), std::min(win.second, w.second)};
        }
        CompensatedSum s;
        for (long j = win.first; j <= win.second; ++j) {
            const double p = family.step() * static_cast<double>(j);
            const Automorphism a = Automorphism::gabor_shift(p);
            if (!in_level(level, 1.0 + std::abs(p), M)) continue;
            const double v = psi(a.apply(xi));
            if (v == 0.0) continue;
            s.add(family.weight()(p, j) * v * v);
            ++ev.terms;
        }
        ev.value = s.value();
        ev.truncation_lo = static_cast<double>(win.first);
        ev.truncation_hi = static_cast<double>(win.second);
        return ev;
    }

    // Integer matrix powers.
    const double d = metric.norm(xi);
    if (d == 0.0 && unbounded && psi(xi) != 0.0)
        throw SingularPointError("calderon: xi = e with an unbounded family");
    PowerWalkBounds ws;
    ws.dmin = ws.dmax = d;
    support_radii_impl(psi, metric, ws.r_in, ws.R_out);
    ws.level = level;
    ws.M = M;
    const double det = std::abs(determinant(family.base()));
    const PowerWalkResult w = walk_powers(family, ws, opts, [&](long j, const Matrix& Aj) {
        const double v = psi(Aj.apply(xi));
        if (v == 0.0) return 0.0;
        const double delta = jac ? std::pow(det, static_cast<double>(j)) : 1.0;
        return family.weight()(static_cast<double>(j), j) * delta * v * v;
    });
    ev.value = w.value;
    ev.truncation_lo = static_cast<double>(w.lo);
    ev.truncation_hi = static_cast<double>(w.hi);
    ev.terms = w.terms;
    ev.certified = w.certified;
    ev.divergent = w.divergent;
    ev.trace = w.trace;
    ev.note = w.note;
    return ev;
}

CalderonEvaluation calderon_sum(const FrequencyProfile& psi, const AutomorphismFamily& family, const Vec& xi,
                                const OrbitOptions& opts) {
    return orbit_integral(psi, family, xi, false, LevelSet::all, 0.0, opts);
}

CalderonEvaluation psi_M(const FrequencyProfile& psi, const AutomorphismFamily& family, const Vec& xi, double M,
                         const OrbitOptions& opts) {
    require(M > 0.0, "psi_M: M must be positive");
    return orbit_integral(psi, family, xi, true, LevelSet::above, M, opts);
}

double pullback_square_integral(const FrequencyProfile& psi, const Matrix& A, const Vec& t, const Box& K, int cells,
                                int order) {
    const int n = K.dim();
    require(psi.base_dim() == n && A.rows() == n && A.cols() == n && t.dim() == n,
            "pullback_square_integral: dimensions differ");
    if (psi.is_zero() || K.empty()) return 0.0;
    auto f = [&](const Vec& x) {
        const double v = psi.eval_base(A.apply(x) + t);
        return v * v;
    };
    if (n == 1) {
        std::vector<double> cuts{K.lo[0], K.hi[0]};
        const auto bps = psi.axis_breakpoints();
        for (double b : bps[0]) {
            const double x = (b - t[0]) / A(0, 0);
            if (x > K.lo[0] && x < K.hi[0]) cuts.push_back(x);
        }
        return integrate_piecewise([&](double x) { return f(Vec{x}); }, cuts, 16);
    }
    if (n == 2 && psi.kind() == ProfileKind::piecewise_constant) {
        Poly img;
        for (auto [x, y] : {std::pair{K.lo[0], K.lo[1]}, {K.hi[0], K.lo[1]}, {K.hi[0], K.hi[1]}, {K.lo[0], K.hi[1]}}) {
            const Vec p = A.apply(Vec{x, y}) + t;
            img.push_back({p[0], p[1]});
        }
        CompensatedSum s;
        for (std::size_t b = 0; b < psi.boxes().size(); ++b) {
            const Box& box = psi.boxes()[b];
            Poly p = img;
            for (int axis = 0; axis < 2 && p.size() >= 3; ++axis) {
                p = clip(p, axis, box.lo[axis], true);
                if (p.size() >= 3) p = clip(p, axis, box.hi[axis], false);
            }
            if (p.size() < 3) continue;
            const double v = psi.values()[b];
            s.add(v * v * polygon_area(p));
        }
        return s.value() / std::abs(determinant(A));
    }
    require(n <= 4, "pullback_square_integral: dimension <= 4");
    return K.volume() * integrate_unit_cube(
                            [&](std::span<const double> u) {
                                Vec x(n);
                                for (int i = 0; i < n; ++i) x[i] = K.lo[i] + u[i] * (K.hi[i] - K.lo[i]);
                                return f(x);
                            },
                            n, cells, order);
}

IntegrabilityReport orbit_box_integral(const FrequencyProfile& psi_in, const AutomorphismFamily& family, const Box& K,
                                       bool jac, LevelSet level, double M, const OrbitOptions& opts) {
    require(level == LevelSet::all || M > 0.0, "orbit_box_integral: M must be positive");
    const MetricSpace& metric = family.metric();
    const int n = metric.continuous_dim();
    require(K.dim() == n, "local_integrability_check: K has the wrong dimension");
    require(!K.empty(), "local_integrability_check: K is empty");
    for (int i = 0; i < n; ++i) require(std::isfinite(K.lo[i]) && std::isfinite(K.hi[i]), "K must be bounded");

    IntegrabilityReport rep;
    const FrequencyProfile base = psi_in.base_profile();
    require(base.base_dim() == n, "local_integrability_check: profile and family dimensions differ");

    if (metric.is_gabor()) {
        // K lies on the profile's modulation line (k = 1 unless lifted elsewhere),
        // which never meets e = (0, 0).
        const int kappa = psi_in.modulation_index().value_or(1);
        require(kappa != 0, "local_integrability_check: the k = 0 line contains e");
        if (base.is_zero()) return rep;
        const Box& sb = base.base_support();
        std::vector<std::pair<double, long>> params;
        if (family.index_kind() == IndexKind::real_grid) {
            for (std::size_t i = 0; i < family.grid_a().size(); ++i) params.push_back({family.grid_a()[i], long(i)});
        } else {
            const double c = kappa * family.step();
            const auto w1 = gabor_index_window(K.lo[0], c, sb.lo[0], sb.hi[0]);
            const auto w2 = gabor_index_window(K.hi[0], c, sb.lo[0], sb.hi[0]);
            const long lo = std::max(family.j_min(), std::min(w1.first, w2.first));
            const long hi = std::min(family.j_max(), std::max(w1.second, w2.second));
            for (long j = lo; j <= hi; ++j) params.push_back({family.step() * static_cast<double>(j), j});
        }
        CompensatedSum s;
        for (const auto& [p, j] : params) {
            if (!in_level(level, 1.0 + std::abs(p), M)) continue;
            const double v = pullback_square_integral(base, Matrix::identity(1), Vec{-kappa * p}, K);
            if (v == 0.0) continue;
            s.add(family.weight()(p, j) * v);
            ++rep.terms;
        }
        rep.value = s.value();
        return rep;
    }

    bool contains_e = true;
    for (int i = 0; i < n; ++i) contains_e = contains_e && K.lo[i] <= 0.0 && 0.0 <= K.hi[i];
    require(!contains_e, "local_integrability_check: K contains e");
    if (base.is_zero()) return rep;

    const Vec zero(n);
    const Box& sb = base.base_support();
    if (family.index_kind() == IndexKind::real_grid) {
        const auto pts = family.grid_points();
        CompensatedSum s;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const Automorphism a = family.automorphism_for(pts[i]);
            if (level != LevelSet::all && !in_level(level, lipschitz_constants(a, metric).upper, M)) continue;
            if (!closed_boxes_meet(image_box(a.forward(), K, zero), sb)) continue;
            const double v = pullback_square_integral(base, a.forward(), zero, K, opts.cells, opts.order);
            if (v == 0.0) continue;
            s.add(weight_of(family, pts[i], static_cast<long>(i)) * (jac ? a.jacobian() : 1.0) * v);
            ++rep.terms;
        }
        rep.value = s.value();
        return rep;
    }

    if (family.index_kind() == IndexKind::continuous) {
        auto psi_at = [&](const Vec& x) {
            const CalderonEvaluation e = orbit_integral(base, family, x, jac, level, M, opts);
            if (!e.certified) rep.certified = false;
            return e.value;
        };
        if (n == 1) {
            const QuadratureResult q = integrate_adaptive([&](double x) { return psi_at(Vec{x}); }, K.lo[0],
                                                          K.hi[0], std::max(opts.rel_tol, 1e-9), 14);
            rep.value = q.value;
            rep.terms = q.cells;
            if (!q.converged) {
                rep.certified = false;
                rep.note = "outer quadrature did not reach the tolerance";
            }
        } else {
            rep.value = K.volume() * integrate_unit_cube(
                                         [&](std::span<const double> u) {
                                             Vec x(n);
                                             for (int i = 0; i < n; ++i) x[i] = K.lo[i] + u[i] * (K.hi[i] - K.lo[i]);
                                             return psi_at(x);
                                         },
                                         n, opts.cells, opts.order);
            rep.terms = 1;
            for (int i = 0; i < n; ++i) rep.terms *= opts.cells * opts.order;
        }
        return rep;
    }

    PowerWalkBounds ws;
    ws.dmin = box_min_norm(metric, K);
    ws.dmax = box_max_norm(metric, K);
    support_radii_impl(base, metric, ws.r_in, ws.R_out);
    ws.level = level;
    ws.M = M;
    const double det = std::abs(determinant(family.base()));
    const PowerWalkResult w = walk_powers(family, ws, opts, [&](long j, const Matrix& Aj) {
        if (!closed_boxes_meet(image_box(Aj, K, zero), sb)) return 0.0;
        const double v = pullback_square_integral(base, Aj, zero, K, opts.cells, opts.order);
        const double delta = jac ? std::pow(det, static_cast<double>(j)) : 1.0;
        return family.weight()(static_cast<double>(j), j) * delta * v;
    });
    rep.value = w.value;
    rep.terms = w.terms;
    rep.certified = w.certified;
    rep.trace = w.trace;
    rep.note = w.note;
    rep.verdict = w.divergent ? IntegrabilityVerdict::divergent : IntegrabilityVerdict::finite;
    return rep;
}

IntegrabilityReport local_integrability_check(const FrequencyProfile& psi, const AutomorphismFamily& family,
                                              const Box& K, double M, const OrbitOptions& opts) {
    require(M > 0.0, "local_integrability_check: M must be positive");
    return orbit_box_integral(psi, family, K, true, LevelSet::above, M, opts);
}

std::pair<double, double> support_radii(const FrequencyProfile& psi, const MetricSpace& metric) {
    double r_in = 0.0, R_out = 0.0;
    support_radii_impl(psi, metric, r_in, R_out);
    return {r_in, R_out};
}

}  // namespace aff
