#include "aff/expansiveness.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "aff/numerics.hpp"

namespace aff {

MonotoneFunction MonotoneFunction::power(double coef, double exponent) {
    require(coef > 0.0 && exponent > 0.0 && std::isfinite(coef) && std::isfinite(exponent),
            "power envelope: need coef > 0 and exponent > 0");
    MonotoneFunction f;
    f.kind_ = Kind::power;
    f.coef_ = coef;
    f.exponent_ = exponent;
    return f;
}

MonotoneFunction MonotoneFunction::piecewise_linear(std::vector<std::pair<double, double>> knots) {
    require(!knots.empty(), "piecewise envelope: no knots");
    std::sort(knots.begin(), knots.end());
    for (std::size_t i = 0; i < knots.size(); ++i) {
        require(std::isfinite(knots[i].first) && std::isfinite(knots[i].second) && knots[i].first > 0.0,
                "piecewise envelope: knots need finite positive abscissae");
        if (i > 0) require(knots[i].first > knots[i - 1].first, "piecewise envelope: duplicate abscissa");
    }
    MonotoneFunction f;
    f.kind_ = Kind::piecewise_linear;
    f.knots_ = std::move(knots);
    return f;
}

double MonotoneFunction::operator()(double x) const {
    switch (kind_) {
        case Kind::identity: return x;
        case Kind::power: return coef_ * std::pow(x, exponent_);
        case Kind::piecewise_linear: {
            const auto& k = knots_;
            if (x <= k.front().first) return k.front().second * (x / k.front().first);
            if (x >= k.back().first) return k.back().second;
            const auto it = std::upper_bound(k.begin(), k.end(), std::pair{x, -INFINITY},
                                             [](const auto& a, const auto& b) { return a.first < b.first; });
            const auto& hi = *it;
            const auto& lo = *(it - 1);
            const double t = (x - lo.first) / (hi.first - lo.first);
            return lo.second + t * (hi.second - lo.second);
        }
    }
    return x;
}

std::string MonotoneFunction::describe() const {
    std::ostringstream os;
    os.precision(12);
    switch (kind_) {
        case Kind::identity: os << "f(x) = x"; break;
        case Kind::power: os << "f(x) = " << coef_ << " * x^" << exponent_; break;
        case Kind::piecewise_linear:
            os << "piecewise linear through";
            for (const auto& [x, y] : knots_) os << " (" << x << ", " << y << ")";
            break;
    }
    return os.str();
}

void MonotoneFunction::check_monotone_on(double lo, double hi) const {
    if (kind_ != Kind::piecewise_linear) return;
    const double start = knots_.front().second;
    require(start >= 0.0, "envelope is negative at its first knot, so it is not monotone from the origin");
    for (std::size_t i = 1; i < knots_.size(); ++i) {
        const bool overlaps = knots_[i].first >= lo && knots_[i - 1].first <= hi;
        if (overlaps && knots_[i].second < knots_[i - 1].second)
            throw InputError("envelope is not monotone on the probed range [" + std::to_string(lo) + ", " +
                             std::to_string(hi) + "]");
    }
}

const char* to_string(ExpansivenessVerdict v) {
    switch (v) {
        case ExpansivenessVerdict::uniformly_expanding: return "uniformly_expanding";
        case ExpansivenessVerdict::expanding: return "expanding";
        case ExpansivenessVerdict::non_expanding: return "non_expanding";
    }
    return "?";
}

const char* to_string(Tristate t) {
    switch (t) {
        case Tristate::yes: return "yes";
        case Tristate::no: return "no";
        case Tristate::indeterminate: return "indeterminate";
    }
    return "?";
}

MonotoneFunction monotone_concave_majorant(std::vector<std::pair<double, double>> pts) {
    require(!pts.empty(), "majorant: no points");
    std::sort(pts.begin(), pts.end());
    // Keep the highest point per abscissa.
    std::vector<std::pair<double, double>> uniq;
    for (const auto& p : pts) {
        if (!uniq.empty() && uniq.back().first == p.first)
            uniq.back().second = std::max(uniq.back().second, p.second);
        else
            uniq.push_back(p);
    }
    std::vector<std::pair<double, double>> hull;
    for (const auto& p : uniq) {
        while (hull.size() >= 2) {
            const auto& a = hull[hull.size() - 2];
            const auto& b = hull.back();
            // Drop b when it lies on or below the chord a-p.
            const double cross = (b.first - a.first) * (p.second - a.second) - (b.second - a.second) * (p.first - a.first);
            if (cross >= 0.0)
                hull.pop_back();
            else
                break;
        }
        hull.push_back(p);
    }
    double run = -INFINITY;
    for (auto& k : hull) {
        run = std::max(run, k.second);
        k.second = run;
    }
    return MonotoneFunction::piecewise_linear(std::move(hull));
}

ExpansivenessReport classify_expansiveness(const std::vector<FamilyMember>& ms, const ExpansivenessProbe& probe) {
    require(!ms.empty(), "classify_expansiveness: empty truncation");
    ExpansivenessReport rep;
    rep.probed = static_cast<long>(ms.size());
    std::vector<double> Ls;
    for (const auto& m : ms) Ls.push_back(m.lip.upper);
    std::sort(Ls.begin(), Ls.end());
    rep.L_min = Ls.front();
    rep.L_max = Ls.back();
    // Log-scale midpoint of the probed L range.
    rep.M = probe.M.value_or(std::sqrt(rep.L_min * rep.L_max));
    require(rep.M > 0.0 && std::isfinite(rep.M), "classify_expansiveness: M must be positive");
    rep.N = probe.N.value_or(1.0 / rep.M);
    require(rep.N > 0.0 && std::isfinite(rep.N), "classify_expansiveness: N must be positive");

    std::vector<const FamilyMember*> above;
    for (const auto& m : ms)
        if (m.lip.upper > rep.M) above.push_back(&m);

    const FamilyMember* witness = nullptr;
    for (const FamilyMember* m : above) {
        if (m->lip.lower > rep.N) continue;
        if (!witness || m->lip.upper / m->lip.lower >= witness->lip.upper / witness->lip.lower) witness = m;
    }
    if (witness) {
        rep.verdict = ExpansivenessVerdict::non_expanding;
        rep.witness = *witness;
        return rep;
    }
    if (above.empty()) {
        rep.verdict = ExpansivenessVerdict::expanding;
        return rep;
    }

    // Level sets of equal L, ordered by L; the smallest l on each level.
    std::vector<std::pair<double, double>> levels;  // (L, min l)
    std::vector<const FamilyMember*> sorted = above;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const FamilyMember* a, const FamilyMember* b) { return a->lip.upper < b->lip.upper; });
    for (const FamilyMember* m : sorted) {
        if (!levels.empty() && std::abs(m->lip.upper - levels.back().first) <= 1e-12 * levels.back().first)
            levels.back().second = std::min(levels.back().second, m->lip.lower);
        else
            levels.emplace_back(m->lip.upper, m->lip.lower);
    }
    bool increasing = levels.size() >= 2;
    for (std::size_t i = 1; i < levels.size(); ++i)
        if (!(levels[i].second > levels[i - 1].second)) increasing = false;
    if (increasing) {
        std::vector<std::pair<double, double>> cloud;
        for (const FamilyMember* m : above) cloud.emplace_back(m->lip.lower, m->lip.upper);
        rep.verdict = ExpansivenessVerdict::uniformly_expanding;
        rep.envelope = monotone_concave_majorant(std::move(cloud));
    } else {
        rep.verdict = ExpansivenessVerdict::expanding;
    }
    return rep;
}

ExpansivenessReport classify_expansiveness(const AutomorphismFamily& family, const ExpansivenessProbe& probe) {
    require(family.index_kind() != IndexKind::continuous,
            "classify_expansiveness: continuous families need a grid truncation");
    return classify_expansiveness(family.members(), probe);
}

namespace {

constexpr double kUnitTol = 1e-9;
constexpr double kUnitAmbiguous = 1e-6;
constexpr double kClusterTol = 1e-5;

struct Cluster {
    cplx mean;
    int size = 0;
};

std::vector<Cluster> cluster_eigenvalues(const std::vector<cplx>& ev) {
    std::vector<Cluster> out;
    std::vector<bool> used(ev.size(), false);
    for (std::size_t i = 0; i < ev.size(); ++i) {
        if (used[i]) continue;
        cplx sum = ev[i];
        int n = 1;
        used[i] = true;
        for (std::size_t j = i + 1; j < ev.size(); ++j)
            if (!used[j] && std::abs(ev[j] - ev[i]) <= kClusterTol * std::max(1.0, std::abs(ev[i]))) {
                used[j] = true;
                sum += ev[j];
                ++n;
            }
        out.push_back({sum / static_cast<double>(n), n});
    }
    return out;
}

// Real part of prod (A - lambda_i I) over the given eigenvalues.
Matrix spectral_product(const Matrix& a, const std::vector<cplx>& lambdas) {
    const int n = a.rows();
    CMatrix p(n, std::vector<cplx>(n, 0.0));
    for (int i = 0; i < n; ++i) p[i][i] = 1.0;
    for (const cplx& l : lambdas) {
        CMatrix q(n, std::vector<cplx>(n, 0.0));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                cplx acc = 0.0;
                for (int k = 0; k < n; ++k) acc += p[i][k] * (a(k, j) - (k == j ? l : cplx(0.0)));
                q[i][j] = acc;
            }
        p = std::move(q);
    }
    Matrix r(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) r(i, j) = p[i][j].real();
    return r;
}

}  // namespace

SubspaceVerdict expanding_on_subspace(const Matrix& a) {
    require(a.square() && a.rows() >= 1 && a.rows() <= kMaxDim, "expanding_on_subspace: square matrix, dim <= 8");
    require(std::abs(determinant(a)) > 0.0, "expanding_on_subspace: singular matrix");
    SubspaceVerdict v;
    v.eigenvalues = eigenvalues(a);
    const std::vector<Cluster> clusters = cluster_eigenvalues(v.eigenvalues);
    const double scale = std::max(1.0, a.max_abs());

    bool ambiguous = false;
    bool any_expanding = false;
    std::vector<cplx> big, unit;
    for (const Cluster& c : clusters) {
        const double mod = std::abs(c.mean);
        const double dist = std::abs(mod - 1.0);
        if (dist > kUnitTol && dist < kUnitAmbiguous) ambiguous = true;
        if (dist <= kUnitTol) {
            // Semisimple iff the null space of A - lambda I has full cluster dimension.
            const SvdResult svd = jacobi_svd(real_embedding_shifted(a, c.mean));
            int zeros = 0;
            for (double s : svd.sigma) {
                if (s <= 1e-10 * scale)
                    ++zeros;
                else if (s < 1e-5 * scale)
                    ambiguous = true;
            }
            if (zeros / 2 < c.size && !ambiguous) {
                std::ostringstream os;
                os << "modulus-1 eigenvalue " << c.mean << " is not semisimple (geometric " << zeros / 2
                   << " < algebraic " << c.size << ")";
                v.answer = Tristate::no;
                v.reason = os.str();
                return v;
            }
            for (int i = 0; i < c.size; ++i) unit.push_back(c.mean);
        } else if (mod < 1.0) {
            if (dist >= kUnitAmbiguous) {
                std::ostringstream os;
                os << "eigenvalue " << c.mean << " has modulus " << mod << " < 1 and contracts every candidate E";
                v.answer = Tristate::no;
                v.reason = os.str();
                return v;
            }
        } else {
            any_expanding = true;
            for (int i = 0; i < c.size; ++i) big.push_back(c.mean);
        }
    }
    if (ambiguous) {
        v.answer = Tristate::indeterminate;
        v.reason = "an eigenvalue modulus or a null-space dimension is too close to the decision threshold";
        return v;
    }
    if (!any_expanding) {
        v.answer = Tristate::no;
        v.reason = "no eigenvalue of modulus > 1, so F would be trivial";
        return v;
    }
    const int n = a.rows();
    v.F = smallest_singular_vectors(spectral_product(a, big), static_cast<int>(big.size()));
    v.E = unit.empty() ? Matrix(n, 0) : smallest_singular_vectors(spectral_product(a, unit), static_cast<int>(unit.size()));
    v.answer = Tristate::yes;
    v.reason = "all eigenvalue moduli >= 1, some > 1, modulus-1 part semisimple";
    return v;
}

UcResult u_c_profile(const AutomorphismFamily& family, const MonotoneFunction& f, double c,
                     const std::vector<double>& t_grid, double M, double cap) {
    require(c > 1.0 && std::isfinite(c), "u_c: c must exceed 1");
    require(M > 0.0, "u_c: M must be positive");
    require(!t_grid.empty(), "u_c: empty t grid");
    for (double t : t_grid) require(t >= M && std::isfinite(t), "u_c: t grid must lie in [M, inf)");
    const double t_lo = *std::min_element(t_grid.begin(), t_grid.end());
    const double t_hi = *std::max_element(t_grid.begin(), t_grid.end());
    f.check_monotone_on(t_lo, c * t_hi);

    UcResult res;
    res.cap = cap;
    res.t = t_grid;
    if (family.index_kind() == IndexKind::continuous) {
        require(family.param_dim() == 1, "u_c: one-parameter families only");
        auto L = [&](double a) { return family.member_at({a}).lip.upper; };
        const double a0 = family.a_min(), a1 = family.a_max();
        // L must be nondecreasing in a for the level band to be an interval.
        double prev = L(a0);
        for (int i = 1; i <= 64; ++i) {
            const double a = a0 * std::pow(a1 / a0, i / 64.0);
            const double cur = L(a);
            require(cur >= prev * (1.0 - 1e-12), "u_c: L(a) is not monotone on the index interval");
            prev = cur;
        }
        // Smallest a in [a0, a1] with L(a) >= y (a1 if none).
        auto preimage = [&](double y) {
            if (L(a0) >= y) return a0;
            if (L(a1) < y) return a1;
            double lo = a0, hi = a1;
            for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
                const double mid = 0.5 * (lo + hi);
                (L(mid) >= y ? hi : lo) = mid;
            }
            return hi;
        };
        for (double t : t_grid) {
            const double lo = preimage(t);
            const double hi = preimage(f(c * t));
            double u = 0.0;
            if (hi > lo) {
                const auto q = integrate_adaptive([&](double a) { return family.weight()(a, 0); }, lo, hi, 1e-13, 20);
                u = q.value;
            }
            res.u.push_back(u);
        }
    } else {
        const auto ms = family.members();
        for (double t : t_grid) {
            const double top = f(c * t);
            CompensatedSum s;
            for (const auto& m : ms) {
                const double Lh = m.lip.upper;
                if (Lh >= t * (1.0 - 1e-12) && Lh <= top * (1.0 + 1e-12)) s.add(m.weight);
            }
            res.u.push_back(s.value());
        }
    }
    res.max_value = *std::max_element(res.u.begin(), res.u.end());
    res.bounded = res.max_value <= cap;
    return res;
}

}  // namespace aff
