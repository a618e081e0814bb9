#include <doctest.h>

#include <cmath>

#include "aff/counting.hpp"
#include "aff/frame.hpp"
#include "aff/numerics.hpp"

using namespace aff;

namespace {

constexpr long kInf = AutomorphismFamily::kUnbounded;

FrequencyProfile shannon() {
    return FrequencyProfile::piecewise_constant({Box{Vec{-1.0}, Vec{-0.5}}, Box{Vec{0.5}, Vec{1.0}}}, {1.0, 1.0});
}

AutomorphismFamily dyadic() {
    return AutomorphismFamily::matrix_powers(Matrix{{2.0}}, -kInf, kInf, WeightSpec::constant(), MetricSpace::l2(1));
}

FrequencyProfile gabor_window() {
    return FrequencyProfile::piecewise_constant({Box{Vec{0.0}, Vec{1.0}}}, {1.0}).on_modulation_line(1);
}

AutomorphismFamily gabor_family() {
    return AutomorphismFamily::gabor_shifts(1.0, -kInf, kInf, WeightSpec::constant(), MetricSpace::gabor());
}

// Piecewise-linear bump on [0.5, 1] (zero at both ends).
FrequencyProfile tent() {
    return FrequencyProfile::sampled_grid(Box{Vec{0.5}, Vec{1.0}}, {5}, {0.0, 0.8, 1.0, 0.6, 0.0});
}

}  // namespace

TEST_CASE("test function construction") {
    const auto t = make_test_function(Vec{0.3}, 0.01, MetricSpace::l2(1));
    CHECK(t.normalization == doctest::Approx(1.0 / std::sqrt(0.02)).epsilon(1e-14));
    CHECK(t.profile(Vec{0.295}) == doctest::Approx(1.0 / std::sqrt(0.02)));
    CHECK(t.profile(Vec{0.311}) == 0.0);
    CHECK(t.profile.norm_squared() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(t.region.kind == AdmissibleRegion::Kind::whole_space);

    const auto g = make_test_function(Vec{0.3, 1.0}, 0.25, MetricSpace::gabor());
    REQUIRE(g.profile.modulation_index().has_value());
    CHECK(*g.profile.modulation_index() == 1);
    CHECK(g.profile(Vec{0.3, 1.0}) == doctest::Approx(1.0 / std::sqrt(0.5)));
    CHECK(g.profile(Vec{0.3, 0.0}) == 0.0);
    CHECK(g.profile.norm_squared() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(make_test_function(Vec{0.3, 1.0}, 1.0, MetricSpace::gabor()), InputError);
    CHECK_THROWS_AS(make_test_function(Vec{0.3, 2.0}, 0.25, MetricSpace::gabor()), InputError);

    const auto b = make_test_function(Vec{0.5, 0.5}, 0.1, MetricSpace::l2(2));
    CHECK(b.profile.kind() == ProfileKind::ball_indicator);
    CHECK(b.profile.norm_squared() == doctest::Approx(1.0).epsilon(1e-12));
    const auto q = make_test_function(Vec{0.5, 0.5}, 0.1, MetricSpace::linf(2));
    CHECK(q.profile.kind() == ProfileKind::piecewise_constant);
    CHECK_THROWS_AS(make_test_function(Vec{0.5}, 0.0, MetricSpace::l2(1)), InputError);
}

TEST_CASE("shannon frame functional on test functions") {
    for (double eps : {0.01, 0.005}) {
        const auto t = make_test_function(Vec{0.3}, eps, MetricSpace::l2(1));
        const auto v = frame_functional(shannon(), dyadic(), Lattice::integer(1), t.profile);
        CHECK(std::abs(v.value - 1.0) <= 1e-6);
        CHECK(v.method == "exact_breakpoints");
    }
    const auto t = make_test_function(Vec{0.3}, 0.01, MetricSpace::l2(1));
    CHECK(frame_functional(FrequencyProfile::zero(1), dyadic(), Lattice::integer(1), t.profile).value == 0.0);
}

TEST_CASE("gabor frame functional on the modulation line") {
    for (double x : {0.3, -2.7, 5.5}) {
        const auto t = make_test_function(Vec{x, 1.0}, 0.25, MetricSpace::gabor());
        const auto v = frame_functional(gabor_window(), gabor_family(), Lattice::gabor(1.0), t.profile);
        CHECK(std::abs(v.value - 1.0) <= 1e-6);
    }
}

TEST_CASE("single-term reduction agrees with the lattice sum") {
    Rng rng(12);
    const Lattice z = Lattice::integer(1);
    const auto psi = FrequencyProfile::piecewise_constant(
        {Box{Vec{-3.0}, Vec{-0.4}}, Box{Vec{0.4}, Vec{1.3}}, Box{Vec{1.3}, Vec{3.5}}}, {0.7, 1.0, -0.4});
    int used = 0;
    for (int t = 0; t < 200; ++t) {
        const Automorphism a = Automorphism::matrix(Matrix{{std::ldexp(1.0, static_cast<int>(rng.integer(-3, 3)))}});
        const double L = lipschitz_constants(a, MetricSpace::l2(1)).upper;
        const Vec x0{rng.uniform(-2.0, 2.0)};
        const double th = single_term_threshold(a, L, z, MetricSpace::l2(1), x0);
        if (!(th > 1e-6)) continue;
        const auto f = make_test_function(x0, 0.5 * std::min(th, 1.0), MetricSpace::l2(1));
        FrameOptions general, single;
        single.single_term = true;
        const double g = frame_term(psi, a, z, f.profile, general);
        const double s = frame_term(psi, a, z, f.profile, single);
        CHECK(g == doctest::Approx(s).epsilon(1e-12));
        ++used;
    }
    CHECK(used > 150);

    // Dimension 2 with tensor quadrature: agreement within quadrature accuracy.
    const Lattice z2 = Lattice::integer(2);
    const auto psi2 = FrequencyProfile::piecewise_constant({Box{Vec{0.2, -0.5}, Vec{1.8, 0.9}}}, {1.0});
    const Automorphism sh = Automorphism::shearlet(2.0, 0.5);
    const MetricSpace linf = MetricSpace::linf(2);
    const Vec x0{0.31, 0.12};
    const double th = single_term_threshold(sh, lipschitz_constants(sh, linf).upper, z2, linf, x0);
    REQUIRE(th > 0.0);
    const auto f2 = make_test_function(x0, 0.5 * th, linf);
    FrameOptions single;
    single.single_term = true;
    CHECK(frame_term(psi2, sh, z2, f2.profile) == doctest::Approx(frame_term(psi2, sh, z2, f2.profile, single)).epsilon(1e-3));
}

TEST_CASE("lebesgue-point convergence to the calderon sum") {
    const auto psi = tent();
    const auto fam = dyadic();
    const Lattice z = Lattice::integer(1);
    for (double x0 : {0.3, 0.71, 1.37}) {
        const double c0 = calderon_sum(psi, fam, Vec{x0}).value;
        std::vector<double> err;
        for (double eps : {0.008, 0.004, 0.002}) {
            const auto t = make_test_function(Vec{x0}, eps, MetricSpace::l2(1));
            const double v = frame_functional(psi, fam, z, t.profile).value;
            // Oracle: midpoint average of a brute-force dilation sum over the ball.
            const int n = 20000;
            double avg = 0.0;
            for (int i = 0; i < n; ++i) {
                const double x = x0 - eps + 2.0 * eps * (i + 0.5) / n;
                for (int j = -40; j <= 40; ++j) {
                    const double p = psi(Vec{std::ldexp(x, j)});
                    avg += p * p;
                }
            }
            avg /= n;
            CHECK(v == doctest::Approx(avg).epsilon(1e-6));
            err.push_back(std::abs(v - c0));
        }
        // First order at least: halving eps halves the error.
        CHECK(err[1] <= 0.5 * err[0] * (1.0 + 1e-3) + 1e-12);
        CHECK(err[2] <= 0.5 * err[1] * (1.0 + 1e-3) + 1e-12);
    }
}

TEST_CASE("frame functional partition additivity") {
    const auto psi = FrequencyProfile::piecewise_constant({Box{Vec{0.4}, Vec{1.3}}, Box{Vec{1.3}, Vec{3.5}}}, {1.0, -0.4});
    const Lattice z = Lattice::integer(1);
    for (double x0 : {0.2, 0.9, 2.2}) {
        const auto t = make_test_function(Vec{x0}, 0.05, MetricSpace::l2(1));
        const double all = frame_functional(psi, dyadic(), z, t.profile).value;
        for (double M : {0.5, 1.0, 4.0}) {
            FrameOptions lo, hi;
            lo.level = LevelSet::below;
            hi.level = LevelSet::above;
            lo.M = hi.M = M;
            const double a = frame_functional(psi, dyadic(), z, t.profile, lo).value;
            const double b = frame_functional(psi, dyadic(), z, t.profile, hi).value;
            CHECK(all == doctest::Approx(a + b).epsilon(1e-12));
        }
    }
}

TEST_CASE("calderon inequality report examples") {
    std::vector<Vec> grid;
    for (int i = 0; i < 200; ++i) {
        const double x = 0.01 + (2.0 - 0.01) * i / 199.0;
        grid.push_back(Vec{x});
        grid.push_back(Vec{-x});
    }
    const Lattice z = Lattice::integer(1);
    const auto rep = calderon_inequality_report(shannon(), dyadic(), z, grid, 1.0, 1.0, 2.0);
    CHECK(rep.grid.size() == 400);
    CHECK(rep.all_pass);
    CHECK(rep.lower_failures == 0);
    CHECK(rep.upper_failures == 0);
    CHECK(rep.min_value == 1.0);
    CHECK(rep.max_value == 1.0);
    CHECK(rep.remainder.empty());
    CHECK(!rep.note.empty());

    const auto big = calderon_inequality_report(shannon().scaled(std::sqrt(2.0)), dyadic(), z, grid, 1.0, 1.0, 2.0);
    CHECK(big.upper_failures == 400);
    CHECK(big.lower_failures == 0);
    CHECK(!big.all_pass);

    std::vector<Vec> ggrid;
    for (int i = 0; i < 200; ++i) ggrid.push_back(Vec{-3.0 + 6.0 * i / 199.0, 1.0});
    const auto g = calderon_inequality_report(gabor_window(), gabor_family(), Lattice::gabor(1.0), ggrid, 1.0, 1.0, 2.0);
    CHECK(g.all_pass);

    std::vector<Vec> bad{Vec{0.5}, Vec{1e-4}};
    CHECK_THROWS_AS(calderon_inequality_report(shannon(), dyadic(), z, bad, 1.0, 1.0, 2.0), InputError);
}

TEST_CASE("remainder inequality at probed points") {
    const Lattice z = Lattice::integer(1);
    const MetricSpace m = MetricSpace::l2(1);
    const double r = 0.5, M = 2.0;
    const auto truncated =
        AutomorphismFamily::matrix_powers(Matrix{{2.0}}, -20, 20, WeightSpec::constant(), m);
    const auto px = property_x_scan(truncated, z, m, r, M);
    REQUIRE(px.verdict == PropertyXVerdict::holds);

    // A band-pass profile with uneven values, so C_psi is not constant.
    const auto psi = FrequencyProfile::piecewise_constant(
        {Box{Vec{-1.1}, Vec{-0.45}}, Box{Vec{0.45}, Vec{0.8}}, Box{Vec{0.8}, Vec{1.2}}}, {0.9, 1.0, 0.6});
    std::vector<Vec> grid;
    for (int i = 0; i < 100; ++i) grid.push_back(Vec{0.05 + 3.0 * i / 99.0});
    double A = INFINITY, B = 0.0;
    for (const Vec& x : grid) {
        const double c = calderon_sum(psi, dyadic(), x).value;
        A = std::min(A, c);
        B = std::max(B, c);
    }
    FrameReportOptions opts;
    opts.property_x_C = px.C;
    opts.remainder_points = {Vec{0.3}, Vec{0.77}, Vec{2.1}};
    for (double eps : {0.01, 0.05}) {
        opts.remainder_eps = eps;
        const auto rep = calderon_inequality_report(psi, dyadic(), z, grid, A, B, M, opts);
        CHECK(rep.all_pass);
        REQUIRE(rep.remainder.size() == 3);
        for (const auto& rc : rep.remainder) {
            CHECK(rc.pass);
            CHECK(rc.remainder >= 0.0);
            CHECK(A <= rc.ball_average + rc.remainder + 5e-6);
        }
    }
}

TEST_CASE("frame bound probe") {
    const Lattice z = Lattice::integer(1);
    const auto ens = random_probe_ensemble(50, Box{Vec{0.1}, Vec{4.0}}, 99);
    REQUIRE(ens.size() == 50);
    for (const auto& f : ens) CHECK(f.norm_squared() == doctest::Approx(1.0).epsilon(1e-12));
    const auto p = frame_bound_probe(shannon(), dyadic(), z, ens);
    CHECK(p.A_hat >= 1.0 - 1e-4);
    CHECK(p.B_hat <= 1.0 + 1e-4);
    CHECK(p.A_hat <= p.B_hat);

    const auto psi = FrequencyProfile::piecewise_constant({Box{Vec{0.4}, Vec{1.3}}, Box{Vec{1.3}, Vec{3.5}}}, {1.0, -0.4});
    const auto base = frame_bound_probe(psi, dyadic(), z, ens);
    const auto dbl = frame_bound_probe(psi.scaled(2.0), dyadic(), z, ens);
    CHECK(dbl.A_hat == doctest::Approx(4.0 * base.A_hat).epsilon(1e-12));
    CHECK(dbl.B_hat == doctest::Approx(4.0 * base.B_hat).epsilon(1e-12));

    const auto zero = frame_bound_probe(FrequencyProfile::zero(1), dyadic(), z, ens);
    CHECK(zero.A_hat == 0.0);
    CHECK(zero.B_hat == 0.0);

    // Growing the ensemble never raises A_hat nor lowers B_hat.
    std::vector<FrequencyProfile> grow;
    double prev_a = INFINITY, prev_b = -INFINITY;
    for (const auto& f : ens) {
        grow.push_back(f);
        if (grow.size() % 10 != 0) continue;
        const auto q = frame_bound_probe(psi, dyadic(), z, grow);
        CHECK(q.A_hat <= prev_a);
        CHECK(q.B_hat >= prev_b);
        prev_a = q.A_hat;
        prev_b = q.B_hat;
    }

    // Worker count does not change the result.
    const auto p1 = frame_bound_probe(psi, dyadic(), z, ens, {}, 1);
    const auto p4 = frame_bound_probe(psi, dyadic(), z, ens, {}, 4);
    CHECK(p1.values == p4.values);

    std::vector<FrequencyProfile> not_unit{FrequencyProfile::piecewise_constant({Box{Vec{0.5}, Vec{1.0}}}, {1.0})};
    CHECK_THROWS_AS(frame_bound_probe(psi, dyadic(), z, not_unit), InputError);
}
