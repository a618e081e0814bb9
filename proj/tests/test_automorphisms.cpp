#include <doctest.h>

#include <cmath>
#include <numbers>

#include "aff/expansiveness.hpp"
#include "aff/family.hpp"
#include "aff/numerics.hpp"
#include "support.hpp"

using namespace aff;
using aff::testing::random_in_ball;
using aff::testing::random_matrix;

TEST_CASE("jacobian examples") {
    CHECK(Automorphism::shearlet(4.0, 1.0).jacobian() == doctest::Approx(8.0).epsilon(1e-15));
    CHECK(Automorphism::matrix(Matrix::diag({2.0, 0.5})).jacobian() == 1.0);
    CHECK(Automorphism::gabor_shift(0.7).jacobian() == 1.0);
    CHECK(Automorphism::matrix_power(Matrix::diag({2.0, 3.0}), -2).jacobian() == doctest::Approx(1.0 / 36.0));
    CHECK_THROWS_AS(Automorphism::matrix(Matrix{{1.0, 2.0}, {2.0, 4.0}}), InputError);
}

TEST_CASE("apply and inverse_apply are inverse") {
    Rng rng(3);
    for (int n = 1; n <= 4; ++n) {
        const Automorphism a = Automorphism::matrix(random_matrix(rng, n, 50.0, 1e-3));
        for (int t = 0; t < 1000; ++t) {
            Vec x(n);
            for (int i = 0; i < n; ++i) x[i] = rng.uniform(-10, 10);
            CHECK((a.apply(a.inverse_apply(x)) - x).norm_inf() <= 1e-12 * (1.0 + x.norm_inf()));
        }
        CHECK(a.jacobian() > 0.0);
    }
    const Automorphism sh = Automorphism::shearlet(3.0, -2.5);
    const Vec x{0.7, -1.3};
    CHECK((sh.inverse_apply(sh.apply(x)) - x).norm_inf() <= 1e-14);
}

TEST_CASE("lipschitz closed-form examples") {
    const auto d = lipschitz_constants(Automorphism::matrix(Matrix::diag({2.0, 3.0})), MetricSpace::l2(2));
    CHECK(d.lower == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(d.upper == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(d.method == LipschitzMethod::closed_form);

    const auto g = lipschitz_constants(Automorphism::gabor_shift(0.5), MetricSpace::gabor());
    CHECK(g.lower == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(g.upper == doctest::Approx(1.5).epsilon(1e-15));

    const auto s = lipschitz_constants(Automorphism::shearlet(4.0, 0.0), MetricSpace::l2(2));
    CHECK(s.lower == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(s.upper == doctest::Approx(4.0).epsilon(1e-13));
    OracleOptions o;
    o.directions = 100000;
    const auto so = lipschitz_oracle(Automorphism::shearlet(4.0, 0.0), MetricSpace::l2(2), o);
    CHECK(so.method == LipschitzMethod::numerical_oracle);
    CHECK(so.upper <= s.upper * (1.0 + 1e-12));
    CHECK(so.lower >= s.lower * (1.0 - 1e-12));
    CHECK((s.upper - so.upper) / s.upper < 1e-3);
    CHECK((so.lower - s.lower) / s.lower < 1e-3);
}

TEST_CASE("shearlet constants are the square roots of the gram eigenvalues") {
    for (double a : {1.0, 2.0, 4.0, 9.0})
        for (double s : {-3.0, 0.0, 0.5, 2.0}) {
            const auto c = lipschitz_constants(Automorphism::shearlet(a, s), MetricSpace::l2(2));
            const auto [lo2, hi2] = shearlet_doubled_gram_eigenvalues(a, s);
            CHECK(c.upper == doctest::Approx(std::sqrt(hi2 / 2.0)).epsilon(1e-12));
            CHECK(c.lower == doctest::Approx(std::sqrt(lo2 / 2.0)).epsilon(1e-12));
            // Independent check: singular values of the explicit matrix.
            const auto sv = singular_values(Matrix{{a, 0.0}, {s * std::sqrt(a), std::sqrt(a)}});
            CHECK(c.upper == doctest::Approx(sv[0]).epsilon(1e-12));
            CHECK(c.lower == doctest::Approx(sv[1]).epsilon(1e-12));
        }
}

TEST_CASE("lipschitz bounds hold on sampled points") {
    Rng rng(8);
    for (const MetricSpace& m : {MetricSpace::l2(2), MetricSpace::linf(2), MetricSpace::l2(3), MetricSpace::linf(3)}) {
        const int n = m.point_dim();
        for (int t = 0; t < 10; ++t) {
            const Automorphism a = Automorphism::matrix(random_matrix(rng, n, 20.0, 1e-3));
            const auto c = lipschitz_constants(a, m);
            for (int k = 0; k < 10000; ++k) {
                Vec x(n);
                for (int i = 0; i < n; ++i) x[i] = rng.uniform(-1, 1);
                const double d = m.norm(x), da = m.norm(a.apply(x));
                CHECK(da <= c.upper * d * (1.0 + 1e-9));
                CHECK(da >= c.lower * d * (1.0 - 1e-9));
            }
        }
    }
    const MetricSpace g = MetricSpace::gabor();
    for (double p : {-2.0, 0.3, 1.7}) {
        const Automorphism a = Automorphism::gabor_shift(p);
        const auto c = lipschitz_constants(a, g);
        for (int k = 0; k < 10000; ++k) {
            const Vec x{rng.uniform(-3, 3), static_cast<double>(rng.integer(-3, 3))};
            const double d = g.norm(x), da = g.norm(a.apply(x));
            CHECK(da <= c.upper * d * (1.0 + 1e-12));
            CHECK(da >= c.lower * d * (1.0 - 1e-12));
        }
    }
}

TEST_CASE("inverse constants") {
    Rng rng(21);
    for (const MetricSpace& m : {MetricSpace::l2(2), MetricSpace::linf(3)}) {
        for (int t = 0; t < 50; ++t) {
            const Automorphism a = Automorphism::matrix(random_matrix(rng, m.point_dim(), 50.0, 1e-3));
            const auto c = lipschitz_constants(a, m);
            const auto ci = lipschitz_constants(a.inverse(), m);
            CHECK(ci.lower >= 1.0 / c.upper - 1e-9);
            CHECK(ci.upper <= 1.0 / c.lower + 1e-9);
        }
    }
}

TEST_CASE("oracle is an inner approximation of the closed forms") {
    Rng rng(4);
    OracleOptions o;
    o.directions = 20000;
    for (const MetricSpace& m : {MetricSpace::l2(2), MetricSpace::linf(2), MetricSpace::l2(3)}) {
        for (int t = 0; t < 10; ++t) {
            const Automorphism a = Automorphism::matrix(random_matrix(rng, m.point_dim(), 20.0, 1e-3));
            const auto c = lipschitz_constants(a, m);
            const auto so = lipschitz_oracle(a, m, o);
            CHECK(so.upper <= c.upper * (1.0 + 1e-12));
            CHECK(so.lower >= c.lower * (1.0 - 1e-12));
        }
    }
}

TEST_CASE("ball-inclusion sandwich") {
    Rng rng(13);
    for (const MetricSpace& m : {MetricSpace::l2(2), MetricSpace::linf(2)}) {
        for (int t = 0; t < 100; ++t) {
            const Automorphism a = Automorphism::matrix(random_matrix(rng, 2, 20.0, 1e-3));
            const auto c = lipschitz_constants(a, m);
            const Vec x0{rng.uniform(-5, 5), rng.uniform(-5, 5)};
            const double r = rng.uniform(0.05, 3.0);
            const Vec y0 = a.apply(x0);
            for (int k = 0; k < 1000; ++k) {
                // Inner ball B(alpha x0, l r) lies in alpha B(x0, r).
                const Vec y = random_in_ball(rng, m, y0, c.lower * r);
                CHECK(m.distance(a.inverse_apply(y), x0) < r);
                // alpha B(x0, r) lies in B(alpha x0, L r).
                const Vec x = random_in_ball(rng, m, x0, r);
                CHECK(m.distance(a.apply(x), y0) < c.upper * r);
            }
        }
    }
}

TEST_CASE("measure scaling of deformed balls") {
    Rng rng(99);
    for (const MetricSpace& m : {MetricSpace::l2(2), MetricSpace::linf(2), MetricSpace::l2(3)}) {
        const int n = m.point_dim();
        for (int t = 0; t < 5; ++t) {
            const Automorphism a = Automorphism::matrix(random_matrix(rng, n, 10.0, 1e-3));
            const double r = rng.uniform(0.2, 1.5);
            // Bounding box of alpha B(e, r): |A| applied to the ball half-widths.
            Vec h(n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) h[i] += std::abs(a.forward()(i, j)) * r;
            double vol = 1.0;
            for (int i = 0; i < n; ++i) vol *= 2.0 * h[i];
            const long N = 400000;
            long hits = 0;
            for (long s = 0; s < N; ++s) {
                Vec x(n);
                for (int i = 0; i < n; ++i) x[i] = rng.uniform(-h[i], h[i]);
                hits += m.norm(a.inverse_apply(x)) < r;
            }
            const double p = static_cast<double>(hits) / N;
            const double est = vol * p, se = vol * std::sqrt(p * (1 - p) / N);
            CHECK(std::abs(est - a.jacobian() * m.ball_measure(r)) <= 3.0 * se);
        }
    }
}

TEST_CASE("classify_expansiveness examples") {
    const auto dyadic = AutomorphismFamily::matrix_powers(Matrix{{2.0}}, -20, 20, WeightSpec::constant(),
                                                          MetricSpace::l2(1));
    const auto r1 = classify_expansiveness(dyadic);
    CHECK(r1.verdict == ExpansivenessVerdict::uniformly_expanding);
    REQUIRE(r1.envelope.has_value());
    for (double x : {2.0, 8.0, 1024.0, 3.0, 100.0}) CHECK((*r1.envelope)(x) == doctest::Approx(x));
    CHECK(r1.scope == "on truncation");

    const auto bad = AutomorphismFamily::matrix_powers(Matrix::diag({2.0, 0.5}), -20, 20, WeightSpec::constant(),
                                                       MetricSpace::l2(2));
    const auto r2 = classify_expansiveness(bad);
    CHECK(r2.verdict == ExpansivenessVerdict::non_expanding);
    REQUIRE(r2.witness.has_value());
    CHECK(r2.witness->index == 20);
    CHECK(r2.witness->lip.upper == doctest::Approx(std::ldexp(1.0, 20)));
    CHECK(r2.witness->lip.lower == doctest::Approx(std::ldexp(1.0, -20)));

    std::vector<double> as, ss;
    for (int a = 1; a <= 8; ++a) as.push_back(a);
    for (int s = -8; s <= 8; ++s) ss.push_back(s);
    for (const MetricSpace& m : {MetricSpace::l2(2), MetricSpace::linf(2)}) {
        const auto sh = AutomorphismFamily::shearlets(as, ss, WeightSpec::constant(), m);
        const auto r3 = classify_expansiveness(sh);
        CHECK(r3.verdict == ExpansivenessVerdict::non_expanding);
        REQUIRE(r3.witness.has_value());
        CHECK(std::abs(r3.witness->param[1]) >= 4.0);
    }
    CHECK_THROWS_AS(classify_expansiveness(std::vector<FamilyMember>{}), InputError);
}

TEST_CASE("gabor shift grids are not expanding") {
    std::vector<double> ps;
    for (int i = -20; i <= 20; ++i) ps.push_back(0.5 * i);
    const auto fam = AutomorphismFamily::gabor_shift_grid(ps, WeightSpec::constant(), MetricSpace::gabor());
    for (double M : {1.5, 3.0, 8.0}) {
        ExpansivenessProbe probe;
        probe.M = M;
        CHECK(classify_expansiveness(fam, probe).verdict == ExpansivenessVerdict::non_expanding);
    }
}

TEST_CASE("monotone concave majorant") {
    const auto f = monotone_concave_majorant({{1, 1}, {2, 3}, {3, 2}, {4, 4}});
    CHECK(f(1) == doctest::Approx(1));
    CHECK(f(2) >= 3);
    CHECK(f(3) >= 3.5 - 1e-12);
    CHECK(f(4) == doctest::Approx(4));
    for (double x = 0.0; x < 6.0; x += 0.1) CHECK(f(x + 0.1) >= f(x) - 1e-12);
}

TEST_CASE("expanding_on_subspace examples with brute-force power checks") {
    const Matrix a{{2.0, 0.0}, {0.0, 1.0}};
    const auto v = expanding_on_subspace(a);
    CHECK(v.answer == Tristate::yes);
    REQUIRE(v.F.cols() == 1);
    REQUIRE(v.E.cols() == 1);
    CHECK(std::abs(v.F(0, 0)) == doctest::Approx(1.0));
    CHECK(std::abs(v.E(1, 0)) == doctest::Approx(1.0));
    // Condition iii with gamma = 2 on F and iv with a = 1 on E, j <= 30.
    Matrix p = Matrix::identity(2);
    for (int j = 1; j <= 30; ++j) {
        p = a * p;
        CHECK(p.apply(Vec{v.F(0, 0), v.F(1, 0)}).norm2() >= std::pow(2.0, j) * (1 - 1e-12));
        CHECK(p.apply(Vec{v.E(0, 0), v.E(1, 0)}).norm2() >= 1.0 - 1e-12);
    }

    const Matrix b = Matrix::diag({2.0, 0.5});
    CHECK(expanding_on_subspace(b).answer == Tristate::no);
    // |B^j e2| = 2^-j: no a > 0 bounds it below.
    CHECK(matrix_power(b, 30).apply(Vec{0.0, 1.0}).norm2() == std::ldexp(1.0, -30));

    const Matrix rot{{0.0, -1.0}, {1.0, 0.0}};
    const auto r = expanding_on_subspace(rot);
    CHECK(r.answer == Tristate::no);
    CHECK(!r.reason.empty());

    // A Jordan block at modulus 1 is not semisimple.
    const Matrix jordan{{2.0, 0.0, 0.0}, {0.0, 1.0, 1.0}, {0.0, 0.0, 1.0}};
    CHECK(expanding_on_subspace(jordan).answer == Tristate::no);

    // Modulus 1 + 1e-7 sits in the ambiguous band.
    const Matrix near = Matrix::diag({2.0, 1.0 + 1e-7});
    CHECK(expanding_on_subspace(near).answer == Tristate::indeterminate);
}

TEST_CASE("expanding on a subspace implies expanding power families") {
    Rng rng(31);
    int yes = 0;
    for (int t = 0; t < 60; ++t) {
        const int n = 2 + t % 2;
        const Matrix basis = random_matrix(rng, n, 10.0, 1e-3);
        std::vector<double> d(n);
        for (int i = 0; i < n; ++i) d[i] = rng.uniform() < 0.4 ? (rng.uniform() < 0.5 ? 1.0 : -1.0) : rng.uniform(1.2, 2.5);
        d[0] = rng.uniform(1.2, 2.5);
        const Matrix a = basis * Matrix::diag(d) * inverse(basis);
        const auto v = expanding_on_subspace(a);
        if (v.answer != Tristate::yes) continue;
        ++yes;
        const auto fam = AutomorphismFamily::matrix_powers(a, 0, 30, WeightSpec::constant(), MetricSpace::l2(n));
        CHECK(classify_expansiveness(fam).verdict != ExpansivenessVerdict::non_expanding);
    }
    CHECK(yes >= 40);
}

TEST_CASE("u_c examples") {
    std::vector<double> ts;
    for (double t = 1.0; t <= 1000.0; t *= 1.5) ts.push_back(t);
    const double c = 2.0;
    const auto fam_log = AutomorphismFamily::continuous_dilations(1.0, 1e6, WeightSpec::power(-1.0),
                                                                  MetricSpace::l2(1));
    const auto u1 = u_c_profile(fam_log, MonotoneFunction::identity(), c, ts, 1.0);
    for (double u : u1.u) CHECK(std::abs(u - std::log(c)) < 1e-8);
    CHECK(u1.bounded);

    const auto fam_flat = AutomorphismFamily::continuous_dilations(1.0, 1e6, WeightSpec::constant(),
                                                                   MetricSpace::l2(1));
    const auto u2 = u_c_profile(fam_flat, MonotoneFunction::identity(), c, ts, 1.0);
    for (std::size_t i = 0; i < ts.size(); ++i) CHECK(u2.u[i] == doctest::Approx((c - 1.0) * ts[i]).epsilon(1e-10));
    CHECK_FALSE(u2.bounded);

    // H = Z, A = 2I: {j : t <= 2^j <= 2t} has at most two elements.
    const auto fam_z = AutomorphismFamily::matrix_powers(Matrix::diag({2.0, 2.0}), -40, 40, WeightSpec::constant(),
                                                         MetricSpace::l2(2));
    const auto u3 = u_c_profile(fam_z, MonotoneFunction::identity(), c, ts, 1.0);
    for (double u : u3.u) {
        CHECK(u <= 2.0);
        CHECK(u == std::round(u));
    }
    CHECK(u3.bounded);

    CHECK_THROWS_AS(u_c_profile(fam_log, MonotoneFunction::identity(), 1.0, ts, 1.0), InputError);
    CHECK_THROWS_AS(u_c_profile(fam_log, MonotoneFunction::piecewise_linear({{1, 5}, {2, 3}}), 2.0, ts, 1.0),
                    InputError);
}
