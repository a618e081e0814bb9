#include <doctest.h>

#include <cmath>

#include "aff/calderon.hpp"
#include "aff/numerics.hpp"

using namespace aff;

namespace {

constexpr long kInf = AutomorphismFamily::kUnbounded;

FrequencyProfile shannon() {
    return FrequencyProfile::piecewise_constant({Box{Vec{-1.0}, Vec{-0.5}}, Box{Vec{0.5}, Vec{1.0}}}, {1.0, 1.0});
}

AutomorphismFamily dyadic(WeightSpec w = WeightSpec::constant()) {
    return AutomorphismFamily::matrix_powers(Matrix{{2.0}}, -kInf, kInf, w, MetricSpace::l2(1));
}

// Random piecewise-constant profile on [lo, hi) with `pieces` cells.
FrequencyProfile random_profile_1d(Rng& rng, double lo, double hi, int pieces) {
    std::vector<Box> boxes;
    std::vector<double> vals;
    const double w = (hi - lo) / pieces;
    for (int i = 0; i < pieces; ++i) {
        boxes.push_back(Box{Vec{lo + i * w}, Vec{lo + (i + 1) * w}});
        vals.push_back(rng.uniform(-1.0, 1.0));
    }
    return FrequencyProfile::piecewise_constant(boxes, vals);
}

double interval_overlap(double a0, double a1, double b0, double b1) {
    return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

}  // namespace

TEST_CASE("shannon calderon sum is one against a brute-force dilation sum") {
    const auto psi = shannon();
    const auto fam = dyadic();
    Rng rng(5);
    for (int t = 0; t < 500; ++t) {
        const double mag = std::exp(rng.uniform(std::log(1e-3), std::log(1e3)));
        const double xi = rng.uniform() < 0.5 ? -mag : mag;
        double brute = 0.0;
        for (int j = -60; j <= 60; ++j) {
            const double v = psi(Vec{std::ldexp(xi, j)});
            brute += v * v;
        }
        const auto e = calderon_sum(psi, fam, Vec{xi});
        CHECK(e.value == brute);
        CHECK(e.value == 1.0);
        CHECK(e.certified);
        CHECK(e.tail_estimate == 0.0);
        CHECK(!e.divergent);
    }
    CHECK(calderon_sum(psi, fam, Vec{0.3}).value == 1.0);
}

TEST_CASE("zero profile and singular points") {
    const auto z = FrequencyProfile::zero(1);
    for (double xi : {-2.0, 0.3, 7.0}) CHECK(calderon_sum(z, dyadic(), Vec{xi}).value == 0.0);

    const auto lowpass = FrequencyProfile::piecewise_constant({Box{Vec{-1.0}, Vec{1.0}}}, {1.0});
    CHECK_THROWS_AS(calderon_sum(lowpass, dyadic(), Vec{0.0}), SingularPointError);
    // Shannon vanishes at the origin, so the sum there is defined and zero.
    CHECK(calderon_sum(shannon(), dyadic(), Vec{0.0}).value == 0.0);
}

TEST_CASE("gabor window tiling gives one") {
    const auto g = FrequencyProfile::piecewise_constant({Box{Vec{0.0}, Vec{1.0}}}, {1.0}).on_modulation_line(1);
    const auto fam = AutomorphismFamily::gabor_shifts(1.0, -kInf, kInf, WeightSpec::constant(), MetricSpace::gabor());
    for (int i = 0; i < 200; ++i) {
        const double xi = -50.0 + 100.0 * i / 199.0;
        const auto e = calderon_sum(g, fam, Vec{xi, 1.0});
        CHECK(std::abs(e.value - 1.0) <= 1e-12);
        CHECK(e.certified);
    }
}

TEST_CASE("gabor sum matches the direct translation formula") {
    Rng rng(17);
    for (int t = 0; t < 20; ++t) {
        const auto base = random_profile_1d(rng, rng.uniform(-2, 0), rng.uniform(0.5, 3), 1 + t % 6);
        const auto g = base.on_modulation_line(1);
        const double step = rng.uniform(0.3, 1.5);
        const auto fam = AutomorphismFamily::gabor_shifts(step, -kInf, kInf, WeightSpec::constant(),
                                                          MetricSpace::gabor());
        for (int k = 0; k < 25; ++k) {
            const double xi = rng.uniform(-10, 10);
            double direct = 0.0;
            for (long j = -200; j <= 200; ++j) {
                const double v = base(Vec{xi - step * static_cast<double>(j)});
                direct += v * v;
            }
            CHECK(calderon_sum(g, fam, Vec{xi, 1.0}).value == doctest::Approx(direct).epsilon(1e-13));
        }
    }
}

TEST_CASE("quadratic scaling") {
    Rng rng(2);
    const auto psi = random_profile_1d(rng, 0.25, 2.0, 7);
    const auto fam = dyadic(WeightSpec::geometric(0.5));
    for (double c : {-3.0, 0.5, 2.0}) {
        const auto scaled = psi.scaled(c);
        for (int k = 0; k < 50; ++k) {
            const Vec xi{rng.uniform(-5, 5)};
            CHECK(calderon_sum(scaled, fam, xi).value ==
                  doctest::Approx(c * c * calderon_sum(psi, fam, xi).value).epsilon(1e-14));
        }
    }
}

TEST_CASE("partition additivity over level sets") {
    Rng rng(41);
    const auto psi = random_profile_1d(rng, 0.3, 3.0, 5);
    std::vector<AutomorphismFamily> fams{
        dyadic(), dyadic(WeightSpec::geometric(0.7)),
        AutomorphismFamily::continuous_dilations(0.01, 100.0, WeightSpec::power(-1.0), MetricSpace::l2(1))};
    for (const auto& fam : fams) {
        for (double M : {0.5, 1.0, 3.0, 20.0}) {
            for (int k = 0; k < 20; ++k) {
                const Vec xi{rng.uniform(0.05, 4.0)};
                for (bool jac : {false, true}) {
                    const double all = orbit_integral(psi, fam, xi, jac, LevelSet::all, M).value;
                    const double lo = orbit_integral(psi, fam, xi, jac, LevelSet::below, M).value;
                    const double hi = orbit_integral(psi, fam, xi, jac, LevelSet::above, M).value;
                    CHECK(all == doctest::Approx(lo + hi).epsilon(1e-9));
                }
            }
        }
    }

    std::vector<double> as{1, 2, 4, 8}, ss{-2, -1, 0, 1, 2};
    const auto sh = AutomorphismFamily::shearlets(as, ss, WeightSpec::constant(), MetricSpace::l2(2));
    const auto psi2 = FrequencyProfile::piecewise_constant(
        {Box{Vec{0.5, -1.0}, Vec{2.0, 1.0}}, Box{Vec{-2.0, -1.0}, Vec{-0.5, 1.0}}}, {1.0, 0.5});
    for (int k = 0; k < 50; ++k) {
        const Vec xi{rng.uniform(-1, 1), rng.uniform(-1, 1)};
        const double all = calderon_sum(psi2, sh, xi).value;
        const double lo = orbit_integral(psi2, sh, xi, false, LevelSet::below, 5.0).value;
        const double hi = orbit_integral(psi2, sh, xi, false, LevelSet::above, 5.0).value;
        CHECK(all == doctest::Approx(lo + hi).epsilon(1e-14));
    }
}

TEST_CASE("psi_M closed form for a continuous family") {
    const auto fam =
        AutomorphismFamily::continuous_dilations(1e-6, 1e6, WeightSpec::power(-2.0), MetricSpace::l2(1));
    // delta(a) = a, m(a) = a^-2: int over a in [5/3, 10/3) of da / a.
    const auto e = psi_M(shannon(), fam, Vec{0.3}, 1.0);
    CHECK(std::abs(e.value - std::log(2.0)) < 1e-6);
    // Level set a >= 2 cuts the band at 2.
    CHECK(std::abs(psi_M(shannon(), fam, Vec{0.3}, 2.0).value - std::log(10.0 / 6.0)) < 1e-6);
    // The Calderon sum itself: int a^-2 da over the same band.
    CHECK(std::abs(calderon_sum(shannon(), fam, Vec{0.3}).value - (0.6 - 0.3)) < 1e-6);
}

TEST_CASE("gabor psi_M is dominated by the calderon sum") {
    Rng rng(9);
    const auto g = random_profile_1d(rng, -1.0, 2.0, 4).on_modulation_line(1);
    const auto fam = AutomorphismFamily::gabor_shifts(0.5, -kInf, kInf, WeightSpec::constant(), MetricSpace::gabor());
    for (double M : {1.0, 2.0, 5.0, 50.0})
        for (int k = 0; k < 20; ++k) {
            const Vec xi{rng.uniform(-3, 3), 1.0};
            CHECK(psi_M(g, fam, xi, M).value <= calderon_sum(g, fam, xi).value + 1e-15);
        }
}

TEST_CASE("psi_M decreases to zero in M") {
    const auto psi = shannon();
    const auto fam = dyadic();
    for (double xi : {0.01, 0.3, 0.77, 5.0}) {
        double prev = INFINITY;
        for (int k = 0; k <= 12; ++k) {
            const double v = psi_M(psi, fam, Vec{xi}, std::ldexp(1.0, k)).value;
            CHECK(v <= prev);
            prev = v;
        }
        CHECK(prev == 0.0);
    }
}

TEST_CASE("divergent orbit sums are flagged") {
    const Matrix shear{{1.0, 1.0}, {0.0, 1.0}};
    const auto fam = AutomorphismFamily::matrix_powers(shear, 0, kInf, WeightSpec::geometric(2.0), MetricSpace::l2(2));
    const auto low = FrequencyProfile::piecewise_constant({Box{Vec{-1.0, -1.0}, Vec{1.0, 1.0}}}, {1.0});
    const auto e = psi_M(low, fam, Vec{0.5, 0.0}, 1.0);
    CHECK(e.divergent);
    CHECK(!e.certified);
    CHECK(!e.trace.empty());
}

TEST_CASE("local integrability examples") {
    // Shannon, K = [0.1, 2], M = 2: sum over j >= 1 of |2^j K intersect [1/2, 1)|.
    const auto r = local_integrability_check(shannon(), dyadic(), Box{Vec{0.1}, Vec{2.0}}, 2.0);
    CHECK(r.verdict == IntegrabilityVerdict::finite);
    double oracle = 0.0;
    for (int j = 1; j <= 60; ++j) oracle += interval_overlap(0.1 * std::ldexp(1.0, j), std::ldexp(2.0, j), 0.5, 1.0);
    CHECK(oracle == doctest::Approx(1.2));
    CHECK(r.value == doctest::Approx(oracle).epsilon(1e-13));
    CHECK(r.certified);

    CHECK_THROWS_AS(local_integrability_check(shannon(), dyadic(), Box{Vec{-0.5}, Vec{2.0}}, 2.0), InputError);

    // Anisotropic A = diag(2, 3), m = 1, profile 1 on [-4,4)^2 minus [-1,1)^2.
    const Matrix a = Matrix::diag({2.0, 3.0});
    const auto fam = AutomorphismFamily::matrix_powers(a, -kInf, kInf, WeightSpec::constant(), MetricSpace::l2(2));
    const auto ring = FrequencyProfile::piecewise_constant(
        {Box{Vec{-4.0, -4.0}, Vec{4.0, -1.0}}, Box{Vec{-4.0, 1.0}, Vec{4.0, 4.0}}, Box{Vec{-4.0, -1.0}, Vec{-1.0, 1.0}},
         Box{Vec{1.0, -1.0}, Vec{4.0, 1.0}}},
        {1.0, 1.0, 1.0, 1.0});
    const Box K{Vec{0.5, 0.5}, Vec{1.0, 1.0}};
    const double M = 2.0;
    const auto ra = local_integrability_check(ring, fam, K, M);
    CHECK(ra.verdict == IntegrabilityVerdict::finite);
    // Oracle: H_M^c = {j >= 1} since L(A^j) = 3^j for j >= 0 and < 1 otherwise;
    // each term is the area of the rectangle A^j K inside the ring.
    double exact = 0.0;
    for (int j = 1; j <= 40; ++j) {
        const double x0 = 0.5 * std::pow(2.0, j), x1 = std::pow(2.0, j);
        const double y0 = 0.5 * std::pow(3.0, j), y1 = std::pow(3.0, j);
        const double outer = interval_overlap(x0, x1, -4, 4) * interval_overlap(y0, y1, -4, 4);
        const double inner = interval_overlap(x0, x1, -1, 1) * interval_overlap(y0, y1, -1, 1);
        exact += outer - inner;
    }
    CHECK(ra.value == doctest::Approx(exact).epsilon(1e-12));
    // Superposition bound: images A^j K overlap at most S = ceil(log_2(D/d)) times.
    const double d = std::hypot(0.5, 0.5), D = std::hypot(1.0, 1.0);
    const double S = std::ceil(std::log(D / d) / std::log(2.0));
    CHECK(ra.value <= S * ring.norm_squared());

    // Shear powers with m(j) = 2^j on a box away from e: divergent evidence.
    const Matrix shear{{1.0, 1.0}, {0.0, 1.0}};
    const auto bad = AutomorphismFamily::matrix_powers(shear, 0, kInf, WeightSpec::geometric(2.0), MetricSpace::l2(2));
    const auto low = FrequencyProfile::piecewise_constant({Box{Vec{-1.0, -1.0}, Vec{1.0, 1.0}}}, {1.0});
    const auto rd = local_integrability_check(low, bad, Box{Vec{0.2, -0.1}, Vec{0.8, 0.1}}, 1.0);
    CHECK(rd.verdict == IntegrabilityVerdict::divergent);
    CHECK(rd.trace.size() >= 3);
}

TEST_CASE("pullback square integral") {
    Rng rng(3);
    const auto psi = random_profile_1d(rng, -1.0, 2.0, 5);
    // Oracle: fine midpoint rule on a piecewise-constant integrand.
    const Matrix A{{-1.7}};
    const Vec t{0.3};
    const Box K{Vec{-1.0}, Vec{1.5}};
    const int n = 2'000'000;
    double mid = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = -1.0 + 2.5 * (i + 0.5) / n;
        const double v = psi(Vec{-1.7 * x + 0.3});
        mid += v * v;
    }
    mid *= 2.5 / n;
    CHECK(pullback_square_integral(psi, A, t, K) == doctest::Approx(mid).epsilon(1e-5));

    // 2D piecewise-constant under a shear: area of preimage times value squared.
    const auto sq = FrequencyProfile::piecewise_constant({Box{Vec{0.0, 0.0}, Vec{1.0, 1.0}}}, {2.0});
    const Matrix S{{1.0, 0.5}, {0.0, 2.0}};
    // Preimage of [0,1)^2 under S is a parallelogram of area 1/2; it lies in K.
    CHECK(pullback_square_integral(sq, S, Vec{0.0, 0.0}, Box{Vec{-1.0, -1.0}, Vec{2.0, 2.0}}) ==
          doctest::Approx(4.0 * 0.5).epsilon(1e-13));
}

TEST_CASE("helpers") {
    const auto b = image_box(Matrix{{1.0, 1.0}, {0.0, 2.0}}, Box{Vec{0.0, 0.0}, Vec{1.0, 1.0}}, Vec{1.0, 0.0});
    CHECK(b.lo[0] == 1.0);
    CHECK(b.hi[0] == 3.0);
    CHECK(b.hi[1] == 2.0);
    CHECK(closed_boxes_meet(Box{Vec{0.0}, Vec{1.0}}, Box{Vec{1.0}, Vec{2.0}}));
    CHECK(!closed_boxes_meet(Box{Vec{0.0}, Vec{1.0}}, Box{Vec{1.5}, Vec{2.0}}));
    const auto [jl, jh] = gabor_index_window(2.5, 1.0, 0.0, 1.0);
    CHECK(jl <= 2);
    CHECK(jh >= 2);
    CHECK(box_min_norm(MetricSpace::l2(2), Box{Vec{3.0, -1.0}, Vec{4.0, 1.0}}) == 3.0);
    CHECK(box_max_norm(MetricSpace::linf(2), Box{Vec{3.0, -1.0}, Vec{4.0, 5.0}}) == 5.0);
}
