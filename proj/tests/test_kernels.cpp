#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "dilastab/kernels.hpp"

using namespace dilastab;

namespace {

// midpoint Riemann oracle for int f(t,u)^2 du on [-R, R]
double l2_riemann(const Kernel& k, double t, double R, double h) {
    double acc = 0.0;
    const double lo = k.support() == Support::PositiveHalfline ? 0.0 : -R;
    for (double u = lo + 0.5 * h; u < R; u += h) {
        const double f = k(t, u);
        acc += f * f;
    }
    return acc * h;
}

}  // namespace

TEST_CASE("fractional_ma values") {
    const Kernel k = fractional_ma(0.75);
    const double cH = fbm_ma_normalizer(0.75);
    CHECK(k(2.0, 1.0) == doctest::Approx(cH).epsilon(1e-14));  // 1^{1/4} - 0
    CHECK(k(1.0, 2.0) == 0.0);   // u > t >= 0
    CHECK(k(1.0, 1.0) == 0.0);
    CHECK(k(1.0, 0.0) == 0.0);
    // scaling spot-check: f(2,1) = 4^{1/4} f(0.5, 0.25)
    CHECK(k(2.0, 1.0) ==
          doctest::Approx(std::pow(4.0, 0.25) * k(0.5, 0.25)).epsilon(1e-13));
    CHECK_THROWS_AS(fractional_ma(0.5), std::invalid_argument);
    CHECK_THROWS_AS(fractional_ma(1.0), std::invalid_argument);
}

TEST_CASE("sub_fractional values") {
    const Kernel k = sub_fractional(0.75);
    for (double u : {-3.0, -1.0, -0.2, 0.4, 2.0})
        CHECK(k(0.0, u) == 0.0);
    const double cH = fbm_ma_normalizer(0.75) / std::sqrt(2.0);
    // t=1, u=-1: (2^{1/4} - 1) + (0 - 1)
    CHECK(k(1.0, -1.0) ==
          doctest::Approx(cH * (std::pow(2.0, 0.25) - 2.0)).epsilon(1e-13));
    CHECK_THROWS_AS(sub_fractional(0.4), std::invalid_argument);
}

TEST_CASE("log_fractional values") {
    const Kernel k = log_fractional();
    CHECK(k(2.0, 1.0) == 0.0);  // log 1 - log 1
    CHECK(k(3.0, 1.0) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    CHECK(k(1.0, 1.0) == 0.0);
    // alpha - delta/2 = 0: f(t,u) = f(t/T, u/T)
    CHECK(k(3.0, -2.0) == doctest::Approx(k(0.3, -0.2)).epsilon(1e-13));
}

TEST_CASE("sghir values") {
    const Kernel k = sghir(1.0);
    CHECK(k(1.0, 1.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));
    CHECK(k(1.0, -1.0) == 0.0);
    CHECK(k(-1.0, 1.0) == 0.0);
    CHECK(k.support() == Support::PositiveHalfline);
    // DS functional equation with (K/2, -1): f(t,u) = T^{(K+1)/2} f(t/T, uT)
    const double T = 3.7;
    CHECK(k(1.2, 0.8) ==
          doctest::Approx(std::pow(T, 1.0) * k(1.2 / T, 0.8 * T)).epsilon(1e-13));
    CHECK_THROWS_AS(sghir(0.0), std::invalid_argument);
    CHECK_THROWS_AS(sghir(2.0), std::invalid_argument);
}

TEST_CASE("well_balanced values") {
    const Kernel k = well_balanced(0.6, 1.5);
    CHECK(k(2.0, 1.0) == 0.0);  // |1|^p - |1|^p
    const double p = 0.6 - 1.0 / 1.5;
    CHECK(k(3.0, 1.0) ==
          doctest::Approx(std::pow(2.0, p) - 1.0).epsilon(1e-12));
    CHECK(k(3.0, 1.0) == doctest::Approx(-0.04517).epsilon(1e-3));
    CHECK_THROWS_AS(well_balanced(0.5, 2.0), std::invalid_argument);  // H = 1/alpha
}

TEST_CASE("well_balanced homogeneity") {
    const Kernel k = well_balanced(0.6, 1.5);
    const double p = 0.6 - 1.0 / 1.5;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    std::uniform_real_distribution<double> uT(0.2, 5.0);
    for (int i = 0; i < 2000; ++i) {
        const double t = u(rng), v = u(rng), T = uT(rng);
        const double lhs = k(T * t, T * v);
        const double rhs = std::pow(T, p) * k(t, v);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
}

TEST_CASE("zbeta auxiliary kernel") {
    CHECK(zbeta_kernel(1.0, 1.0) ==
          doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));
    CHECK(zbeta_kernel(1.0, -1.0) == 0.0);
    CHECK(zbeta_kernel(-1.0, 1.0) == 0.0);
    CHECK(zbeta_kernel(0.0, 1.0) == 0.0);  // cases, not the x->0 limit

    // f(x, Tt) = T f(Tx, t)
    const double lhs = zbeta_kernel(0.5, 2.0 * 3.0);
    const double rhs = 2.0 * zbeta_kernel(2.0 * 0.5, 3.0);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-14));
    CHECK(lhs == doctest::Approx((1.0 - std::exp(-3.0)) / 0.5).epsilon(1e-14));

    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.01, 8.0);
    for (int i = 0; i < 5000; ++i) {
        const double x = u(rng), t = u(rng), T = u(rng);
        CHECK(zbeta_kernel(x, T * t) ==
              doctest::Approx(T * zbeta_kernel(T * x, t)).epsilon(1e-12));
    }
}

TEST_CASE("scaling functional equation on the catalog") {
    struct Case {
        Kernel kernel;
        double tol;
    };
    const Case cases[] = {
        {fractional_ma(0.7), 1e-12},
        {sub_fractional(0.7), 1e-12},
        {sub_fractional(0.9), 1e-12},
        {log_fractional(), 1e-11},
        {sghir(0.5), 1e-12},
        {sghir(1.5), 1e-12},
    };
    for (const auto& c : cases) {
        REQUIRE(c.kernel.claimed_law().has_value());
        const double dev =
            check_kernel_scaling(c.kernel, *c.kernel.claimed_law(), 2000, 20240811);
        INFO(c.kernel.name());
        CHECK(dev <= c.tol);
    }
}

TEST_CASE("wrong law is falsified") {
    const double dev =
        check_kernel_scaling(log_fractional(), ScalingLaw{0.6, 1.0}, 200, 3);
    CHECK(dev > 0.01);
}

TEST_CASE("l2 norms against closed forms and a Riemann oracle") {
    QuadratureConfig cfg;

    CHECK(l2_norm_sq(sub_fractional(0.75), 0.0, cfg) == 0.0);

    // unit-variance normalization of the moving-average kernel
    const Kernel ma = fractional_ma(0.75);
    const double v = l2_norm_sq(ma, 1.0, cfg);
    CHECK(v == doctest::Approx(1.0).epsilon(1e-7));

    // quadrature against the fixed-grid oracle on the same window (the
    // slow u^{2H-3} tail is excluded from both sides)
    const double bp[2] = {0.0, 1.0};
    const auto windowed = integrate_adaptive(
        [&](double u) {
            const double f = ma(1.0, u);
            return f * f;
        },
        -2000.0, 1.0, bp, cfg);
    CHECK(windowed.value ==
          doctest::Approx(l2_riemann(ma, 1.0, 2000.0, 1e-4)).epsilon(2e-4));

    // sub-fractional variance at t=1 equals 2 - 2^{2H-1}
    const Kernel sf = sub_fractional(0.75);
    CHECK(l2_norm_sq(sf, 1.0, cfg) ==
          doctest::Approx(2.0 - std::sqrt(2.0)).epsilon(1e-8));

    // sghir(K=1): int_0^inf (1-e^{-u})^2 u^{-2} du = 2 log 2
    CHECK(l2_norm_sq(sghir(1.0), 1.0, cfg) ==
          doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-8));
}

TEST_CASE("l2 norm is finite and grows smoothly in t") {
    QuadratureConfig cfg;
    const Kernel k = sub_fractional(0.8);
    double prev = 0.0;
    for (double t : {0.25, 0.5, 1.0, 2.0, 4.0}) {
        const double v = l2_norm_sq(k, t, cfg);
        CHECK(std::isfinite(v));
        CHECK(v > prev);  // variance increases with t for this kernel
        // refinement between grid points: value at midpoint sits between
        const double mid = l2_norm_sq(k, 0.75 * t, cfg);
        CHECK(mid > 0.0);
        CHECK(mid < v * 1.0001);
        prev = v;
    }
}

TEST_CASE("tail bound really bounds the tail") {
    const Kernel k = sub_fractional(0.75);
    QuadratureConfig cfg;
    const double U = 30.0;
    const double bound = l2_tail_bound(k, 1.0, U);
    // Riemann estimate of the actual tail on [U, 3000]
    double actual = 0.0;
    for (double u = U + 0.005; u < 3000.0; u += 0.01) {
        const double fm = k(1.0, -u);
        actual += fm * fm * 0.01;
    }
    CHECK(actual <= bound);
    CHECK(bound < 1e-2);
    CHECK_THROWS_AS(l2_tail_bound(k, 1.0, 0.5), std::invalid_argument);
}

TEST_CASE("make_kernel catalog lookup") {
    CHECK(make_kernel("sub_fractional", {{"H", 0.7}}).name() == "sub_fractional");
    CHECK(make_kernel("log_fractional", {}).claimed_law()->alpha == 0.5);
    CHECK_THROWS_AS(make_kernel("nope", {}), std::invalid_argument);
    CHECK_THROWS_AS(make_kernel("sghir", {}), std::invalid_argument);  // missing K
}

TEST_CASE("breakpoints are sorted and deduplicated") {
    const std::vector<double> times{2.0, 1.0, 2.0};
    const auto bp = sub_fractional(0.7).breakpoints(times);
    const std::vector<double> want{-2.0, -1.0, 0.0, 1.0, 2.0};
    CHECK(bp == want);
    CHECK(sghir(1.0).breakpoints(times) == std::vector<double>{0.0});
}

TEST_CASE("sub_fractional is even in t") {
    const Kernel k = sub_fractional(0.7);
    for (double t : {0.5, 1.0, 3.0})
        for (double u : {-5.0, -1.0, -0.3, 0.2, 0.7, 2.0})
            CHECK(k(t, u) == k(-t, u));
}

TEST_CASE("kernel tails survive argument collapse far out") {
    // fl(t - u) == fl(-u) beyond |u| ~ 1/eps; the evaluation must still
    // return the true power-law value, not zero
    const Kernel ma = fractional_ma(0.9);
    const double v = 1e20;
    const double f = ma(1.0, -v);
    const double want = fbm_ma_normalizer(0.9) * 0.4 * std::pow(v, -0.6);
    CHECK(f == doctest::Approx(want).epsilon(1e-6));
    CHECK(f > 0.0);

    const Kernel wb = well_balanced(0.6, 1.5);
    const double p = 0.6 - 1.0 / 1.5;
    const double fw = wb(1.0, 1e19);
    CHECK(fw == doctest::Approx(-p * std::pow(1e19, p - 1.0)).epsilon(1e-6));
}
