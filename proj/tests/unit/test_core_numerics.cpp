#include <cmath>
#include <random>

#include <doctest.h>

#include "greenbvp/error.hpp"
#include "greenbvp/grid.hpp"
#include "greenbvp/ivp.hpp"

using namespace greenbvp;

TEST_CASE("grid layout and Simpson weights") {
    const Grid g(64);
    CHECK(g.size() == 65);
    CHECK(g.node(0) == 0.0);
    CHECK(g.node(64) == 1.0);
    CHECK(g.step() == 1.0 / 64);
    CHECK(std::abs(g.weights().sum() - 1.0) <= 1e-14);
    CHECK_THROWS_AS(Grid(63), InvalidArgument);
    CHECK_THROWS_AS(Grid(0), InvalidArgument);
}

TEST_CASE("segment weights integrate cubics on every sub-range") {
    const Grid g(16);
    for (std::size_t a = 0; a <= 16; ++a) {
        for (std::size_t b = a; b <= 16; ++b) {
            const Eigen::VectorXd w = g.segment_weights(a, b);
            double lin = 0.0;
            for (std::size_t k = a; k <= b; ++k) {
                lin += w[static_cast<Eigen::Index>(k - a)] * g.node(k);
            }
            const double ta = g.node(a), tb = g.node(b);
            CHECK(std::abs(lin - 0.5 * (tb * tb - ta * ta)) <= 1e-14);
            if (b - a >= 2) {
                double cub = 0.0;
                for (std::size_t k = a; k <= b; ++k) {
                    cub += w[static_cast<Eigen::Index>(k - a)] * std::pow(g.node(k), 3);
                }
                CHECK(std::abs(cub - 0.25 * (std::pow(tb, 4) - std::pow(ta, 4))) <= 1e-14);
            }
        }
    }
}

TEST_CASE("quadrature examples") {
    const Grid g64(64);
    CHECK(quadrature(SampledFunction::sample_scalar(g64, [](double t) { return t; })) == doctest::Approx(0.5));
    CHECK(quadrature(SampledFunction::sample_scalar(g64, [](double t) { return t * t * t; })) ==
          doctest::Approx(0.25));
    // Antiderivative oracle: int_0^1 e^t dt = e - 1.
    const Grid g256(256);
    const double ex = quadrature(SampledFunction::sample_scalar(g256, [](double t) { return std::exp(t); }));
    CHECK(std::abs(ex - (std::exp(1.0) - 1.0)) <= 1e-10);
    CHECK_THROWS_AS(quadrature(SampledFunction(g64, 2)), InvalidArgument);
}

TEST_CASE("property: Simpson is exact on random cubics") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const Grid g(32);
    for (int trial = 0; trial < 200; ++trial) {
        const double c0 = u(rng), c1 = u(rng), c2 = u(rng), c3 = u(rng);
        const auto f = SampledFunction::sample_scalar(
            g, [&](double t) { return c0 + c1 * t + c2 * t * t + c3 * t * t * t; });
        const double exact = c0 + c1 / 2 + c2 / 3 + c3 / 4;
        CHECK(std::abs(quadrature(f) - exact) <= 1e-13);
    }
}

TEST_CASE("lp norms") {
    const Grid g(128);
    SampledFunction c(g, 2);
    c.values.col(0).setConstant(3.0);
    c.values.col(1).setConstant(4.0);
    const LpNorms nc = lp_norms(c);
    CHECK(nc.l2 == doctest::Approx(5.0).epsilon(1e-14));
    CHECK(nc.sup == doctest::Approx(5.0).epsilon(1e-14));
    CHECK(nc.l1 == doctest::Approx(5.0).epsilon(1e-14));

    const LpNorms nz = lp_norms(SampledFunction(g, 3));
    CHECK(nz.l1 == 0.0);
    CHECK(nz.l2 == 0.0);
    CHECK(nz.sup == 0.0);

    const LpNorms nt = lp_norms(SampledFunction::sample_scalar(g, [](double t) { return t; }));
    CHECK(std::abs(nt.l2 - 1.0 / std::sqrt(3.0)) <= 1e-8);
}

TEST_CASE("property: lp norms are absolutely homogeneous") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    const Grid g(64);
    for (int trial = 0; trial < 20; ++trial) {
        const double a = u(rng), b = u(rng), lambda = 3.0 * u(rng);
        auto f = SampledFunction::sample(g, 2, [&](double t) {
            Eigen::VectorXd v(2);
            v << std::sin(a * t) + b, std::cos(b * t) * a;
            return v;
        });
        const LpNorms base = lp_norms(f);
        const LpNorms scaled = lp_norms(lambda * f);
        const double s = std::abs(lambda);
        CHECK(std::abs(scaled.l1 - s * base.l1) <= 1e-13 * std::max(1.0, s * base.l1));
        CHECK(std::abs(scaled.l2 - s * base.l2) <= 1e-13 * std::max(1.0, s * base.l2));
        CHECK(std::abs(scaled.sup - s * base.sup) <= 1e-13 * std::max(1.0, s * base.sup));
    }
}

TEST_CASE("solve_ivp2 closed-form solutions") {
    const Grid g(256);
    const auto minus = CoefficientSet::constant(1.0, 0.0, -1.0);
    auto c = solve_ivp2(minus, 1.0, 0.0, g);
    CHECK(std::abs(c.y.values(256, 0) - std::cosh(1.0)) <= 1e-8);
    CHECK(std::abs(c.dy.values(256, 0) - std::sinh(1.0)) <= 1e-8);
    auto s = solve_ivp2(minus, 0.0, 1.0, g);
    CHECK(std::abs(s.y.values(256, 0) - std::sinh(1.0)) <= 1e-8);

    const auto damped = CoefficientSet::constant(1.0, 1.0, 0.0);
    auto e = solve_ivp2(damped, 1.0, -1.0, g);
    CHECK(std::abs(e.y.values(256, 0) - std::exp(-1.0)) <= 1e-8);
}

TEST_CASE("solve_ivp2 with sampled forcing and vector data") {
    // x'' + x = 2 cos t has x = t sin t with x(0) = 0, x'(0) = 0.
    const Grid g(128);
    const auto coeffs = CoefficientSet::constant(1.0, 0.0, 1.0);
    SampledFunction forcing(g, 2);
    for (std::size_t i = 0; i < g.size(); ++i) {
        forcing.values(static_cast<Eigen::Index>(i), 0) = 2.0 * std::cos(g.node(i));
        forcing.values(static_cast<Eigen::Index>(i), 1) = 0.0;
    }
    Eigen::VectorXd y0(2), dy0(2);
    y0 << 0.0, 1.0;
    dy0 << 0.0, 0.0;
    const auto sol = solve_ivp2(coeffs, forcing, y0, dy0, g);
    CHECK(std::abs(sol.y.values(128, 0) - std::sin(1.0)) <= 1e-8);
    CHECK(std::abs(sol.y.values(128, 1) - std::cos(1.0)) <= 1e-8);
    CHECK(std::abs(sol.dy.values(128, 0) - (std::sin(1.0) + std::cos(1.0))) <= 1e-8);
}

TEST_CASE("property: RK4 error drops by at least 12 per halving") {
    const auto coeffs = CoefficientSet::constant(1.0, 0.0, -1.0);
    double prev = 0.0;
    for (std::size_t n : {8u, 16u, 32u, 64u}) {
        const Grid g(n);
        const double err = std::abs(solve_ivp2(coeffs, 1.0, 0.0, g).y.values(static_cast<Eigen::Index>(n), 0) -
                                    std::cosh(1.0));
        if (prev > 0.0) {
            CHECK(prev / err >= 12.0);
        }
        prev = err;
    }
}

TEST_CASE("solve_ivp2 rejects singular leading coefficient") {
    const Grid g(16);
    CoefficientSet coeffs{[](double t) { return t - 0.5; }, [](double) { return 0.0; },
                          [](double) { return 0.0; }, false};
    CHECK_THROWS_AS(solve_ivp2(coeffs, 1.0, 0.0, g), SingularCoefficient);
}
