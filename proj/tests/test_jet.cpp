#include "bpinn/jet.hpp"

#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"

using namespace bpinn;

TEST(Jet, LiftCoordinateSeedsIdentity) {
    const std::array<double, 2> x{0.3, 0.7};
    const Jet2 j = lift_coordinate(std::span<const double>(x), 1);
    EXPECT_EQ(j.dim, 2);
    EXPECT_DOUBLE_EQ(j.value, 0.7);
    EXPECT_DOUBLE_EQ(j.grad[0], 0.0);
    EXPECT_DOUBLE_EQ(j.grad[1], 1.0);
    EXPECT_DOUBLE_EQ(j.h(1, 1), 0.0);
}

TEST(Jet, LiftVariableLinearFunctional) {
    const std::array<double, 2> x{0.25, -0.5};
    const std::array<double, 2> w{2.0, 3.0};
    const Jet2 j = lift_variable(std::span<const double>(x), std::span<const double>(w));
    EXPECT_DOUBLE_EQ(j.value, 2.0 * 0.25 + 3.0 * -0.5);
    EXPECT_DOUBLE_EQ(j.grad[0], 2.0);
    EXPECT_DOUBLE_EQ(j.grad[1], 3.0);
}

TEST(Jet, ProductRuleMatchesFiniteDifferences) {
    // f(x) = (x0 + 2 x1) * sigma3(x0 - 0.2), checked against central
    // differences along each axis at a kink-avoiding point.
    auto eval = [](double x0, double x1) {
        const std::array<double, 2> x{x0, x1};
        const std::array<double, 2> w1{1.0, 2.0};
        Jet2 a = lift_variable(std::span<const double>(x), std::span<const double>(w1));
        Jet2 b = lift_coordinate(std::span<const double>(x), 0);
        b.value -= 0.2;
        return jet_mul(a, jet_sigma3(b));
    };
    const double x0 = 0.9, x1 = 0.4;
    const Jet2 j = eval(x0, x1);
    auto f0 = [&](double t) { return eval(t, x1).value; };
    auto f1 = [&](double t) { return eval(x0, t).value; };
    EXPECT_NEAR(j.grad[0], oracle::fd1(f0, x0), 1e-6 * (1.0 + std::abs(j.grad[0])));
    EXPECT_NEAR(j.grad[1], oracle::fd1(f1, x1), 1e-6 * (1.0 + std::abs(j.grad[1])));
    EXPECT_NEAR(j.h(0, 0), oracle::fd2(f0, x0), 1e-4 * (1.0 + std::abs(j.h(0, 0))));
    EXPECT_NEAR(j.h(1, 1), oracle::fd2(f1, x1), 1e-4 * (1.0 + std::abs(j.h(1, 1))));
    // mixed partial by nested differences
    const double h = 1e-4;
    const double mixed = (eval(x0 + h, x1 + h).value - eval(x0 + h, x1 - h).value -
                          eval(x0 - h, x1 + h).value + eval(x0 - h, x1 - h).value) /
                         (4.0 * h * h);
    EXPECT_NEAR(j.h(0, 1), mixed, 1e-4 * (1.0 + std::abs(j.h(0, 1))));
    EXPECT_DOUBLE_EQ(j.h(0, 1), j.h(1, 0));
}

TEST(Jet, Sigma3IsCSquaredAtZero) {
    // Value, gradient, and Hessian all vanish as the argument crosses zero.
    const std::array<double, 1> x{0.0};
    Jet2 a = lift_coordinate(std::span<const double>(x), 0);
    const Jet2 z = jet_sigma3(a);
    EXPECT_DOUBLE_EQ(z.value, 0.0);
    EXPECT_DOUBLE_EQ(z.grad[0], 0.0);
    EXPECT_DOUBLE_EQ(z.h(0, 0), 0.0);
    // approach from the right: sigma3 ~ s^3, derivatives -> 0
    for (double s : {1e-3, 1e-5}) {
        const std::array<double, 1> xs{s};
        const Jet2 r = jet_sigma3(lift_coordinate(std::span<const double>(xs), 0));
        EXPECT_NEAR(r.value, s * s * s, 1e-18);
        EXPECT_NEAR(r.grad[0], 3.0 * s * s, 1e-12);
        EXPECT_NEAR(r.h(0, 0), 6.0 * s, 1e-9);
    }
}

TEST(Jet, AddAndScaleAreLinear) {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int t = 0; t < 20; ++t) {
        Jet2 a(3), b(3);
        a.value = u(rng);
        b.value = u(rng);
        for (int i = 0; i < 3; ++i) {
            a.grad[i] = u(rng);
            b.grad[i] = u(rng);
            for (int j = 0; j < 3; ++j) {
                a.h(i, j) = u(rng);
                b.h(i, j) = u(rng);
            }
        }
        const double c = u(rng);
        const Jet2 s = jet_add(jet_scale(a, c), b);
        EXPECT_DOUBLE_EQ(s.value, c * a.value + b.value);
        for (int i = 0; i < 3; ++i) {
            EXPECT_DOUBLE_EQ(s.grad[i], c * a.grad[i] + b.grad[i]);
            for (int j = 0; j < 3; ++j) EXPECT_DOUBLE_EQ(s.h(i, j), c * a.h(i, j) + b.h(i, j));
        }
    }
}

TEST(Jet, DimensionMismatchThrows) {
    EXPECT_THROW(jet_add(Jet2(1), Jet2(2)), std::invalid_argument);
    EXPECT_THROW(Jet2(0), std::invalid_argument);
    EXPECT_THROW(Jet2(4), std::invalid_argument);
}
