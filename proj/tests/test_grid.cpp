#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ctl/errors.hpp"
#include "ctl/grid.hpp"
#include "oracles.hpp"

#include <cmath>
#include <random>

using namespace ctl;

namespace {

PeriodicGrid square(double L, int n) { return PeriodicGrid(Lattice({L, 0.0}, {0.0, L}), n, n); }

double sup_diff(const ScalarField& a, const std::function<double(double, double)>& f) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - f(a.grid.x1(k), a.grid.x2(k))));
    return m;
}

} // namespace

TEST_CASE("grid layout maps (i,j) to (i/n1) omega1 + (j/n2) omega2, row-major") {
    const PeriodicGrid g(Lattice({2.0, 0.0}, {0.5, 3.0}), 8, 10);
    CHECK(g.size() == 80);
    CHECK(g.index(3, 7) == 3u * 10 + 7);
    const std::size_t k = g.index(3, 7);
    CHECK(g.x1(k) == doctest::Approx(3.0 / 8 * 2.0 + 7.0 / 10 * 0.5));
    CHECK(g.x2(k) == doctest::Approx(7.0 / 10 * 3.0));
}

TEST_CASE("odd or tiny resolutions are configuration errors") {
    CHECK_THROWS_AS(PeriodicGrid(Lattice({1.0, 0.0}, {0.0, 1.0}), 9, 8), ConfigError);
    CHECK_THROWS_AS(PeriodicGrid(Lattice({1.0, 0.0}, {0.0, 1.0}), 8, 6), ConfigError);
}

TEST_CASE("derivative of a constant vanishes") {
    const ScalarField f(square(3.0, 16), 2.5);
    for (Scheme s : {Scheme::spectral, Scheme::fd2}) {
        CHECK(derivative(f, Direction::x1, s).sup_norm() < 1e-13);
        CHECK(derivative(f, Direction::x2, s).sup_norm() < 1e-13);
    }
}

TEST_CASE("spectral derivative of a sine is exact") {
    const double L = 2.7, c = 2.0 * oracle::pi / L;
    const PeriodicGrid g = square(L, 32);
    const ScalarField f = ScalarField::from(g, [c](double x, double) { return std::sin(c * x); });
    const ScalarField d = derivative(f, Direction::x1);
    CHECK(sup_diff(d, [c](double x, double) { return c * std::cos(c * x); }) < 1e-12);
    CHECK(derivative(f, Direction::x2).sup_norm() < 1e-12);
}

TEST_CASE("fd2 derivative converges with order close to two") {
    const double L = 2.7, c = 2.0 * oracle::pi / L;
    std::vector<double> err;
    for (int n : {16, 32, 64}) {
        const ScalarField f = ScalarField::from(square(L, n), [c](double x, double) { return std::sin(c * x); });
        err.push_back(sup_diff(derivative(f, Direction::x1, Scheme::fd2),
                               [c](double x, double) { return c * std::cos(c * x); }));
    }
    CHECK(oracle::order(err[0], err[1]) >= 1.9);
    CHECK(oracle::order(err[1], err[2]) >= 1.9);
}

TEST_CASE("derivatives on a sheared lattice follow the chain rule") {
    // f is periodic on the lattice spanned by (2,0) and (0.6,1.5) when it is a
    // character of the dual lattice.
    const PeriodicGrid g(Lattice({2.0, 0.0}, {0.6, 1.5}), 32, 32);
    // dual vectors k with k.w1 = 2 pi, k.w2 = 0  and  k.w1 = 0, k.w2 = 2 pi
    const double k1x = oracle::pi, k1y = -oracle::pi * 0.6 / 1.5;
    const double k2x = 0.0, k2y = 2.0 * oracle::pi / 1.5;
    const double kx = k1x + k2x, ky = k1y + k2y;
    const ScalarField f = ScalarField::from(g, [&](double x, double y) { return std::sin(kx * x + ky * y); });
    const auto [d1, d2] = gradient(f);
    CHECK(sup_diff(d1, [&](double x, double y) { return kx * std::cos(kx * x + ky * y); }) < 1e-11);
    CHECK(sup_diff(d2, [&](double x, double y) { return ky * std::cos(kx * x + ky * y); }) < 1e-11);
}

TEST_CASE("integrate: constants, mean-zero functions and weights") {
    const double L = 3.0;
    const PeriodicGrid g = square(L, 16);
    CHECK(integrate(ScalarField(g, 1.0)) == doctest::Approx(L * L).epsilon(1e-14));
    const ScalarField s = ScalarField::from(g, [L](double x, double) { return std::sin(2 * oracle::pi * x / L); });
    CHECK(std::abs(integrate(s, ScalarField(g, 1.0))) < 1e-12);

    // e^{2 lambda} with lambda = -1/2 log 2 on the 2 pi x 2 pi lattice is 1/2.
    const PeriodicGrid c = square(2 * oracle::pi, 32);
    const ScalarField lam(c, -0.5 * std::log(2.0));
    CHECK(integrate(ScalarField(c, 1.0), exp(2.0 * lam)) == doctest::Approx(2 * oracle::pi * oracle::pi));
}

TEST_CASE("integrating fields on different grids is a dimension error") {
    CHECK_THROWS_AS(integrate(ScalarField(square(1.0, 8), 1.0), ScalarField(square(1.0, 16), 1.0)), DimensionError);
}

TEST_CASE("property: spectral derivatives integrate to zero and commute") {
    const PeriodicGrid g = square(2 * oracle::pi, 32);
    for (unsigned seed = 1; seed <= 5; ++seed) {
        std::mt19937 rng(seed);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        const double a = u(rng), b = u(rng), c = u(rng);
        const int m1 = 1 + int(seed % 3), m2 = 1 + int(seed % 2);
        const ScalarField f = ScalarField::from(g, [&](double x, double y) {
            return std::exp(a * std::sin(m1 * x + b) * std::cos(m2 * y + c));
        });
        const ScalarField d1 = derivative(f, Direction::x1), d2 = derivative(f, Direction::x2);
        CHECK(std::abs(integrate(d1)) <= 1e-12);
        CHECK(std::abs(integrate(d2)) <= 1e-12);
        const ScalarField d12 = derivative(d1, Direction::x2), d21 = derivative(d2, Direction::x1);
        CHECK((d12 - d21).sup_norm() < 1e-10);
    }
}
