#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ctl/errors.hpp"
#include "ctl/variation.hpp"
#include "oracles.hpp"

using namespace ctl;

namespace {

std::vector<std::pair<std::string, Immersion>> families() {
    return {{"clifford", clifford_torus(64, 64)},
            {"flat-cmc-0.6", flat_cmc_torus(0.6, 64, 64)},
            {"hopf-circle-1", hopf_torus_circle(1.0, 64, 64)},
            {"hopf-wobbly", hopf_torus_curve(wobbly_circle_curve(1.0, 0.05, 2, 256), 64, 64)}};
}

ScalarField field_of(const PeriodicGrid& g, const std::function<double(double, double)>& f) {
    ScalarField s(g);
    for (std::size_t k = 0; k < g.size(); ++k) s[k] = f(g.x1(k), g.x2(k));
    return s;
}

double sup_diff(const VectorField4& a, const VectorField4& b) { return (a - b).sup_norm(); }

// Central difference of a geometric quantity along normalize(Phi + t w). The
// perturbed immersions are not conformal, so the general-chart formulas are used.
template <class F>
auto central(const GeometryFields& geo, const VariationField& w, double t, F&& f) {
    const GeometryFields p = geometry_of_points(path_point(geo.phi, w.w, t), false);
    const GeometryFields m = geometry_of_points(path_point(geo.phi, w.w, -t), false);
    return (0.5 / t) * (f(p) - f(m));
}

} // namespace

TEST_CASE("decompose") {
    const GeometryFields geo = geometry(hopf_torus_circle(1.0, 32, 32));
    SUBCASE("w = n gives (0, 0, 1)") {
        const VariationField w = decompose(geo, geo.normal);
        CHECK(w.sigma1.sup_norm() < 1e-12);
        CHECK(w.sigma2.sup_norm() < 1e-12);
        CHECK((w.v - 1.0).sup_norm() < 1e-12);
        CHECK_FALSE(w.projected);
    }
    SUBCASE("w = d1 Phi gives (1, 0, 0)") {
        const VariationField w = decompose(geo, geo.d1);
        CHECK((w.sigma1 - 1.0).sup_norm() < 1e-10);
        CHECK(w.sigma2.sup_norm() < 1e-10);
        CHECK(w.v.sup_norm() < 1e-10);
    }
    SUBCASE("random smooth fields are tangent to S^3 and reconstruct") {
        for (std::uint64_t seed : {1u, 2u, 3u}) {
            const VectorField4 raw = random_smooth_field(geo, seed);
            CHECK(dot(raw, geo.phi).sup_norm() <= 1e-10);
            const VariationField w = decompose(geo, raw);
            const VectorField4 rebuilt = w.sigma1 * geo.d1 + w.sigma2 * geo.d2 + w.v * geo.normal;
            CHECK(sup_diff(rebuilt, raw) <= 1e-9);
            CHECK(sup_diff(w.w, raw) <= 1e-10);
        }
        // the same seed gives the same field
        CHECK(random_smooth_field(geo, 9).values == random_smooth_field(geo, 9).values);
    }
    SUBCASE("radial components are projected out with a warning") {
        const VariationField w = decompose(geo, geo.normal + 1e-3 * geo.phi);
        CHECK(w.projected);
        CHECK(w.radial_defect == doctest::Approx(1e-3));
        CHECK_FALSE(w.warning.empty());
        CHECK(dot(w.w, geo.phi).sup_norm() <= 1e-12);
        CHECK((w.v - 1.0).sup_norm() < 1e-12);
    }
}

TEST_CASE("path_point stays on the sphere and leaves with velocity w") {
    const GeometryFields geo = geometry(flat_cmc_torus(0.6, 32, 32));
    const VectorField4 w = random_smooth_field(geo, 4);
    const VectorField4 p = path_point(geo.phi, w, 0.3);
    for (const Vec4& y : p.values) CHECK(std::abs(y.norm() - 1.0) <= 1e-14);
    const double h = 1e-5;
    const VectorField4 vel = (0.5 / h) * (path_point(geo.phi, w, h) - path_point(geo.phi, w, -h));
    CHECK(sup_diff(vel, w) <= 1e-7);
}

TEST_CASE("dn/dt") {
    const GeometryFields geo = geometry(clifford_torus(64, 64));
    SUBCASE("w = 0 gives 0") {
        const VariationField w = normal_variation(geo, ScalarField(geo.grid, 0.0));
        CHECK(dn_dt(geo, w).sup_norm() == 0.0);
    }
    SUBCASE("v = 1 on Clifford gives -Phi and matches the difference quotient") {
        const VariationField w = normal_variation(geo, ScalarField(geo.grid, 1.0));
        const VectorField4 a = dn_dt(geo, w);
        CHECK(sup_diff(a, -1.0 * geo.phi) <= 1e-10);
        const VectorField4 fd = central(geo, w, 1e-4, [](const GeometryFields& g) { return g.normal; });
        CHECK(sup_diff(a, fd) <= 1e-6);
    }
    SUBCASE("random w against the difference quotient of the Gauss map") {
        const VariationField w = decompose(geo, random_smooth_field(geo, 11));
        const VectorField4 a = dn_dt(geo, w);
        const VectorField4 fd = central(geo, w, 1e-4, [](const GeometryFields& g) { return g.normal; });
        CHECK(sup_diff(a, fd) <= 1e-6 * a.sup_norm());
    }
}

TEST_CASE("dH/dt") {
    SUBCASE("Clifford with v = 1 gives 1/2(|II|^2 + 2) = 2") {
        const GeometryFields geo = geometry(clifford_torus(64, 64));
        const VariationField w = normal_variation(geo, ScalarField(geo.grid, 1.0));
        CHECK((dH_dt(geo, w) - 2.0).sup_norm() <= 1e-10);
    }
    SUBCASE("tangential w on a constant-H torus gives 0") {
        const GeometryFields geo = geometry(flat_cmc_torus(0.6, 64, 64));
        const VariationField w = decompose(geo, geo.d1 + 0.3 * geo.d2);
        CHECK(dH_dt(geo, w).sup_norm() <= 1e-10);
    }
    SUBCASE("random w against the difference quotient of H") {
        const GeometryFields geo = geometry(hopf_torus_circle(1.0, 64, 64));
        const VariationField w = decompose(geo, random_smooth_field(geo, 12));
        const ScalarField a = dH_dt(geo, w);
        // Richardson combination of two central differences
        auto H = [](const GeometryFields& g) { return g.H; };
        const ScalarField d1 = central(geo, w, 1e-3, H), d2 = central(geo, w, 5e-4, H);
        const ScalarField fd = (4.0 * d2 - d1) * (1.0 / 3.0);
        CHECK((a - fd).sup_norm() <= 1e-5 * a.sup_norm());
    }
}

TEST_CASE("dvol/dt and the first variation of area") {
    SUBCASE("minimal Clifford with a normal field: zero density") {
        const GeometryFields geo = geometry(clifford_torus(64, 64));
        const VariationField w = normal_variation(geo, field_of(geo.grid, [](double x, double y) {
                                                      return std::cos(x) + std::sin(2 * y);
                                                  }));
        CHECK(dvol_dt(geo, w).sup_norm() <= 1e-10);
        CHECK(std::abs(first_variation_area(geo, w)) <= 1e-10);
        // any w at all has vanishing first variation on a minimal torus
        CHECK(std::abs(first_variation_area(geo, decompose(geo, random_smooth_field(geo, 13)))) <= 1e-10);
    }
    SUBCASE("tangential w integrates to zero") {
        const GeometryFields geo = geometry(hopf_torus_circle(1.0, 64, 64));
        const VariationField w = decompose(geo, field_of(geo.grid, [](double x, double) { return std::sin(x); }) * geo.d1 +
                                                    field_of(geo.grid, [](double, double y) { return std::cos(y); }) * geo.d2);
        CHECK(std::abs(integrate(dvol_dt(geo, w))) <= 1e-10);
    }
    SUBCASE("flat CMC 0.6 with v = 1 gives -2 H A") {
        const GeometryFields geo = geometry(flat_cmc_torus(0.6, 64, 64));
        const VariationField w = normal_variation(geo, ScalarField(geo.grid, 1.0));
        const double A = 4 * oracle::pi * oracle::pi * 0.6 * 0.8;
        // the sign of H follows the normal; H v is orientation independent
        CHECK(first_variation_area(geo, w) == doctest::Approx(-2.0 * geo.H.mean() * A).epsilon(1e-10));
        CHECK(std::abs(geo.H.mean()) == doctest::Approx(oracle::flat_cmc_H(0.6)).epsilon(1e-10));
    }
    SUBCASE("random w against the difference quotient of the area") {
        const GeometryFields geo = geometry(flat_cmc_torus(0.6, 64, 64));
        const VariationField w = decompose(geo, random_smooth_field(geo, 14));
        const double t = 1e-3;
        const double fd = (area(geometry_of_points(path_point(geo.phi, w.w, t), false)) -
                           area(geometry_of_points(path_point(geo.phi, w.w, -t), false))) /
                          (2 * t);
        const double a = first_variation_area(geo, w);
        CHECK(std::abs(a - fd) <= 1e-5 * std::abs(a));
        // and the density
        const ScalarField dv = dvol_dt(geo, w);
        const ScalarField q = central(geo, w, 1e-4, [](const GeometryFields& g) { return g.dvol; });
        CHECK((dv - q).sup_norm() <= 1e-6 * dv.sup_norm());
    }
}

TEST_CASE("derivative of the Q-contraction of the trace-free form") {
    const QuadraticDifferential Q{0.3, 0.2};
    const GeometryFields geo = geometry(flat_cmc_torus(0.6, 64, 64));
    CHECK(dII0_contraction_dt(geo, normal_variation(geo, ScalarField(geo.grid, 0.0)), Q).sup_norm() == 0.0);
    for (bool pure_normal : {true, false}) {
        CAPTURE(pure_normal);
        const VariationField w =
            pure_normal ? normal_variation(geo, field_of(geo.grid, [](double x, double y) { return std::cos(x / 0.6 + 2 * y / 0.8); }))
                        : decompose(geo, random_smooth_field(geo, 15));
        const ScalarField a = dII0_contraction_dt(geo, w, Q);
        auto c = [&](const GeometryFields& g) { return re_Q_h0(g, Q); };
        const ScalarField fd = (4.0 * central(geo, w, 5e-4, c) - central(geo, w, 1e-3, c)) * (1.0 / 3.0);
        CHECK((a - fd).sup_norm() <= 1e-5 * a.sup_norm());
    }
}

TEST_CASE("property: every formula matches the finite-difference harness on all families") {
    double worst = 0.0;
    for (const auto& [name, phi] : families()) {
        CAPTURE(name);
        const GeometryFields geo = geometry(phi);
        for (std::uint64_t seed = 100; seed < 105; ++seed) {
            const VariationField w = decompose(geo, random_smooth_field(geo, seed));
            for (Formula f : {Formula::dn_dt, Formula::dH_dt, Formula::dII0, Formula::dvol, Formula::first_variation}) {
                CAPTURE(to_string(f));
                const FdReport r = fd_harness(geo, w, f);
                CHECK(r.rel_err <= 1e-5);
                worst = std::max(worst, r.rel_err);
            }
        }
    }
    MESSAGE("worst relative error " << worst);
}

TEST_CASE("second variation") {
    const GeometryFields geo = geometry(clifford_torus(64, 64));
    const QuadraticDifferential Q0{};
    const double pi2 = oracle::pi * oracle::pi;
    SUBCASE("v = 1 on Clifford: -integral(|II|^2 + 2) = -8 pi^2") {
        const VariationField w = normal_variation(geo, ScalarField(geo.grid, 1.0));
        CHECK(std::abs(second_variation(geo, Q0, w) + 8 * pi2) <= 1e-6);
    }
    SUBCASE("tangential-only w gives 0") {
        const VariationField w = decompose(geo, field_of(geo.grid, [](double x, double y) { return std::sin(x + y); }) * geo.d1 +
                                                    0.5 * geo.d2);
        CHECK(std::abs(second_variation(geo, Q0, w)) <= 1e-10);
    }
    SUBCASE("v = cos x1 on Clifford gives -2 pi^2") {
        // |dv|^2_g dvol = sin^2 x1 dx and (|II|^2 + 2) v^2 dvol = 4 cos^2 x1 / 2 dx
        const VariationField w = normal_variation(geo, field_of(geo.grid, [](double x, double) { return std::cos(x); }));
        CHECK(second_variation(geo, Q0, w) == doctest::Approx(-2 * pi2).epsilon(1e-8 / (2 * pi2)));
    }
    SUBCASE("Q = 0 reduces to the Jacobi form") {
        // v = cos x1 + 0.5 sin 2x2 - 0.3 cos(x1 - x2); the chart is conformal with
        // e^{2 lambda} = 1/2, so integral |dv|^2_g dvol = integral |grad v|^2 dx and
        // integral (|II|^2 + 2) v^2 dvol = 2 integral v^2 dx. Quadrature by the
        // midpoint rule, exact for trigonometric polynomials.
        auto v = [](double x, double y) { return std::cos(x) + 0.5 * std::sin(2 * y) - 0.3 * std::cos(x - y); };
        auto vx = [](double x, double y) { return -std::sin(x) + 0.3 * std::sin(x - y); };
        auto vy = [](double, double y) { return std::cos(2 * y) + 0.0; };
        auto vy_full = [&](double x, double y) { return vy(x, y) - 0.3 * std::sin(x - y); };
        const int m = 64;
        const double h = 2 * oracle::pi / m;
        double jac = 0.0;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                const double x = (i + 0.5) * h, y = (j + 0.5) * h;
                jac += (std::pow(vx(x, y), 2) + std::pow(vy_full(x, y), 2) - 2.0 * v(x, y) * v(x, y)) * h * h;
            }
        const VariationField w = normal_variation(geo, field_of(geo.grid, v));
        CHECK(second_variation(geo, Q0, w) == doctest::Approx(jac).epsilon(1e-10));
    }
    SUBCASE("bilinear form is symmetric") {
        const ScalarField v1 = decompose(geo, random_smooth_field(geo, 21)).v;
        const ScalarField v2 = decompose(geo, random_smooth_field(geo, 22)).v;
        const double b12 = second_variation_bilinear(geo, Q0, v1, v2), b21 = second_variation_bilinear(geo, Q0, v2, v1);
        CHECK(std::abs(b12 - b21) <= 1e-9);
        // and polarizes the quadratic form
        const double q = second_variation(geo, Q0, normal_variation(geo, v1 + v2)) -
                         second_variation(geo, Q0, normal_variation(geo, v1 - v2));
        CHECK(q / 4.0 == doctest::Approx(b12).epsilon(1e-9));
    }
    SUBCASE("off a critical point it is a contract error") {
        const GeometryFields hopf = geometry(hopf_torus_circle(1.0, 32, 32));
        const VariationField w = normal_variation(hopf, ScalarField(hopf.grid, 1.0));
        CHECK_THROWS_AS(second_variation(hopf, Q0, w), ContractError);
    }
}

TEST_CASE("property: flipping the normal leaves the second variation unchanged") {
    for (const char* name : {"clifford", "flat-cmc-0.6", "hopf-circle-1"}) {
        CAPTURE(name);
        Immersion phi = std::string(name) == "clifford"       ? clifford_torus(64, 64)
                        : std::string(name) == "flat-cmc-0.6" ? flat_cmc_torus(0.6, 64, 64)
                                                              : hopf_torus_circle(1.0, 64, 64);
        VectorField4 mirrored = phi.points;
        for (auto& y : mirrored.values) y[0] = -y[0];
        const GeometryFields a = geometry(phi), b = geometry(Immersion(mirrored, true));
        const QFit qa = fit_Q(a), qb = fit_Q(b);
        // the same ambient field, mirrored along with the surface
        VectorField4 wa = random_smooth_field(a, 31);
        VectorField4 wb = wa;
        for (auto& y : wb.values) y[0] = -y[0];
        const double sa = second_variation(a, qa.Q, decompose(a, wa));
        const double sb = second_variation(b, qb.Q, decompose(b, wb));
        CHECK(sb == doctest::Approx(sa).epsilon(1e-9));
    }
}
