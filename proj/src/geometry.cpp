#include "ctl/geometry.hpp"
#include "ctl/errors.hpp"

#include <cmath>

namespace ctl {

namespace {

double det3(const Eigen::Matrix3d& m) { return m.determinant(); }

// n_i = det[e_i, a, b, c] = (-1)^i det(rows != i of [a b c]).
Vec4 hodge_cross(const Vec4& a, const Vec4& b, const Vec4& c) {
    Vec4 n;
    for (int i = 0; i < 4; ++i) {
        Eigen::Matrix3d m;
        int r = 0;
        for (int row = 0; row < 4; ++row) {
            if (row == i) continue;
            m(r, 0) = a[row];
            m(r, 1) = b[row];
            m(r, 2) = c[row];
            ++r;
        }
        n[i] = ((i % 2) == 0 ? 1.0 : -1.0) * det3(m);
    }
    return n;
}

VectorField4 normal_from(const VectorField4& phi, const VectorField4& d1, const VectorField4& d2) {
    VectorField4 n(phi.grid);
    for (std::size_t k = 0; k < phi.size(); ++k) {
        Vec4 raw = hodge_cross(phi[k], d1[k], d2[k]);
        const double len = raw.norm();
        if (len < 1e-12) throw DegeneracyError("degenerate tangent plane: |d1 Phi ^ d2 Phi| < 1e-12");
        n[k] = raw / len;
    }
    return n;
}

} // namespace

VectorField4 gauss_map(const Immersion& phi, Scheme s) {
    auto [d1, d2] = gradient(phi.points, s);
    return normal_from(phi.points, d1, d2);
}

GeometryFields geometry_of_points(const VectorField4& pts, bool conformal, Scheme s) {
    const PeriodicGrid& grid = pts.grid;
    auto [d1, d2] = gradient(pts, s);
    auto [d11, d12] = gradient(d1, s);
    VectorField4 d22 = derivative(d2, Direction::x2, s);
    VectorField4 n = normal_from(pts, d1, d2);

    ScalarField g11 = dot(d1, d1), g12 = dot(d1, d2), g22 = dot(d2, d2);
    ScalarField det = g11 * g22 - g12 * g12;
    ScalarField II11 = dot(n, d11), II12 = dot(n, d12), II22 = dot(n, d22);

    ScalarField H(grid), norm2(grid), lambda(grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double dt = det[k];
        const double i11 = g22[k] / dt, i12 = -g12[k] / dt, i22 = g11[k] / dt;
        H[k] = 0.5 * (i11 * II11[k] + 2.0 * i12 * II12[k] + i22 * II22[k]);
        // |II|^2 = tr((g^-1 II)^2)
        const double a11 = i11 * II11[k] + i12 * II12[k];
        const double a12 = i11 * II12[k] + i12 * II22[k];
        const double a21 = i12 * II11[k] + i22 * II12[k];
        const double a22 = i12 * II12[k] + i22 * II22[k];
        norm2[k] = a11 * a11 + 2.0 * a12 * a21 + a22 * a22;
        lambda[k] = conformal ? 0.5 * std::log(g11[k]) : 0.25 * std::log(dt);
    }

    double defect_log = 0.0, max_g11 = 0.0, max_g12 = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        defect_log = std::max(defect_log, std::abs(0.5 * std::log(g11[k]) - 0.5 * std::log(g22[k])));
        max_g11 = std::max(max_g11, g11[k]);
        max_g12 = std::max(max_g12, std::abs(g12[k]));
    }

    // In a conformal chart the trace-free part is stored as an exact pair
    // (II0_22 = -II0_11); otherwise it is II - H g.
    ScalarField II0_11 = conformal ? 0.5 * (II11 - II22) : II11 - H * g11;
    ScalarField II0_12 = conformal ? II12 : II12 - H * g12;
    ScalarField II0_22 = conformal ? -II0_11 : II22 - H * g22;
    ScalarField em2l = exp(-2.0 * lambda);

    GeometryFields geo{grid, s, conformal,
                       pts, d1, d2, d11, d12, d22, n,
                       g11, g12, g22, sqrt(det), lambda,
                       II11, II12, II22, H,
                       II0_11, II0_12, II0_22,
                       em2l * II0_11, -(em2l * II0_12),
                       norm2, defect_log + max_g12 / max_g11};
    return geo;
}

GeometryFields geometry(const Immersion& phi, Scheme s) {
    GeometryFields geo = geometry_of_points(phi.points, phi.conformal, s);
    if (phi.conformal) {
        double worst = 0.0, max_g11 = 0.0;
        for (std::size_t k = 0; k < geo.grid.size(); ++k) {
            worst = std::max(worst, std::abs(geo.g11[k] - geo.g22[k]) + std::abs(geo.g12[k]));
            max_g11 = std::max(max_g11, geo.g11[k]);
        }
        if (worst > 1e-8 * max_g11)
            throw ConsistencyError("immersion flagged conformal but |g11-g22|+|g12| = " +
                                   std::to_string(worst) + " exceeds 1e-8 max(g11)");
    }
    return geo;
}

CodazziResidual codazzi_residual(const GeometryFields& geo) {
    if (!geo.conformal) throw ContractError("Codazzi residual needs a conformal parametrization");
    const Scheme s = geo.scheme;
    auto [a1, a2] = gradient(geo.II0_11, s);
    auto [b1, b2] = gradient(geo.II0_12, s);
    auto [h1, h2] = gradient(geo.H, s);
    ScalarField e2l = exp(2.0 * geo.lambda);
    ScalarField f1 = a1 + b2 - e2l * h1;
    ScalarField f2 = a2 - b1 + e2l * h2;
    const double sup = std::max(f1.sup_norm(), f2.sup_norm());
    return {std::move(f1), std::move(f2), sup};
}

ScalarField gauss_curvature(const GeometryFields& geo) {
    ScalarField em4l = exp(-4.0 * geo.lambda);
    return 1.0 + geo.H * geo.H - em4l * (geo.II0_11 * geo.II0_11 + geo.II0_12 * geo.II0_12);
}

ScalarField liouville_residual(const GeometryFields& geo) {
    if (!geo.conformal) throw ContractError("Liouville residual needs a conformal parametrization");
    return -laplacian(geo.lambda, geo.scheme) - exp(2.0 * geo.lambda) * gauss_curvature(geo);
}

std::pair<VectorField4, VectorField4> weingarten_vector(const GeometryFields& geo) {
    // n . d_z^2 Phi = (II11 - II22 - 2 i II12) / 4
    ScalarField re = 0.25 * (geo.II11 - geo.II22);
    ScalarField im = -0.5 * geo.II12;
    return {re * geo.normal, im * geo.normal};
}

double area(const GeometryFields& geo) { return integrate(geo.dvol); }

} // namespace ctl
