#include "ctl/immersion.hpp"
#include "ctl/errors.hpp"
#include "ctl/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace ctl {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

Vec4 to_r4(cplx z1, cplx z2) { return Vec4(z1.real(), z1.imag(), z2.real(), z2.imag()); }

// Trigonometric interpolant of a closed curve sampled uniformly on [0, period).
class TrigCurve {
public:
    TrigCurve(const std::vector<Vec3>& pts, double period) : m_(int(pts.size())), period_(period) {
        coef_.assign(m_, {cplx(0), cplx(0), cplx(0)});
        for (int k = 0; k < m_; ++k) {
            for (int p = 0; p < m_; ++p) {
                const double ang = -2.0 * kPi * double(k) * p / m_;
                const cplx e(std::cos(ang), std::sin(ang));
                for (int c = 0; c < 3; ++c) coef_[k][c] += pts[p][c] * e;
            }
            for (int c = 0; c < 3; ++c) coef_[k][c] /= double(m_);
        }
    }

    // Position and first two derivatives with respect to the curve parameter.
    void eval(double u, Vec3& x, Vec3* dx = nullptr, Vec3* ddx = nullptr) const {
        x.setZero();
        if (dx) dx->setZero();
        if (ddx) ddx->setZero();
        const double w = 2.0 * kPi / period_;
        for (int k = 0; k < m_; ++k) {
            int kk = k <= m_ / 2 ? k : k - m_;
            double weight = 1.0;
            if (2 * k == m_) weight = 0.5; // split Nyquist mode symmetrically
            const double ang = w * kk * u;
            const cplx e(std::cos(ang), std::sin(ang));
            for (int c = 0; c < 3; ++c) {
                const cplx term = coef_[k][c] * e * weight;
                if (2 * k == m_) {
                    // cos(m/2 w u) part only
                    x[c] += 2.0 * (coef_[k][c] * weight).real() * std::cos(ang);
                    if (dx) (*dx)[c] += -2.0 * (coef_[k][c] * weight).real() * w * kk * std::sin(ang);
                    if (ddx) (*ddx)[c] += -2.0 * (coef_[k][c] * weight).real() * w * w * kk * kk * std::cos(ang);
                    continue;
                }
                x[c] += term.real();
                if (dx) (*dx)[c] += (term * cplx(0.0, w * kk)).real();
                if (ddx) (*ddx)[c] += (term * (-(w * kk) * (w * kk))).real();
            }
        }
    }

private:
    int m_;
    double period_;
    std::vector<std::array<cplx, 3>> coef_;
};

// Eighth-order central difference.
Vec3 d_dt(const std::function<Vec3(double)>& c, double u, double h) {
    static constexpr double w[4] = {4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0};
    Vec3 d = Vec3::Zero();
    for (int k = 1; k <= 4; ++k) d += w[k - 1] * (c(u + k * h) - c(u - k * h));
    return d / h;
}

Vec3 dhopf(cplx z1, cplx z2, cplx x1, cplx x2) {
    const cplx w = 2.0 * (x1 * std::conj(z2) + z1 * std::conj(x2));
    return Vec3(w.real(), w.imag(), 2.0 * (x1 * std::conj(z1)).real() - 2.0 * (x2 * std::conj(z2)).real());
}

// Horizontal lift of the S^2 tangent vector v at q = (z1, z2).
std::array<cplx, 2> horizontal_lift(const std::array<cplx, 2>& q, const Vec3& v) {
    const std::array<cplx, 2> h1{-std::conj(q[1]), std::conj(q[0])};
    const std::array<cplx, 2> h2{cplx(0, 1) * h1[0], cplx(0, 1) * h1[1]};
    const Vec3 p1 = dhopf(q[0], q[1], h1[0], h1[1]);
    const Vec3 p2 = dhopf(q[0], q[1], h2[0], h2[1]);
    // p1, p2 are orthogonal with |p_k| = 2 |h_k|; solve in least squares to be safe.
    Eigen::Matrix<double, 3, 2> A;
    A.col(0) = p1;
    A.col(1) = p2;
    const Eigen::Vector2d c = (A.transpose() * A).ldlt().solve(A.transpose() * v);
    return {c[0] * h1[0] + c[1] * h2[0], c[0] * h1[1] + c[1] * h2[1]};
}


void append_u32(std::vector<std::uint8_t>& b, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(std::uint8_t((v >> (8 * i)) & 0xffu));
}
void append_f64(std::vector<std::uint8_t>& b, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    for (int i = 0; i < 8; ++i) b.push_back(std::uint8_t((bits >> (8 * i)) & 0xffu));
}
std::uint32_t read_u32(const std::vector<std::uint8_t>& b, std::size_t off) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(b[off + i]) << (8 * i);
    return v;
}
double read_f64(const std::vector<std::uint8_t>& b, std::size_t off) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= std::uint64_t(b[off + i]) << (8 * i);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

} // namespace

Immersion::Immersion(VectorField4 pts, bool conformal_, double unit_tol)
    : grid(pts.grid), points(std::move(pts)), conformal(conformal_) {
    for (std::size_t k = 0; k < points.size(); ++k) {
        if (!std::isfinite(points[k].squaredNorm()) || std::abs(points[k].norm() - 1.0) > unit_tol)
            throw DomainError("immersion sample " + std::to_string(k) + " is not on S^3");
    }
}

// ------------------------------------------------------------------ curves

CurveOnS2 make_curve(std::vector<Vec3> samples) {
    if (samples.size() < 9) throw InputError("curve needs at least 8 distinct samples");
    for (const auto& p : samples)
        if (std::abs(p.norm() - 1.0) > 1e-10) throw InputError("curve sample is not on the unit sphere");
    if ((samples.back() - samples.front()).norm() > 1e-6) throw InputError("curve does not close within 1e-6");
    const int m = int(samples.size()) - 1;
    std::vector<Vec3> pts(samples.begin(), samples.begin() + m);
    TrigCurve unit(pts, 1.0);
    double length = 0.0, kint = 0.0, k2int = 0.0;
    const int q = 4 * m;
    for (int k = 0; k < q; ++k) {
        Vec3 x, dx, ddx;
        unit.eval(double(k) / q, x, &dx, &ddx);
        const double sp = dx.norm();
        length += sp / q;
        // geodesic curvature for a general parameter: <x'', x cross x'> / |x'|^3
        const double kg = ddx.dot(x.cross(dx)) / (sp * sp * sp);
        kint += kg * sp / q;
        k2int += kg * kg * sp / q;
    }
    CurveOnS2 c;
    c.samples = std::move(samples);
    c.length = length;
    c.enclosed_area = 2.0 * kPi - kint; // Gauss-Bonnet for the region on the left
    c.curvature_energy = k2int;
    return c;
}

CurveOnS2 curve_from_parametrization(const std::function<Vec3(double)>& c, double period, int m) {
    if (m < 8) throw InputError("curve needs at least 8 samples");
    auto unit = [&](double u) { Vec3 p = c(u); return Vec3(p / p.norm()); };
    const double h = 1e-3 * period;
    auto speed = [&](double u) { return d_dt(unit, u, h).norm(); };
    // Gauss-Legendre (5 points) on K panels for the cumulative arclength.
    const int K = 8 * m;
    static const double gx[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831, 0.9061798459386640};
    static const double gw[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665, 0.2369268850561891};
    auto panel = [&](double a, double b) {
        double s = 0.0;
        for (int g = 0; g < 5; ++g) s += gw[g] * speed(0.5 * (a + b) + 0.5 * (b - a) * gx[g]);
        return 0.5 * (b - a) * s;
    };
    std::vector<double> cum(K + 1, 0.0);
    for (int k = 0; k < K; ++k) cum[k + 1] = cum[k] + panel(period * k / K, period * (k + 1) / K);
    const double L = cum[K];
    std::vector<Vec3> out;
    out.reserve(m + 1);
    int panel_idx = 0;
    for (int j = 0; j < m; ++j) {
        const double target = L * j / m;
        while (panel_idx < K - 1 && cum[panel_idx + 1] < target) ++panel_idx;
        double a = period * panel_idx / K;
        double u = a + (target - cum[panel_idx]) / speed(a);
        for (int it = 0; it < 30; ++it) {
            const double s = cum[panel_idx] + panel(a, u);
            const double du = (s - target) / speed(u);
            u -= du;
            if (std::abs(du) < 1e-15 * period) break;
        }
        out.push_back(unit(u));
    }
    out.push_back(out.front());
    return make_curve(std::move(out));
}

CurveOnS2 circle_curve(double kappa0, int m) {
    if (kappa0 < 0.0) throw DomainError("kappa0 must be non-negative");
    const double rho = std::atan2(1.0, kappa0); // arccot
    std::vector<Vec3> pts;
    for (int j = 0; j <= m; ++j) {
        const double phi = 2.0 * kPi * (j % m) / m;
        pts.emplace_back(std::sin(rho) * std::cos(phi), std::sin(rho) * std::sin(phi), std::cos(rho));
    }
    return make_curve(std::move(pts));
}

CurveOnS2 wobbly_circle_curve(double kappa0, double amp, int lobes, int m) {
    const double rho0 = std::atan2(1.0, kappa0);
    auto c = [=](double phi) {
        const double rho = rho0 + amp * std::cos(lobes * phi);
        return Vec3(std::sin(rho) * std::cos(phi), std::sin(rho) * std::sin(phi), std::cos(rho));
    };
    return curve_from_parametrization(c, 2.0 * kPi, m);
}

// ------------------------------------------------------------- constructors

Immersion clifford_torus(int n1, int n2) {
    PeriodicGrid g(Lattice(cplx(2 * kPi, 0), cplx(0, 2 * kPi)), n1, n2);
    VectorField4 p(g);
    const double s = 1.0 / std::sqrt(2.0);
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j) {
            const cplx z = g.point(i, j);
            p[g.index(i, j)] = s * Vec4(std::cos(z.real()), std::sin(z.real()), std::cos(z.imag()), std::sin(z.imag()));
        }
    return Immersion(std::move(p), true);
}

Immersion flat_cmc_torus(double a, int n1, int n2) {
    if (!(a > 0.0 && a < 1.0)) throw DomainError("flat CMC torus needs 0 < a < 1");
    const double b = std::sqrt(1.0 - a * a);
    PeriodicGrid g(Lattice(cplx(2 * kPi * a, 0), cplx(0, 2 * kPi * b)), n1, n2);
    VectorField4 p(g);
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j) {
            const cplx z = g.point(i, j);
            p[g.index(i, j)] = Vec4(a * std::cos(z.real() / a), a * std::sin(z.real() / a),
                                    b * std::cos(z.imag() / b), b * std::sin(z.imag() / b));
        }
    return Immersion(std::move(p), true);
}

// The curve is traversed backwards (phi decreasing): with the orientation of the
// normal fixed in geometry.hpp this is the traversal for which the second
// fundamental form reads [[2 kappa, 1], [1, 0]] in (s, t). The closure vector of
// the lift is then (L/2, +A/2) on the unit sphere.
Immersion hopf_torus_circle(double kappa0, int n1, int n2) {
    if (!(kappa0 >= 0.0)) throw DomainError("kappa0 must be non-negative");
    const double rho = std::atan2(1.0, kappa0);
    const double lift_len = kPi * std::sin(rho);     // length of the horizontal lift
    const double hol = kPi * (1.0 - std::cos(rho));  // holonomy = half the cap area
    PeriodicGrid g(Lattice(cplx(lift_len, hol), cplx(0, 2 * kPi)), n1, n2);
    const double c = std::cos(0.5 * rho), s = std::sin(0.5 * rho);
    VectorField4 p(g);
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j) {
            const cplx z = g.point(i, j);
            const double phi = -2.0 * z.real() / std::sin(rho);
            const cplx fiber = std::polar(1.0, z.imag());
            const cplx z1 = fiber * std::polar(c, s * s * phi);
            const cplx z2 = fiber * std::polar(s, -c * c * phi);
            p[g.index(i, j)] = to_r4(z1, z2);
        }
    return Immersion(std::move(p), true);
}

namespace {

using Lift = std::vector<std::array<cplx, 2>>;

// Any point of the fiber over y, chosen by the better-conditioned chart.
std::array<cplx, 2> fiber_point(const Vec3& y) {
    const cplx w(y[0], y[1]);
    if (y[2] >= 0.0) {
        const double z1 = std::sqrt(0.5 * (1.0 + y[2]));
        return {cplx(z1, 0.0), std::conj(w) / (2.0 * z1)};
    }
    const double z2 = std::sqrt(0.5 * (1.0 - y[2]));
    return {w / (2.0 * z2), cplx(z2, 0.0)};
}

cplx herm(const std::array<cplx, 2>& a, const std::array<cplx, 2>& b) {
    return std::conj(a[0]) * b[0] + std::conj(a[1]) * b[1];
}

// Spectral derivative (period `period`) of n uniform samples of a periodic
// complex sequence, Nyquist mode dropped.
std::vector<cplx> periodic_derivative(const std::vector<cplx>& f, double period) {
    const int n = int(f.size());
    std::vector<cplx> out(n, cplx(0.0));
    for (int k = 0; k < n; ++k) {
        const int kk = k <= n / 2 ? k : k - n;
        if (2 * k == n || kk == 0) continue;
        cplx c(0.0);
        for (int p = 0; p < n; ++p) c += f[p] * std::polar(1.0, -2.0 * kPi * double(k) * p / n);
        c *= cplx(0.0, 2.0 * kPi * kk / period) / double(n);
        for (int p = 0; p < n; ++p) out[p] += c * std::polar(1.0, 2.0 * kPi * double(k) * p / n);
    }
    return out;
}

// Lift along the reversed curve via a global section and a spectrally integrated
// gauge phase: lift = e^{i theta} sigma with theta' = -Im <sigma, sigma'>.
Lift lift_spectral(const CurveOnS2& curve, const TrigCurve& tc, int n1, double& hol) {
    const double L = curve.length;
    // Section sigma_r(y) = q <q, r>/|<q, r>| is singular only over -pi(r); put that
    // point as far from the curve as possible.
    Vec3 best_p(0, 0, 1);
    double best_gap = -1.0;
    const int cand = 400;
    for (int c = 0; c < cand; ++c) {
        const double z = 1.0 - 2.0 * (c + 0.5) / cand, r = std::sqrt(1.0 - z * z);
        const double ph = kPi * (3.0 - std::sqrt(5.0)) * c;
        const Vec3 p(r * std::cos(ph), r * std::sin(ph), z);
        double gap = 4.0;
        for (const auto& y : curve.samples) gap = std::min(gap, (y + p).norm());
        if (gap > best_gap) { best_gap = gap; best_p = p; }
    }
    const std::array<cplx, 2> ref = fiber_point(best_p);

    std::vector<std::array<cplx, 2>> sec(n1);
    for (int i = 0; i < n1; ++i) {
        Vec3 y;
        tc.eval(-L * i / n1, y);
        y.normalize();
        auto q = fiber_point(y);
        const cplx ph = herm(q, ref);
        const cplx u = ph / std::abs(ph);
        sec[i] = {q[0] * u, q[1] * u};
    }
    std::vector<cplx> c0(n1), c1(n1);
    for (int i = 0; i < n1; ++i) { c0[i] = sec[i][0]; c1[i] = sec[i][1]; }
    const auto d0 = periodic_derivative(c0, L), d1 = periodic_derivative(c1, L);
    std::vector<cplx> f(n1);
    for (int i = 0; i < n1; ++i) f[i] = -(std::conj(c0[i]) * d0[i] + std::conj(c1[i]) * d1[i]).imag();
    cplx mean(0.0);
    for (auto v : f) mean += v;
    mean /= double(n1);
    hol = mean.real() * L;
    // periodic part of the antiderivative
    std::vector<cplx> per(n1, cplx(0.0));
    for (int k = 1; k < n1; ++k) {
        const int kk = k <= n1 / 2 ? k : k - n1;
        if (2 * k == n1) continue;
        cplx c(0.0);
        for (int p = 0; p < n1; ++p) c += f[p] * std::polar(1.0, -2.0 * kPi * double(k) * p / n1);
        c /= cplx(0.0, 2.0 * kPi * kk / L) * double(n1);
        for (int p = 0; p < n1; ++p) per[p] += c * std::polar(1.0, 2.0 * kPi * double(k) * p / n1);
    }
    const auto q0 = fiber_point(curve.samples.front());
    const double theta0 = std::arg(herm(sec[0], q0)) - per[0].real();
    Lift lift(n1);
    for (int i = 0; i < n1; ++i) {
        const cplx e = std::polar(1.0, theta0 + mean.real() * L * i / n1 + per[i].real());
        lift[i] = {e * sec[i][0], e * sec[i][1]};
    }
    return lift;
}

// Fixed-step RK4 integration of the horizontality ODE along the reversed curve.
Lift lift_rk4(const CurveOnS2& curve, const TrigCurve& tc, int n1, int substeps, double& hol) {
    const double L = curve.length;
    auto tangent = [&](double sigma) {
        Vec3 x, dx;
        tc.eval(-sigma, x, &dx);
        return Vec3(-dx);
    };
    using Q = std::array<cplx, 2>;
    auto rhs = [&](double sigma, const Q& q) { return horizontal_lift(q, tangent(sigma)); };
    auto axpy = [](const Q& q, double h, const Q& k) { return Q{q[0] + h * k[0], q[1] + h * k[1]}; };

    const int steps = n1 * substeps;
    const double h = L / steps;
    Lift lift(n1 + 1);
    Q q = fiber_point(curve.samples.front());
    lift[0] = q;
    for (int st = 0; st < steps; ++st) {
        const double sg = st * h;
        const Q k1 = rhs(sg, q);
        const Q k2 = rhs(sg + 0.5 * h, axpy(q, 0.5 * h, k1));
        const Q k3 = rhs(sg + 0.5 * h, axpy(q, 0.5 * h, k2));
        const Q k4 = rhs(sg + h, axpy(q, h, k3));
        for (int c = 0; c < 2; ++c) q[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        const double nq = std::sqrt(std::norm(q[0]) + std::norm(q[1]));
        q[0] /= nq;
        q[1] /= nq;
        if ((st + 1) % substeps == 0) lift[(st + 1) / substeps] = q;
    }
    hol = std::arg(herm(lift[0], lift[n1])); // lift(L) = e^{i hol} lift(0)
    lift.pop_back();
    return lift;
}

} // namespace

Immersion hopf_torus_curve(const CurveOnS2& curve, int n1, int n2, HopfLift method, int substeps) {
    const int m = int(curve.samples.size()) - 1;
    if (m < 8) throw InputError("curve needs at least 8 samples");
    if ((curve.samples.back() - curve.samples.front()).norm() > 1e-6)
        throw InputError("curve does not close within 1e-6");
    if (substeps < 1) throw ConfigError("substeps must be positive");
    std::vector<Vec3> pts(curve.samples.begin(), curve.samples.begin() + m);
    TrigCurve tc(pts, curve.length);
    double hol = 0.0;
    const Lift lift = method == HopfLift::spectral ? lift_spectral(curve, tc, n1, hol)
                                                   : lift_rk4(curve, tc, n1, substeps, hol);
    // The holonomy is only defined mod 2 pi; use the representative in [-pi, pi)
    // (the tie at pi is broken towards -pi, as in the closed-form circle family).
    hol = std::remainder(hol, 2.0 * kPi);
    if (hol > kPi - 1e-9) hol -= 2.0 * kPi;
    const cplx w1(0.5 * curve.length, -hol), w2(0.0, 2 * kPi);
    if (!((w2 / w1).imag() > 0.0)) throw ConstructionError("degenerate Hopf lattice");
    PeriodicGrid g(Lattice(w1, w2), n1, n2);
    VectorField4 p(g);
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j) {
            const cplx fiber = std::polar(1.0, g.point(i, j).imag());
            p[g.index(i, j)] = to_r4(fiber * lift[i][0], fiber * lift[i][1]);
        }
    return Immersion(std::move(p), true);
}

// --------------------------------------------------------------- diagnostics

WeakImmersionReport validate_weak_immersion(const Immersion& phi, Scheme s) {
    WeakImmersionReport r;
    auto [d1, d2] = gradient(phi.points, s);
    double max_eig = 0.0, min_eig = std::numeric_limits<double>::infinity();
    r.min_det_g = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < phi.points.size(); ++k) {
        const double a = d1[k].dot(d1[k]), b = d1[k].dot(d2[k]), c = d2[k].dot(d2[k]);
        const double tr = a + c, det = a * c - b * b;
        const double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
        max_eig = std::max(max_eig, 0.5 * tr + disc);
        min_eig = std::min(min_eig, 0.5 * tr - disc);
        r.min_det_g = std::min(r.min_det_g, det);
    }
    r.lipschitz_bound = std::sqrt(max_eig);

    // Spectral derivatives smooth over collapsed cells, so the discrete edges are
    // checked as well.
    const PeriodicGrid& g = phi.grid;
    std::vector<double> cell_det(g.size());
    for (int i = 0; i < g.n1(); ++i)
        for (int j = 0; j < g.n2(); ++j) {
            const Vec4& p = phi.points[g.index(i, j)];
            const Vec4 e1 = phi.points[g.index((i + 1) % g.n1(), j)] - p;
            const Vec4 e2 = phi.points[g.index(i, (j + 1) % g.n2())] - p;
            cell_det[g.index(i, j)] = e1.squaredNorm() * e2.squaredNorm() - std::pow(e1.dot(e2), 2);
        }
    const double mean_det = std::accumulate(cell_det.begin(), cell_det.end(), 0.0) / double(g.size());
    r.min_cell_det_ratio = mean_det > 0.0 ? *std::min_element(cell_det.begin(), cell_det.end()) / mean_det : 0.0;

    r.nondegenerate = r.min_det_g >= 1e-12 && r.min_cell_det_ratio >= 1e-8;
    r.nondegeneracy_constant = min_eig > 0.0 ? std::max(max_eig, 1.0 / min_eig)
                                             : std::numeric_limits<double>::infinity();
    if (!r.nondegenerate) {
        r.gauss_map_energy = std::numeric_limits<double>::infinity();
        r.ok = false;
        return r;
    }
    GeometryFields geo = geometry_of_points(phi.points, false, s);
    r.gauss_map_energy = integrate(geo.II_norm2, geo.dvol); // |dn|^2_g = |II|^2_g
    r.ok = std::isfinite(r.gauss_map_energy) && std::isfinite(r.lipschitz_bound);
    return r;
}

// ---------------------------------------------------------------- CTL1 I/O

std::vector<std::uint8_t> serialize(const Immersion& phi) {
    static_assert(sizeof(double) == 8);
    std::vector<std::uint8_t> b{'C', 'T', 'L', '1'};
    append_u32(b, std::uint32_t(phi.grid.n1()));
    append_u32(b, std::uint32_t(phi.grid.n2()));
    const Lattice& l = phi.grid.lattice();
    append_f64(b, l.omega1().real());
    append_f64(b, l.omega1().imag());
    append_f64(b, l.omega2().real());
    append_f64(b, l.omega2().imag());
    b.push_back(phi.conformal ? 1 : 0);
    for (const auto& v : phi.points.values)
        for (int c = 0; c < 4; ++c) append_f64(b, v[c]);
    return b;
}

Immersion deserialize(const std::vector<std::uint8_t>& b) {
    const std::size_t header = 4 + 4 + 4 + 32 + 1;
    if (b.size() < header) throw ParseError("CTL1: truncated header");
    if (b[0] != 'C' || b[1] != 'T' || b[2] != 'L') throw ParseError("CTL1: bad magic");
    if (b[3] != '1') throw ParseError(std::string("CTL1: unsupported format version '") + char(b[3]) + "'", true);
    const std::uint32_t n1 = read_u32(b, 4), n2 = read_u32(b, 8);
    const cplx w1(read_f64(b, 12), read_f64(b, 20)), w2(read_f64(b, 28), read_f64(b, 36));
    const std::uint8_t flag = b[44];
    if (flag > 1) throw ParseError("CTL1: conformal flag must be 0 or 1");
    const std::size_t need = header + std::size_t(n1) * n2 * 32;
    if (b.size() != need) throw ParseError("CTL1: payload size does not match n1*n2");
    PeriodicGrid g = [&] {
        try {
            return PeriodicGrid(Lattice(w1, w2), int(n1), int(n2));
        } catch (const ConfigError& e) {
            throw ParseError(std::string("CTL1: invalid grid: ") + e.what());
        }
    }();
    VectorField4 p(g);
    std::size_t off = header;
    for (std::size_t k = 0; k < g.size(); ++k) {
        for (int c = 0; c < 4; ++c, off += 8) p[k][c] = read_f64(b, off);
        if (!std::isfinite(p[k].squaredNorm()) || std::abs(p[k].norm() - 1.0) > 1e-8)
            throw ParseError("CTL1: sample " + std::to_string(k) + " is not a unit vector");
    }
    return Immersion(std::move(p), flag == 1, 1e-8);
}

void write_immersion(const std::string& path, const Immersion& phi,
                     const std::map<std::string, std::string>& metadata) {
    const auto bytes = serialize(phi);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    if (!out) throw InputError("failed writing " + path);
    if (!metadata.empty()) {
        std::ofstream meta(path + ".meta");
        if (!meta) throw InputError("cannot write metadata for " + path);
        for (const auto& [k, v] : metadata) meta << k << " = " << v << "\n";
    }
}

Immersion read_immersion(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize(bytes);
}

std::map<std::string, std::string> read_metadata(const std::string& path) {
    std::map<std::string, std::string> out;
    std::ifstream in(path + ".meta");
    std::string line;
    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos || trim(line).empty() || trim(line)[0] == '#') continue;
        out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return out;
}

} // namespace ctl
