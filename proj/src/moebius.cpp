#include "ctl/moebius.hpp"
#include "ctl/errors.hpp"

#include <cmath>
#include <limits>

namespace ctl {

MobiusParam::MobiusParam(const Vec4& v) : a(v) {
    if (!(v.norm() < kMobiusRadius)) throw DomainError("Moebius parameter must satisfy |a| < 1");
}

Vec4 psi(const MobiusParam& p, const Vec4& y) {
    if (p.a.isZero(0.0)) return y; // the identity element, without rounding
    const Vec4 d = y - p.a;
    return (1.0 - p.a.squaredNorm()) / d.squaredNorm() * d - p.a;
}

Eigen::Matrix4d psi_jacobian(const MobiusParam& p, const Vec4& y) {
    const Vec4 d = y - p.a;
    const double d2 = d.squaredNorm();
    return (1.0 - p.a.squaredNorm()) * (Eigen::Matrix4d::Identity() / d2 - 2.0 * d * d.transpose() / (d2 * d2));
}

double mu(const MobiusParam& p, const Vec4& y) {
    const double den = 1.0 + p.a.squaredNorm() - 2.0 * p.a.dot(y);
    if (!(den > 0.0)) throw DomainError("conformal factor denominator must be positive");
    return std::log((1.0 - p.a.squaredNorm()) / den);
}

Vec4 grad_mu(const MobiusParam& p, const Vec4& y) {
    const Vec4 g = 2.0 * p.a / (1.0 + p.a.squaredNorm() - 2.0 * p.a.dot(y));
    return g - g.dot(y) * y;
}

ScalarField conformal_factor(const MobiusParam& a, const Immersion& phi) {
    ScalarField m(phi.grid);
    for (std::size_t k = 0; k < phi.points.size(); ++k) m[k] = mu(a, phi.points[k]);
    return m;
}

Immersion push_immersion(const MobiusParam& a, const Immersion& phi) {
    if (a.a.isZero(0.0)) return phi;
    VectorField4 out(phi.grid);
    for (std::size_t k = 0; k < phi.points.size(); ++k) {
        Vec4 y = psi(a, phi.points[k]);
        out[k] = y / y.norm(); // remove the last ulp of drift; |Psi| = 1 algebraically
    }
    return Immersion(std::move(out), phi.conformal);
}

double check_lemma_V1(const MobiusParam& a, const Immersion& phi, Scheme s) {
    const GeometryFields geo = geometry_of_points(phi.points, phi.conformal, s);
    const GeometryFields pushed = geometry_of_points(push_immersion(a, phi).points, phi.conformal, s);
    auto [re0, im0] = weingarten_vector(geo);
    auto [re1, im1] = weingarten_vector(pushed);
    double worst = 0.0;
    for (std::size_t k = 0; k < geo.grid.size(); ++k) {
        const Eigen::Matrix4d J = psi_jacobian(a, geo.phi[k]);
        // h0 = 2 pi_n(d_z^2 Phi) dz^2: the factor 2 is common to both sides
        worst = std::max(worst, 2.0 * (re1[k] - J * re0[k]).norm());
        worst = std::max(worst, 2.0 * (im1[k] - J * im0[k]).norm());
    }
    return worst;
}

double check_lemma_V2(const MobiusParam& a, const Immersion& phi, Scheme s) {
    const GeometryFields geo = geometry_of_points(phi.points, phi.conformal, s);
    const GeometryFields pushed = geometry_of_points(push_immersion(a, phi).points, phi.conformal, s);
    double worst = 0.0;
    for (std::size_t k = 0; k < geo.grid.size(); ++k) {
        const Vec4& y = geo.phi[k];
        const Vec4& n = geo.normal[k];
        const double m = mu(a, y);
        const Vec4 model = std::exp(-2.0 * m) * psi_jacobian(a, y) * ((geo.H[k] - grad_mu(a, y).dot(n)) * n);
        worst = std::max(worst, (pushed.H[k] * pushed.normal[k] - model).norm());
    }
    return worst;
}

double area_under_mobius(const MobiusParam& a, const GeometryFields& geo) {
    const double a2 = a.a.squaredNorm();
    double acc = 0.0;
    for (std::size_t k = 0; k < geo.grid.size(); ++k) {
        const double e = (1.0 - a2) / (1.0 + a2 - 2.0 * a.a.dot(geo.phi[k]));
        acc += e * e * geo.dvol[k];
    }
    return acc / double(geo.grid.size()) * geo.grid.lattice().cell_area();
}

double area_under_mobius(const MobiusParam& a, const Immersion& phi, Scheme s) {
    return area_under_mobius(a, geometry_of_points(phi.points, phi.conformal, s));
}

namespace {

Vec4 project_ball(const Vec4& a) {
    const double r = a.norm();
    return r < kMobiusRadius ? a : Vec4(a * (kMobiusRadius * (1.0 - 1e-12) / r));
}

struct AscentResult {
    Vec4 a;
    double value;
    bool converged;
    std::vector<VcTraceRow> trace;
};

AscentResult ascend(const GeometryFields& geo, Vec4 a, int start, const VcOptions& o) {
    auto f = [&](const Vec4& x) { return area_under_mobius(MobiusParam(x), geo); };
    auto grad = [&](const Vec4& x) {
        Vec4 g;
        const double h = std::min(o.fd_step, 0.5 * (kMobiusRadius - x.norm()));
        for (int i = 0; i < 4; ++i) {
            Vec4 e = Vec4::Zero();
            e[i] = h;
            g[i] = (f(x + e) - f(x - e)) / (2.0 * h);
        }
        return g;
    };
    AscentResult r{a, f(a), false, {}};
    double step = o.initial_step;
    for (int it = 0; it < o.max_iters; ++it) {
        const Vec4 g = grad(r.a);
        r.trace.push_back({start, it, r.value, r.a.norm(), g.norm()});
        if (g.norm() <= o.grad_tol) {
            r.converged = true;
            break;
        }
        // backtracking (Armijo) along the projected gradient path
        bool moved = false;
        step = std::min(1.0, 4.0 * step);
        while (step > o.step_tol) {
            const Vec4 cand = project_ball(r.a + step * g);
            const double v = f(cand);
            if (v >= r.value + 1e-4 * g.dot(cand - r.a)) {
                moved = (cand - r.a).norm() > 0.0;
                r.a = cand;
                r.value = v;
                break;
            }
            step *= 0.5;
        }
        if (!moved) {
            r.converged = g.norm() <= 1e3 * o.grad_tol;
            break;
        }
    }
    return r;
}

} // namespace

ConformalVolume conformal_volume(const GeometryFields& geo, const VcOptions& opts) {
    std::vector<Vec4> starts{Vec4::Zero()};
    for (int i = 0; i < 4; ++i)
        for (double sgn : {1.0, -1.0}) {
            Vec4 e = Vec4::Zero();
            e[i] = sgn * opts.start_radius;
            starts.push_back(e);
        }
    std::vector<AscentResult> results(starts.size());
#pragma omp parallel for schedule(dynamic)
    for (int s = 0; s < int(starts.size()); ++s) results[s] = ascend(geo, starts[s], s, opts);

    ConformalVolume out;
    out.vc = -std::numeric_limits<double>::infinity();
    for (const auto& r : results) {
        out.trace.insert(out.trace.end(), r.trace.begin(), r.trace.end());
        if (r.value > out.vc) {
            out.vc = r.value;
            out.argmax = MobiusParam(r.a);
            out.converged = r.converged;
        }
    }
    if (!out.converged) out.warning = "best start did not reach the gradient tolerance; best-so-far returned";
    if (out.argmax.a.norm() > 0.99) {
        out.warning += (out.warning.empty() ? "" : "; ");
        out.warning += "maximizer approaches the boundary of the ball (supremum may not be attained)";
    }
    return out;
}

ConformalVolume conformal_volume(const Immersion& phi, const VcOptions& opts) {
    return conformal_volume(geometry_of_points(phi.points, phi.conformal), opts);
}

} // namespace ctl
