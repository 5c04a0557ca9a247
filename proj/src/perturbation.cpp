#include "ctl/perturbation.hpp"
#include "ctl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ctl {

double bump(double s) {
    const double d = 1.0 - s * s;
    return d > 0.0 ? std::exp(-1.0 / d) : 0.0;
}

double bump_prime(double s) {
    const double d = 1.0 - s * s;
    return d > 0.0 ? std::exp(-1.0 / d) * (-2.0 * s / (d * d)) : 0.0;
}

Profile1D standard_bump_1d() { return {bump, bump_prime, 1.0}; }

Profile radial_bump() {
    Profile p;
    p.f = [](double y1, double y2) { return bump(std::hypot(y1, y2)); };
    auto radial_factor = [](double y1, double y2) {
        const double d = 1.0 - y1 * y1 - y2 * y2;
        return d > 0.0 ? std::exp(-1.0 / d) * (-2.0 / (d * d)) : 0.0;
    };
    p.d1 = [radial_factor](double y1, double y2) { return radial_factor(y1, y2) * y1; };
    p.d2 = [radial_factor](double y1, double y2) { return radial_factor(y1, y2) * y2; };
    p.r1 = p.r2 = 1.0;
    p.name = "radial";
    return p;
}

Profile chi_tau(const Profile1D& phi, double tau) {
    if (!(tau > 0.0)) throw DomainError("chi_tau needs tau > 0");
    Profile p;
    p.f = [phi, tau](double y1, double y2) { return phi.f(tau * y1) * phi.f(y2); };
    p.d1 = [phi, tau](double y1, double y2) { return tau * phi.df(tau * y1) * phi.f(y2); };
    p.d2 = [phi, tau](double y1, double y2) { return phi.f(tau * y1) * phi.df(y2); };
    p.r1 = phi.half_width / tau;
    p.r2 = phi.half_width;
    p.name = "chi_tau(" + std::to_string(tau) + ")";
    return p;
}

ScalarField bump_field(const PeriodicGrid& grid, const BumpSpec& spec) {
    if (!(spec.epsilon > 0.0)) throw DomainError("bump epsilon must be positive");
    if (spec.i0 < 0 || spec.i0 >= grid.n1() || spec.j0 < 0 || spec.j0 >= grid.n2())
        throw DomainError("bump centre outside the grid");
    const cplx w1 = grid.lattice().omega1(), w2 = grid.lattice().omega2();
    const double A = grid.lattice().cell_area();
    const double width = std::min(A / std::abs(w1), A / std::abs(w2));
    if (!(spec.epsilon * std::hypot(spec.chi.r1, spec.chi.r2) < 0.5 * width))
        throw DomainError("bump support does not fit inside the chart (epsilon too large)");

    // z = u1 w1 + u2 w2 -> (u1, u2)
    Eigen::Matrix2d B;
    B << w1.real(), w2.real(), w1.imag(), w2.imag();
    const Eigen::Matrix2d Binv = B.inverse();
    const cplx z0 = grid.point(spec.i0, spec.j0);
    const cplx rot = std::polar(1.0, -spec.rotation);
    ScalarField out(grid);
    for (int i = 0; i < grid.n1(); ++i)
        for (int j = 0; j < grid.n2(); ++j) {
            const cplx d = grid.point(i, j) - z0;
            Eigen::Vector2d u = Binv * Eigen::Vector2d(d.real(), d.imag());
            u = u.array() - u.array().round();
            const cplx dm = u[0] * w1 + u[1] * w2;
            const cplx y = rot * dm / spec.epsilon;
            if (std::abs(y.real()) < spec.chi.r1 && std::abs(y.imag()) < spec.chi.r2)
                out[grid.index(i, j)] = spec.epsilon * spec.chi.f(y.real(), y.imag());
        }
    return out;
}

namespace {

// <qbar^j, II0>_g for Q^1 = dz^2 and Q^2 = i dz^2.
std::pair<ScalarField, ScalarField> basis_contractions(const GeometryFields& geo) {
    return {re_Q_h0(geo, {1.0, 0.0}), re_Q_h0(geo, {0.0, 1.0})};
}

Eigen::Matrix2d pseudo_inverse(const Eigen::Matrix2d& M, double rel_cut = 1e-8) {
    Eigen::JacobiSVD<Eigen::Matrix2d> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Vector2d s = svd.singularValues();
    Eigen::Vector2d sinv = Eigen::Vector2d::Zero();
    for (int i = 0; i < 2; ++i)
        if (s[i] > rel_cut * s[0]) sinv[i] = 1.0 / s[i];
    return svd.matrixV() * sinv.asDiagonal() * svd.matrixU().transpose();
}

} // namespace

Eigen::Vector2d teich_pairing(const GeometryFields& geo, const VariationField& w) {
    auto [c1, c2] = basis_contractions(geo);
    return {integrate(w.v * c1, geo.dvol), integrate(w.v * c2, geo.dvol)};
}

TeichDirections teich_directions(const GeometryFields& geo, double rank_tol) {
    auto [c1, c2] = basis_contractions(geo);
    TeichDirections d{c1 * geo.normal, c2 * geo.normal, Eigen::Matrix2d::Zero(), false, 0.0};
    d.M(0, 0) = integrate(c1 * c1, geo.dvol);
    d.M(0, 1) = d.M(1, 0) = integrate(c1 * c2, geo.dvol);
    d.M(1, 1) = integrate(c2 * c2, geo.dvol);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(d.M);
    const double top = es.eigenvalues()[1];
    d.rank_ratio = top > 0.0 ? std::max(0.0, es.eigenvalues()[0]) / top : 0.0;
    d.isothermic = d.rank_ratio <= rank_tol;
    return d;
}

Eigen::Vector2d teich_defect(const GeometryFields& geo, const VectorField4& pts) {
    require_same_grid(geo.grid, pts.grid, "teich_defect");
    auto [p1, p2] = gradient(pts, geo.scheme);
    const ScalarField Ei = exp(-2.0 * geo.lambda);
    const ScalarField trace_free = Ei * (dot(p1, p1) - dot(p2, p2));
    const ScalarField off = Ei * dot(p1, p2);
    // (a, b) = (2, 0) for dz^2 and (0, -2) for i dz^2
    return {integrate(2.0 * trace_free), integrate(-4.0 * off)};
}

BumpFamily bump_family(const GeometryFields& geo, const BumpSpec& spec, const TeichDirections& dirs,
                       const BumpOptions& opts) {
    if (!geo.conformal) throw ContractError("bump_family needs a conformal base immersion");
    if (dirs.isothermic && !opts.allow_isothermic)
        throw DegeneracyError("bump_family: the base immersion is isothermic; the pairing matrix is singular");
    const ScalarField chi = bump_field(geo.grid, spec);
    const std::size_t k0 = geo.grid.index(spec.i0, spec.j0);
    const Vec4 n0 = geo.normal[k0];

    BumpFamily fam{geo.phi, ScalarField(geo.grid, 1.0), Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero(), 0.0, 0, n0};

    ScalarField v(geo.grid);
    for (std::size_t k = 0; k < geo.grid.size(); ++k) v[k] = chi[k] * n0.dot(geo.normal[k]);
    auto [c1, c2] = basis_contractions(geo);
    const Eigen::Vector2d c(integrate(v * c1, geo.dvol), integrate(v * c2, geo.dvol));
    fam.alpha0 = -pseudo_inverse(dirs.M) * c;
    fam.alpha = fam.alpha0;
    const double t = spec.t;
    if (t == 0.0) return fam;

    auto build = [&](const Eigen::Vector2d& al, VectorField4& pts, ScalarField& beta) {
        for (std::size_t k = 0; k < geo.grid.size(); ++k) {
            const Vec4 corr = t * (al[0] * dirs.a1[k] + al[1] * dirs.a2[k]);
            const double x = chi[k];
            const double B = 1.0 + 2.0 * t * geo.phi[k].dot(n0) * x + t * t * x * x + corr.squaredNorm() +
                             2.0 * t * x * corr.dot(n0);
            beta[k] = 1.0 / std::sqrt(B);
            pts[k] = beta[k] * (geo.phi[k] + t * x * n0 + corr);
        }
    };
    VectorField4 pts(geo.grid);
    ScalarField beta(geo.grid);
    auto residual = [&](const Eigen::Vector2d& al) {
        build(al, pts, beta);
        return Eigen::Vector2d(teich_defect(geo, pts) / t);
    };

    Eigen::Vector2d al = fam.alpha0;
    const double h = 1e-6;
    for (int it = 0; it <= opts.max_iter; ++it) {
        const Eigen::Vector2d R = residual(al);
        Eigen::Matrix2d J;
        for (int j = 0; j < 2; ++j) {
            Eigen::Vector2d e = al;
            e[j] += h;
            J.col(j) = (residual(e) - R) / h;
        }
        // Only the part of the defect that the directions can reach is driven to
        // zero (all of it on non-isothermic bases).
        Eigen::JacobiSVD<Eigen::Matrix2d> svd(J, Eigen::ComputeFullU);
        const auto& s = svd.singularValues();
        Eigen::Vector2d Rr = Eigen::Vector2d::Zero();
        for (int i = 0; i < 2; ++i)
            if (s[i] > 1e-8 * s[0]) Rr += svd.matrixU().col(i) * svd.matrixU().col(i).dot(R);
        fam.residual = Rr.norm();
        fam.iterations = it;
        if (fam.residual <= opts.tol) {
            build(al, pts, beta);
            fam.points = pts;
            fam.beta = beta;
            fam.alpha = al;
            return fam;
        }
        al -= pseudo_inverse(J) * R;
    }
    throw ConstructionError("bump_family: Newton iteration for alpha did not converge (residual " +
                            std::to_string(fam.residual) + ")");
}

BumpFamily bump_family(const GeometryFields& geo, const BumpSpec& spec, const BumpOptions& opts) {
    return bump_family(geo, spec, teich_directions(geo), opts);
}

double F_chi(double lambda0, double Q1, const Profile& chi, int n) {
    if (n < 3) throw ConfigError("F_chi: too few quadrature points");
    const double h1 = 2.0 * chi.r1 / (n - 1), h2 = 2.0 * chi.r2 / (n - 1);
    double grad = 0.0, aniso = 0.0;
#pragma omp parallel for reduction(+ : grad, aniso)
    for (int i = 0; i < n; ++i) {
        const double y1 = -chi.r1 + i * h1;
        for (int j = 0; j < n; ++j) {
            const double y2 = -chi.r2 + j * h2;
            const double a = chi.d1(y1, y2), b = chi.d2(y1, y2);
            grad += a * a + b * b;
            aniso += a * a - b * b;
        }
    }
    // the profile and its derivatives vanish on the box boundary: plain sums are the trapezoid rule
    grad *= h1 * h2;
    aniso *= h1 * h2;
    return 0.5 * grad - 2.0 * std::exp(-2.0 * lambda0) * Q1 * aniso;
}

std::pair<double, double> F_chi_at(const GeometryFields& geo, std::size_t k, const QuadraticDifferential& Q,
                                   const Profile& chi, int quad_points) {
    const cplx q = Q.value();
    const double theta = std::abs(q) > 0.0 ? -0.5 * std::arg(q) : 0.0;
    return {F_chi(geo.lambda[k], std::abs(q), chi, quad_points), theta};
}

double F_chi_tau_closed(const Profile1D& phi, double tau, double k, int n) {
    if (!(tau > 0.0)) throw DomainError("tau must be positive");
    const double h = 2.0 * phi.half_width / (n - 1);
    double Ip = 0.0, I = 0.0;
    for (int i = 0; i < n; ++i) {
        const double s = -phi.half_width + i * h;
        Ip += phi.df(s) * phi.df(s);
        I += phi.f(s) * phi.f(s);
    }
    Ip *= h;
    I *= h;
    return Ip * I * (0.5 * tau * (1.0 - k) + 0.5 / tau * (1.0 + k));
}

std::optional<double> negative_tau_threshold(double k) {
    if (std::abs(k) <= 1.0) return std::nullopt;
    // F < 0  <=>  tau^2 (k - 1) > 1 + k; for k > 1 above the threshold, for k < -1 below it
    return std::sqrt((1.0 + k) / (k - 1.0));
}

DescentCheck descent_expansion_check(const GeometryFields& geo, const QuadraticDifferential& Q, BumpSpec spec,
                                     double delta, const BumpOptions& opts) {
    const std::size_t k0 = geo.grid.index(spec.i0, spec.j0);
    auto [F, theta] = F_chi_at(geo, k0, Q, spec.chi);
    spec.rotation = theta;
    spec.t = delta * spec.epsilon;
    DescentCheck out;
    out.epsilon = spec.epsilon;
    out.t = spec.t;
    out.F = F;
    out.model = spec.t * spec.t * spec.epsilon * spec.epsilon * F;
    const BumpFamily fam = bump_family(geo, spec, opts);
    out.alpha0 = fam.alpha0;
    for (const auto& p : fam.points.values) out.unit_defect = std::max(out.unit_defect, std::abs(p.norm() - 1.0));
    const GeometryFields moved = geometry_of_points(fam.points, false, geo.scheme);
    out.lhs = integrate(moved.dvol - geo.dvol);
    out.rel_err = out.model != 0.0 ? std::abs(out.lhs - out.model) / std::abs(out.model) : std::abs(out.lhs);
    return out;
}

double mobius_descent_model(double F, double t, double eps, const Vec4& a, const Vec4& phi_x0) {
    const double a2 = a.squaredNorm();
    const double den = 1.0 + a2 - 2.0 * a.dot(phi_x0);
    return t * t * eps * eps * F * (1.0 - a2) * (1.0 - a2) / (den * den);
}

MobiusDescentReport mobius_uniform_descent_check(const GeometryFields& geo, const QuadraticDifferential& Q,
                                                 BumpSpec spec, const std::vector<Vec4>& a_samples,
                                                 double delta, const BumpOptions& opts,
                                                 std::optional<double> F_override) {
    const std::size_t k0 = geo.grid.index(spec.i0, spec.j0);
    auto [F, theta] = F_chi_at(geo, k0, Q, spec.chi);
    if (F_override) F = *F_override;
    spec.rotation = theta;
    spec.t = delta * spec.epsilon;
    MobiusDescentReport rep;
    rep.epsilon = spec.epsilon;
    rep.t = spec.t;
    rep.F = F;
    const BumpFamily fam = bump_family(geo, spec, opts);
    const GeometryFields moved = geometry_of_points(fam.points, false, geo.scheme);
    rep.rows.resize(a_samples.size());
#pragma omp parallel for
    for (int s = 0; s < int(a_samples.size()); ++s) {
        const MobiusParam p(a_samples[s]);
        MobiusDescentRow r;
        r.a = a_samples[s];
        // difference accumulated sample by sample: the two areas agree to many digits
        const double a2 = r.a.squaredNorm();
        double acc = 0.0;
        for (std::size_t k = 0; k < geo.grid.size(); ++k) {
            const double e1 = (1.0 - a2) / (1.0 + a2 - 2.0 * r.a.dot(moved.phi[k]));
            const double e0 = (1.0 - a2) / (1.0 + a2 - 2.0 * r.a.dot(geo.phi[k]));
            acc += e1 * e1 * moved.dvol[k] - e0 * e0 * geo.dvol[k];
        }
        r.lhs = acc / double(geo.grid.size()) * geo.grid.lattice().cell_area();
        r.model = mobius_descent_model(F, spec.t, spec.epsilon, r.a, fam.points[k0]);
        r.rel_err = r.model != 0.0 ? std::abs(r.lhs - r.model) / std::abs(r.model) : std::abs(r.lhs);
        rep.rows[s] = r;
    }
    rep.margin = -std::numeric_limits<double>::infinity();
    rep.model_max = -std::numeric_limits<double>::infinity();
    for (const auto& r : rep.rows) {
        rep.worst_rel_err = std::max(rep.worst_rel_err, r.rel_err);
        rep.margin = std::max(rep.margin, r.lhs);
        rep.model_max = std::max(rep.model_max, r.model);
        const double e = spec.epsilon, t = spec.t;
        const double budget = e * t * t * t + r.a.norm() * (t * e * e * e + t * t * e * e);
        rep.budget_constant = std::max(rep.budget_constant, std::abs(r.lhs - r.model) / budget);
    }
    return rep;
}

} // namespace ctl
