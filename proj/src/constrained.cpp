#include "ctl/constrained.hpp"
#include "ctl/errors.hpp"

#include <Eigen/SVD>

#include <cmath>

namespace ctl {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

// g^ik g^jl q_ij II0_kl for the symmetric form q = [[a, b], [b, -a]].
ScalarField contract(const GeometryFields& geo, double a, double b) {
    ScalarField out(geo.grid);
    for (std::size_t k = 0; k < geo.grid.size(); ++k) {
        const double det = geo.g11[k] * geo.g22[k] - geo.g12[k] * geo.g12[k];
        Eigen::Matrix2d gi;
        gi << geo.g22[k] / det, -geo.g12[k] / det, -geo.g12[k] / det, geo.g11[k] / det;
        Eigen::Matrix2d q, h;
        q << a, b, b, -a;
        h << geo.II0_11[k], geo.II0_12[k], geo.II0_12[k], geo.II0_22[k];
        out[k] = (gi * q * gi * h).trace();
    }
    return out;
}

double l2(const ScalarField& f, const ScalarField& w) { return std::sqrt(std::max(0.0, integrate(f * f, w))); }

double oscillation(const ScalarField& f) {
    const double m = f.mean();
    return (f - m).sup_norm();
}

} // namespace

ScalarField re_Q_h0(const GeometryFields& geo, const QuadraticDifferential& Q) {
    return contract(geo, Q.a(), Q.b());
}

QFit fit_Q(const GeometryFields& geo, double minimal_tol, double fit_tol) {
    QFit out{QuadraticDifferential{}, ScalarField(geo.grid), 0.0, false, 2, false, {}};
    const double supH = geo.H.sup_norm();
    if (supH <= minimal_tol) {
        out.minimal = true; // H below the threshold counts as H = 0, so the residual is zero too
        out.message = "H vanishes: minimal immersion, Q = 0";
        return out;
    }
    const ScalarField c1 = contract(geo, 2.0, 0.0);  // d/dq1
    const ScalarField c2 = contract(geo, 0.0, -2.0); // d/dq2
    const std::size_t n = geo.grid.size();
    Eigen::MatrixXd A(n, 2);
    Eigen::VectorXd rhs(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double w = std::sqrt(geo.dvol[k]);
        A(k, 0) = w * c1[k];
        A(k, 1) = w * c2[k];
        rhs[k] = w * geo.H[k];
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double cutoff = 1e-8 * sv[0];
    out.rank = (sv[0] > 0.0 ? 1 : 0) + (sv[1] > cutoff ? 1 : 0);
    Eigen::Vector2d sol = Eigen::Vector2d::Zero();
    const Eigen::VectorXd ub = svd.matrixU().transpose() * rhs;
    for (int i = 0; i < 2; ++i)
        if (sv[i] > cutoff) sol += (ub[i] / sv[i]) * svd.matrixV().col(i);
    out.Q = {sol[0], sol[1]};
    out.residual = geo.H - (sol[0] * c1 + sol[1] * c2);
    out.rel_residual = l2(out.residual, geo.dvol) / l2(geo.H, geo.dvol);
    if (out.rank < 2) {
        out.degenerate = out.rel_residual > fit_tol;
        out.message = out.degenerate ? "design matrix rank-deficient and residual above threshold (fit degenerate)"
                                     : "design matrix rank-deficient; minimum-norm Q returned";
    }
    return out;
}

double ccms_residual(const GeometryFields& geo, const QuadraticDifferential& Q) {
    return (geo.H - re_Q_h0(geo, Q)).sup_norm();
}

const char* to_string(Ellipticity e) {
    switch (e) {
    case Ellipticity::strictly_elliptic: return "strictly_elliptic";
    case Ellipticity::elliptic: return "elliptic";
    case Ellipticity::mixed: return "mixed";
    case Ellipticity::hyperbolic: return "hyperbolic";
    }
    return "?";
}

EllipticityReport ellipticity(const ScalarField& lambda, const QuadraticDifferential& Q, double band) {
    EllipticityReport r{ScalarField(lambda.grid), 0, 0, 0, Ellipticity::strictly_elliptic};
    const double q = std::abs(Q.value());
    std::size_t se = 0, bd = 0, hy = 0;
    for (std::size_t k = 0; k < lambda.size(); ++k) {
        const double v = 4.0 * std::exp(-2.0 * lambda[k]) * q;
        r.two_Q_norm[k] = v;
        if (std::abs(v - 1.0) <= band) ++bd;
        else if (v < 1.0) ++se;
        else ++hy;
    }
    const double n = double(lambda.size());
    r.strictly_elliptic = se / n;
    r.elliptic_boundary = bd / n;
    r.hyperbolic = hy / n;
    if (r.two_Q_norm.max() < 1.0 && bd == 0) r.classification = Ellipticity::strictly_elliptic;
    else if (hy == 0) r.classification = Ellipticity::elliptic;
    else if (se == 0 && bd == 0) r.classification = Ellipticity::hyperbolic;
    else r.classification = Ellipticity::mixed;
    return r;
}

EllipticityReport ellipticity(const GeometryFields& geo, const QuadraticDifferential& Q, double band) {
    return ellipticity(geo.lambda, Q, band);
}

IsothermicResult isothermic_test(const GeometryFields& geo, double tol) {
    const ScalarField& a = geo.H0_re;
    const ScalarField b = -geo.H0_im;
    Eigen::Matrix2d G;
    G(0, 0) = integrate(a * a, geo.dvol);
    G(0, 1) = G(1, 0) = integrate(a * b, geo.dvol);
    G(1, 1) = integrate(b * b, geo.dvol);
    const double tr = G.trace();
    if (!(tr > 1e-28)) throw GeometryError("H0 vanishes identically (totally umbilic), impossible for a torus");
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(G);
    Eigen::Vector2d v = es.eigenvectors().col(0);
    if (v[1] < 0.0 || (v[1] == 0.0 && v[0] < 0.0)) v = -v;
    IsothermicResult r;
    r.residual = std::sqrt(std::max(0.0, es.eigenvalues()[0]) / tr);
    r.theta = std::atan2(v[1], v[0]);
    if (*r.theta <= 0.0) *r.theta += kPi; // v[1] == 0 edge: theta = pi is the same line as 0
    r.is_isothermic = r.residual <= tol || geo.H.sup_norm() <= 1e-8;
    return r;
}

const char* to_string(Bucket b) {
    switch (b) {
    case Bucket::minimal: return "minimal";
    case Bucket::flat_cmc: return "flat_cmc";
    case Bucket::constrained_only: return "constrained_only";
    case Bucket::not_constrained: return "not_constrained";
    }
    return "?";
}

Classification classify_theorem_I2(const GeometryFields& geo) {
    if (!geo.conformal) throw ContractError("classification needs a conformal parametrization");
    Classification c{Bucket::not_constrained, fit_Q(geo), 0.0, IsothermicResult{}, 0.0, 0.0, 0.0, 0.0, 0.0};
    c.ccms = ccms_residual(geo, c.fit.Q);
    c.isothermic = isothermic_test(geo);
    c.sup_H = geo.H.sup_norm();
    c.H_oscillation = oscillation(geo.H);
    const ScalarField K = -laplacian(geo.lambda, geo.scheme) * exp(-2.0 * geo.lambda);
    c.K_mean = K.mean();
    c.K_oscillation = oscillation(K);
    c.liouville = liouville_residual(geo).sup_norm();
    const double Hscale = 1.0 + c.sup_H;
    if (c.fit.minimal) c.bucket = Bucket::minimal;
    else if (c.fit.rel_residual <= 1e-6 && c.isothermic.is_isothermic && c.H_oscillation <= 1e-8 * Hscale &&
             c.K_oscillation <= 1e-7 && std::abs(c.K_mean) <= 1e-7)
        c.bucket = Bucket::flat_cmc;
    else if (c.fit.rel_residual <= 1e-6) c.bucket = Bucket::constrained_only;
    else c.bucket = Bucket::not_constrained;
    return c;
}

GeometryFields rechart(const GeometryFields& geo, cplx c) {
    PeriodicGrid g(geo.grid.lattice().scaled(c), geo.grid.n1(), geo.grid.n2());
    return geometry_of_points(VectorField4(g, geo.phi.values), geo.conformal, geo.scheme);
}

cplx normalizing_factor(const QuadraticDifferential& Q) {
    if (std::abs(Q.value()) == 0.0) throw DomainError("Q = 0 admits no normalizing chart");
    return 1.0 / std::sqrt(4.0 * Q.value());
}

double CmcRelations::max_residual() const {
    return std::max({res_kappa, res_sum, res_ratio, res_gap, res_constancy, offdiag});
}

CmcRelations cmc_relations_check(const GeometryFields& geo) {
    const Classification cls = classify_theorem_I2(geo);
    CmcRelations r;
    if (cls.bucket == Bucket::minimal) {
        r.skipped = true;
        r.note = "minimal: H vanishes, the relations concern the H != 0 case";
        return r;
    }
    if (cls.bucket != Bucket::flat_cmc)
        throw ContractError(std::string("relations need a flat CMC torus, got ") + to_string(cls.bucket));

    // Chart with Q = dz^2/4, then the isothermic angle there.
    const cplx c = normalizing_factor(cls.fit.Q);
    const GeometryFields gq = rechart(geo, c);
    const IsothermicResult iso = isothermic_test(gq);
    if (!iso.theta) throw ContractError("isothermic angle undefined");
    r.theta = *iso.theta;
    const double st = std::sin(r.theta);
    r.tau = 0.5 * r.theta - 0.25 * kPi;
    // dz = e^{i tau} dy: the principal chart is z = c e^{i tau} y.
    r.chart_factor = c * std::polar(1.0, r.tau);
    const GeometryFields gy = rechart(geo, r.chart_factor);

    const ScalarField e2l = exp(2.0 * gy.lambda);
    const ScalarField em2l = exp(-2.0 * gy.lambda);
    const ScalarField k1 = em2l * gy.II11;
    const ScalarField k2 = em2l * gy.II22;
    r.kappa1 = k1.mean();
    r.kappa2 = k2.mean();
    r.offdiag = (em2l * gy.II12).sup_norm();

    // principal curvatures from H0 of the Q = 1/4 chart (lambda there is the same
    // function up to the constant log|e^{i tau}| = 0)
    const ScalarField e2lq = exp(2.0 * gq.lambda), em2lq = exp(-2.0 * gq.lambda);
    const ScalarField k1f = (1.0 / st) * em2lq * (e2lq + st) * gq.H0_re;
    const ScalarField k2f = (1.0 / st) * em2lq * (st - e2lq) * gq.H0_re;
    r.res_kappa = std::max((k1 - k1f).sup_norm(), (k2 - k2f).sup_norm());
    r.res_sum = (k1 + k2 - st * em2l * (k1 - k2)).sup_norm();
    r.res_ratio = (k2 - ((st - e2l) / (st + e2l)) * k1).sup_norm();
    r.res_gap = (k2 - k1 + (2.0 * e2l * k1) / (st + e2l)).sup_norm();
    r.res_constancy = oscillation((e2l + st) * k1);
    return r;
}

StrictPdeResidual strict_pde_residual(const GeometryFields& geo, const QuadraticDifferential& Q) {
    if (!geo.conformal) throw ContractError("normal-form residuals need a conformal parametrization");
    StrictPdeResidual r{false, false, cplx(1.0), VectorField4(geo.grid), ScalarField(geo.grid),
                        ScalarField(geo.grid), 0, 0, 0};
    const Scheme s = geo.scheme;
    if (std::abs(Q.value()) == 0.0) {
        r.minimal_branch = true;
        const ScalarField e2l = exp(2.0 * geo.lambda);
        VectorField4 lap = derivative(geo.d1, Direction::x1, s) + derivative(geo.d2, Direction::x2, s);
        r.res_I5 = lap + (2.0 * e2l) * geo.phi;
        r.res_III2 = laplacian(exp(4.0 * geo.lambda) * geo.H, s);
        r.sup_I5 = r.res_I5.sup_norm();
        r.sup_III2 = r.res_III2.sup_norm();
        return r;
    }
    r.chart_factor = normalizing_factor(Q);
    const GeometryFields gn = rechart(geo, r.chart_factor);
    const PeriodicGrid& g = gn.grid;
    r.res_I5 = VectorField4(g);
    r.res_III2 = ScalarField(g);
    r.res_III3 = ScalarField(g);
    r.strictly_elliptic = gn.lambda.min() > 0.0;

    const ScalarField e2l = exp(2.0 * gn.lambda), em2l = exp(-2.0 * gn.lambda);
    r.res_I5 = derivative((1.0 - em2l) * gn.d1, Direction::x1, s) + derivative((1.0 + em2l) * gn.d2, Direction::x2, s) +
               (2.0 * e2l) * gn.phi;

    const ScalarField u = exp(4.0 * gn.lambda) * gn.H;
    auto [h1, h2] = gradient(gn.H, s);
    r.res_III2 = laplacian(u, s) - derivative(e2l * h1, Direction::x1, s) + derivative(e2l * h2, Direction::x2, s);

    auto [u1, u2] = gradient(u, s);
    auto [m1, m2] = gradient(em2l, s);
    const ScalarField lhs = derivative((1.0 - em2l) * u1, Direction::x1, s) + derivative((1.0 + em2l) * u2, Direction::x2, s);
    const ScalarField rhs = 2.0 * (derivative(m1 * u, Direction::x1, s) - derivative(m2 * u, Direction::x2, s));
    r.res_III3 = lhs - rhs;

    r.sup_I5 = r.res_I5.sup_norm();
    r.sup_III2 = r.res_III2.sup_norm();
    r.sup_III3 = r.res_III3.sup_norm();
    return r;
}

} // namespace ctl
