#include "ctl/variation.hpp"
#include "ctl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace ctl {

namespace {

void require_conformal(const GeometryFields& geo, const char* what) {
    if (!geo.conformal) throw ContractError(std::string(what) + ": needs a conformal base immersion");
}

ScalarField e2l(const GeometryFields& geo) { return exp(2.0 * geo.lambda); }

// d1(f1) + d2(f2)
ScalarField divergence(const ScalarField& f1, const ScalarField& f2, Scheme s) {
    return derivative(f1, Direction::x1, s) + derivative(f2, Direction::x2, s);
}

std::vector<double> flatten(const ScalarField& f) { return f.values; }

std::vector<double> flatten(const VectorField4& f) {
    std::vector<double> out;
    out.reserve(4 * f.size());
    for (const auto& x : f.values)
        for (int c = 0; c < 4; ++c) out.push_back(x[c]);
    return out;
}

double sup(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

} // namespace

VariationField decompose(const GeometryFields& geo, const VectorField4& w_raw) {
    require_same_grid(geo.grid, w_raw.grid, "decompose");
    VariationField out{w_raw, ScalarField(geo.grid), ScalarField(geo.grid), ScalarField(geo.grid), false, 0.0, {}};
    for (std::size_t k = 0; k < geo.grid.size(); ++k) {
        const double r = w_raw[k].dot(geo.phi[k]);
        out.radial_defect = std::max(out.radial_defect, std::abs(r));
        out.w[k] = w_raw[k] - r * geo.phi[k];
    }
    if (out.radial_defect > 1e-6) {
        out.projected = true;
        out.warning = "variation field was not tangent to S^3 (sup |w . Phi| = " +
                      std::to_string(out.radial_defect) + "); projected";
    }
    for (std::size_t k = 0; k < geo.grid.size(); ++k) {
        // Solve the 2x2 Gram system; reduces to e^{-2 lambda}(w . d_i Phi) when conformal.
        const double g11 = geo.g11[k], g12 = geo.g12[k], g22 = geo.g22[k];
        const double p1 = out.w[k].dot(geo.d1[k]), p2 = out.w[k].dot(geo.d2[k]);
        const double det = g11 * g22 - g12 * g12;
        out.sigma1[k] = (g22 * p1 - g12 * p2) / det;
        out.sigma2[k] = (g11 * p2 - g12 * p1) / det;
        out.v[k] = out.w[k].dot(geo.normal[k]);
    }
    return out;
}

VariationField normal_variation(const GeometryFields& geo, const ScalarField& v) {
    require_same_grid(geo.grid, v.grid, "normal_variation");
    return decompose(geo, v * geo.normal);
}

VectorField4 path_point(const VectorField4& base, const VectorField4& w, double t) {
    require_same_grid(base.grid, w.grid, "path_point");
    VectorField4 out(base.grid);
    for (std::size_t k = 0; k < base.size(); ++k) out[k] = (base[k] + t * w[k]).normalized();
    return out;
}

VectorField4 random_smooth_field(const GeometryFields& geo, std::uint64_t seed, int modes) {
    if (modes < 0) throw ConfigError("random_smooth_field: modes must be >= 0");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    struct Term { int k1, k2; Vec4 c, s; };
    std::vector<Term> terms;
    for (int k1 = -modes; k1 <= modes; ++k1)
        for (int k2 = -modes; k2 <= modes; ++k2) {
            if (k1 < 0 || (k1 == 0 && k2 < 0)) continue; // (k, -k) duplicates
            const double damp = 1.0 / (1.0 + k1 * k1 + k2 * k2);
            Term t{k1, k2, Vec4::Zero(), Vec4::Zero()};
            for (int c = 0; c < 4; ++c) {
                t.c[c] = damp * gauss(rng);
                t.s[c] = damp * gauss(rng);
            }
            terms.push_back(t);
        }
    const auto& g = geo.grid;
    VectorField4 w(g);
    for (int i = 0; i < g.n1(); ++i)
        for (int j = 0; j < g.n2(); ++j) {
            const double u1 = double(i) / g.n1(), u2 = double(j) / g.n2();
            Vec4 acc = Vec4::Zero();
            for (const auto& t : terms) {
                const double ph = 2.0 * M_PI * (t.k1 * u1 + t.k2 * u2);
                acc += std::cos(ph) * t.c + std::sin(ph) * t.s;
            }
            const std::size_t k = g.index(i, j);
            w[k] = acc - acc.dot(geo.phi[k]) * geo.phi[k];
        }
    return w;
}

VectorField4 dn_dt(const GeometryFields& geo, const VariationField& w) {
    require_conformal(geo, "dn_dt");
    auto [dw1, dw2] = gradient(w.w, geo.scheme);
    VectorField4 out(geo.grid);
    for (std::size_t k = 0; k < geo.grid.size(); ++k) {
        const double em = std::exp(-2.0 * geo.lambda[k]);
        const Vec4& n = geo.normal[k];
        out[k] = -em * (dw1[k].dot(n) * geo.d1[k] + dw2[k].dot(n) * geo.d2[k]) - w.v[k] * geo.phi[k];
    }
    return out;
}

ScalarField dH_dt(const GeometryFields& geo, const VariationField& w) {
    require_conformal(geo, "dH_dt");
    const ScalarField lap_g = exp(-2.0 * geo.lambda) * laplacian(w.v, geo.scheme);
    auto [H1, H2] = gradient(geo.H, geo.scheme);
    return 0.5 * (lap_g + (geo.II_norm2 + 2.0) * w.v) + w.sigma1 * H1 + w.sigma2 * H2;
}

ScalarField dvol_dt(const GeometryFields& geo, const VariationField& w) {
    require_conformal(geo, "dvol_dt");
    const ScalarField E = e2l(geo);
    return -2.0 * geo.H * w.v * E + divergence(E * w.sigma1, E * w.sigma2, geo.scheme);
}

double first_variation_area(const GeometryFields& geo, const VariationField& w) {
    return -2.0 * integrate(geo.H * w.v, geo.dvol);
}

ScalarField dII0_contraction_dt(const GeometryFields& geo, const VariationField& w,
                                const QuadraticDifferential& Q) {
    require_conformal(geo, "dII0_contraction_dt");
    const Scheme s = geo.scheme;
    const double a = Q.a(), b = Q.b();
    const ScalarField E = e2l(geo);
    const ScalarField Ei = exp(-2.0 * geo.lambda);
    const ScalarField Ei2 = Ei * Ei;
    const ScalarField C = re_Q_h0(geo, Q);
    const ScalarField& H = geo.H;
    const ScalarField& s1 = w.sigma1;
    const ScalarField& s2 = w.sigma2;
    const ScalarField& A11 = geo.II0_11;
    const ScalarField& A12 = geo.II0_12;
    auto D1 = [s](const ScalarField& f) { return derivative(f, Direction::x1, s); };
    auto D2 = [s](const ScalarField& f) { return derivative(f, Direction::x2, s); };

    auto [v1, v2] = gradient(w.v, s);
    const ScalarField Es1_1 = D1(E * s1), Es1_2 = D2(E * s1);
    const ScalarField Es2_1 = D1(E * s2), Es2_2 = D2(E * s2);
    const ScalarField div = Es1_1 + Es2_2;

    // normal part and the divergence of the tangential part
    ScalarField out = 4.0 * H * w.v * C - 2.0 * Ei * div * C;
    // second-order operator on v
    out += Ei * (D1(a * Ei * v1) - D2(a * Ei * v2) + D1(b * Ei * v2) + D2(b * Ei * v1));
    // mean-curvature coupling with the tangential part
    out -= Ei2 * H * (a * (Es1_1 - Es2_2) + b * (Es2_1 + Es1_2));
    auto [s1_1, s1_2] = gradient(s1, s);
    auto [s2_1, s2_2] = gradient(s2, s);
    out += Ei2 * ((a * A11 + b * A12) * (s1_1 + s2_2) + (a * A12 - b * A11) * (s2_1 - s1_2));
    out += Ei2 * D1(a * (A11 * s1 + A12 * s2) + b * (A12 * s1 - A11 * s2));
    out -= Ei2 * D2(a * (A12 * s1 - A11 * s2) - b * (A11 * s1 + A12 * s2));
    out += Ei2 * (D1(E * H * (a * s1 + b * s2)) + D2(E * H * (b * s1 - a * s2)));
    return out;
}

ScalarField im_Q_h0(const GeometryFields& geo, const QuadraticDifferential& Q) {
    const ScalarField Ei = exp(-2.0 * geo.lambda);
    return 4.0 * Ei * Ei * (-Q.q1 * geo.II0_12 - Q.q2 * geo.II0_11);
}

namespace {

void gate_critical(const GeometryFields& geo, const QuadraticDifferential& Q, double gate) {
    require_conformal(geo, "second_variation");
    const double r = ccms_residual(geo, Q);
    if (!(r <= gate))
        throw ContractError("second_variation: immersion is not a constrained critical point for this Q "
                            "(sup |H - Re<Q,h0>| = " + std::to_string(r) + ")");
}

// Integrand (per unit dx1 dx2) of the normal-normal part, polarized.
ScalarField normal_density(const GeometryFields& geo, const QuadraticDifferential& Q,
                           const ScalarField& va, const ScalarField& vb) {
    const double a = Q.a(), b = Q.b();
    auto [a1, a2] = gradient(va, geo.scheme);
    auto [b1, b2] = gradient(vb, geo.scheme);
    const ScalarField Ei = exp(-2.0 * geo.lambda);
    const ScalarField potential = geo.II_norm2 + 2.0 - 8.0 * geo.H * geo.H;
    return a1 * b1 + a2 * b2 - 2.0 * Ei * (a * (a1 * b1 - a2 * b2) + b * (a1 * b2 + a2 * b1)) -
           potential * va * vb * e2l(geo);
}

} // namespace

double second_variation(const GeometryFields& geo, const QuadraticDifferential& Q,
                        const VariationField& w, double gate) {
    gate_critical(geo, Q, gate);
    const double a = Q.a(), b = Q.b();
    const Scheme s = geo.scheme;
    const ScalarField E = e2l(geo);
    const ScalarField& v = w.v;
    const ScalarField& s1 = w.sigma1;
    const ScalarField& s2 = w.sigma2;
    auto [v1, v2] = gradient(v, s);
    auto [H1, H2] = gradient(geo.H, s);
    const ScalarField Im = im_Q_h0(geo, Q);

    ScalarField density = normal_density(geo, Q, v, v);
    // [2H dv + v dH + Im<Q,h0> *dv] . w_T dvol, with *(f dx1 + g dx2) = -g dx1 + f dx2
    density += E * (2.0 * geo.H * (s1 * v1 + s2 * v2) + v * (s1 * H1 + s2 * H2) + Im * (v1 * s2 - v2 * s1));
    // 4 v Re(Q) _| dH . w_T dvol = 2 v [a(H1 s1 - H2 s2) + b(H1 s2 + H2 s1)] dx
    density += 2.0 * v * (a * (H1 * s1 - H2 * s2) + b * (H1 * s2 + H2 * s1));
    // - Im<Q,h0> v *d(w_T^*) dvol, *d(w_T^*) = e^{-2 lambda}[d1(e^{2 lambda} s2) - d2(e^{2 lambda} s1)]
    density -= Im * v * (derivative(E * s2, Direction::x1, s) - derivative(E * s1, Direction::x2, s));
    return integrate(density);
}

double second_variation_bilinear(const GeometryFields& geo, const QuadraticDifferential& Q,
                                 const ScalarField& v1, const ScalarField& v2, double gate) {
    gate_critical(geo, Q, gate);
    return integrate(normal_density(geo, Q, v1, v2));
}

const char* to_string(Formula f) {
    switch (f) {
    case Formula::dn_dt: return "dn_dt";
    case Formula::dH_dt: return "dH_dt";
    case Formula::dII0: return "dII0_contraction_dt";
    case Formula::dvol: return "dvol_dt";
    case Formula::first_variation: return "first_variation_area";
    }
    return "?";
}

namespace {

// The quantity whose t-derivative the formula predicts, evaluated on Phi_t.
std::vector<double> observe(const GeometryFields& g, Formula f, const QuadraticDifferential& Q) {
    switch (f) {
    case Formula::dn_dt: return flatten(g.normal);
    case Formula::dH_dt: return flatten(g.H);
    case Formula::dII0: return flatten(re_Q_h0(g, Q));
    case Formula::dvol: return flatten(g.dvol);
    case Formula::first_variation: return {area(g)};
    }
    return {};
}

} // namespace

FdReport fd_harness(const GeometryFields& geo, const VariationField& w, Formula f,
                    const QuadraticDifferential& Q, double t) {
    require_conformal(geo, "fd_harness");
    if (!(t > 0.0)) throw ConfigError("fd_harness: step must be positive");
    FdReport rep;
    rep.formula = f;
    switch (f) {
    case Formula::dn_dt: rep.analytic = flatten(dn_dt(geo, w)); break;
    case Formula::dH_dt: rep.analytic = flatten(dH_dt(geo, w)); break;
    case Formula::dII0: rep.analytic = flatten(dII0_contraction_dt(geo, w, Q)); break;
    case Formula::dvol: rep.analytic = flatten(dvol_dt(geo, w)); break;
    case Formula::first_variation: rep.analytic = {first_variation_area(geo, w)}; break;
    }

    const double steps[4] = {t, -t, 0.5 * t, -0.5 * t};
    std::vector<std::vector<double>> obs(4);
    for (int i = 0; i < 4; ++i)
        obs[i] = observe(geometry_of_points(path_point(geo.phi, w.w, steps[i]), false, geo.scheme), f, Q);

    rep.fd.resize(rep.analytic.size());
    for (std::size_t k = 0; k < rep.fd.size(); ++k) {
        const double coarse = (obs[0][k] - obs[1][k]) / (2.0 * t);
        const double fine = (obs[2][k] - obs[3][k]) / t;
        rep.fd[k] = (4.0 * fine - coarse) / 3.0;
    }
    double diff = 0.0;
    for (std::size_t k = 0; k < rep.fd.size(); ++k) diff = std::max(diff, std::abs(rep.analytic[k] - rep.fd[k]));
    double scale = std::max(sup(rep.analytic), sup(rep.fd));
    if (f == Formula::first_variation) scale = std::max(scale, integrate(norm(w.w), geo.dvol));
    rep.rel_err = scale > 0.0 ? diff / scale : 0.0;
    return rep;
}

} // namespace ctl
