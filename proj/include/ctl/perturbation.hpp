#pragma once

// Localized normal bump perturbations that keep the conformal class fixed
// (to first order in a surrogate Teichmueller map), the pairing of variations
// with the holomorphic quadratic differentials dz^2 and i dz^2, the anisotropic
// Dirichlet number F_chi and the second-order area expansion along the family,
// optionally weighted by a Moebius transformation.

#include "ctl/moebius.hpp"
#include "ctl/variation.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace ctl {

// The standard bump exp(-1/(1 - s^2)) on (-1, 1) and its derivative.
double bump(double s);
double bump_prime(double s);

// A compactly supported profile of one variable, supported in [-half_width, half_width].
struct Profile1D {
    std::function<double(double)> f, df;
    double half_width = 1.0;
};
Profile1D standard_bump_1d();

// A compactly supported profile chi(y1, y2) with its gradient; the support is
// contained in the box [-r1, r1] x [-r2, r2].
struct Profile {
    std::function<double(double, double)> f, d1, d2;
    double r1 = 1.0, r2 = 1.0;
    std::string name;
};
// exp(-1/(1 - |y|^2)) on the unit disk.
Profile radial_bump();
// chi_tau(y1, y2) = phi(tau y1) phi(y2); throws DomainError for tau <= 0.
Profile chi_tau(const Profile1D& phi, double tau);

struct BumpSpec {
    int i0 = 0, j0 = 0; // grid sample x0
    Profile chi = radial_bump();
    double epsilon = 0.1;
    double t = 0.0;
    double rotation = 0.0; // chart angle theta: chi is evaluated at e^{-i theta}(z - z0)/eps
};

// chi^eps_{x0}(x) = eps chi(e^{-i theta}(x - x0)/eps) sampled on the grid (periodic
// nearest image); throws DomainError if the support does not fit in the chart.
ScalarField bump_field(const PeriodicGrid& grid, const BumpSpec& spec);

// c_j = integral of (w . n) <qbar^j, II0>_g dvol_g for Q^1 = dz^2, Q^2 = i dz^2.
Eigen::Vector2d teich_pairing(const GeometryFields& geo, const VariationField& w);

// Correction directions a_j = <qbar^j, II0>_g n and their pairing matrix
// M(j, k) = teich_pairing(a_k)_j (the Gram matrix of the two contractions).
struct TeichDirections {
    VectorField4 a1, a2;
    Eigen::Matrix2d M;
    bool isothermic = false; // M numerically rank one
    double rank_ratio = 0.0; // smallest / largest eigenvalue of M
};
TeichDirections teich_directions(const GeometryFields& geo, double rank_tol = 1e-10);

// Surrogate Teichmueller coordinates of the metric pulled back by `pts`:
// D_j = integral of <qbar^j, g_pts>_{g} dvol_g for the base conformal metric g.
// Vanishes on the base and its differential is -2 teich_pairing.
Eigen::Vector2d teich_defect(const GeometryFields& geo, const VectorField4& pts);

struct BumpOptions {
    bool allow_isothermic = false; // solve in the least-squares sense on isothermic bases
    double tol = 1e-10;            // on |D| / |t|
    int max_iter = 50;
};

struct BumpFamily {
    VectorField4 points;      // Phi^eps_{x0}(t)
    ScalarField beta;         // normalization factor
    Eigen::Vector2d alpha;    // alpha_j(t, eps)
    Eigen::Vector2d alpha0;   // alpha_j(0, eps), linear solve
    double residual = 0.0;    // |D| / |t| at the solution (0 for t = 0)
    int iterations = 0;
    Vec4 n0;                  // normal at x0
};

// Phi^eps(t) = beta [Phi + t chi^eps n0 + t sum alpha_j a_j] with beta from the
// explicit normalization and alpha solved by Newton so that the surrogate class
// defect vanishes. Throws DegeneracyError on isothermic bases unless allowed,
// ConstructionError when Newton does not converge.
BumpFamily bump_family(const GeometryFields& geo, const BumpSpec& spec, const TeichDirections& dirs,
                       const BumpOptions& opts = {});
BumpFamily bump_family(const GeometryFields& geo, const BumpSpec& spec, const BumpOptions& opts = {});

// F_chi = 1/2 int |grad chi|^2 - 2 e^{-2 lambda0} Q1 int (|d1 chi|^2 - |d2 chi|^2),
// with Q2 = 0 in the chart where chi lives. Tensor trapezoid quadrature.
double F_chi(double lambda0, double Q1, const Profile& chi, int quad_points = 1601);
// Same at a grid sample: the chart is rotated by theta = -arg(Q)/2 so that Q
// becomes |Q| (real) there; returns {F, theta}.
std::pair<double, double> F_chi_at(const GeometryFields& geo, std::size_t k, const QuadraticDifferential& Q,
                                   const Profile& chi, int quad_points = 1601);
// Closed form for chi_tau: I_{phi'} I_phi [tau/2 (1 - k) + 1/(2 tau) (1 + k)], k = 4 e^{-2 lambda0} Q1.
double F_chi_tau_closed(const Profile1D& phi, double tau, double k, int quad_points = 20001);
// The smallest tau making the closed form negative, if any (|k| > 1).
std::optional<double> negative_tau_threshold(double k);

struct DescentCheck {
    double epsilon = 0.0, t = 0.0;
    double F = 0.0;
    double lhs = 0.0;   // A(Phi^eps(t)) - A(Phi)
    double model = 0.0; // t^2 eps^2 F_chi
    double rel_err = 0.0;
    Eigen::Vector2d alpha0;
    double unit_defect = 0.0; // sup ||Phi^eps(t)| - 1|
};

// t = delta * eps; the bump chart is rotated so that Q2(x0) = 0.
DescentCheck descent_expansion_check(const GeometryFields& geo, const QuadraticDifferential& Q, BumpSpec spec,
                                     double delta = 0.5, const BumpOptions& opts = {});

struct MobiusDescentRow {
    Vec4 a;
    double lhs = 0.0;   // A(Psi_a o Phi^eps(t)) - A(Psi_a o Phi)
    double model = 0.0; // t^2 eps^2 F (1 - |a|^2)^2 / (1 + |a|^2 - 2 a . Phi^eps(t)(x0))^2
    double rel_err = 0.0;
};
struct MobiusDescentReport {
    double epsilon = 0.0, t = 0.0, F = 0.0;
    std::vector<MobiusDescentRow> rows;
    double worst_rel_err = 0.0;
    double margin = 0.0;     // max over samples of lhs (negative means uniform descent)
    double model_max = 0.0;  // max over samples of the model
    // max over samples of |lhs - model| / (eps t^3 + |a| (t eps^3 + t^2 eps^2)):
    // the constant implied by the error budget, expected to stay bounded as eps -> 0
    double budget_constant = 0.0;
};

// Model value of the Moebius-weighted expansion for a given F.
double mobius_descent_model(double F, double t, double eps, const Vec4& a, const Vec4& phi_x0);

// When `F_override` is set the model uses it instead of F_chi (synthetic tests).
MobiusDescentReport mobius_uniform_descent_check(const GeometryFields& geo, const QuadraticDifferential& Q,
                                                 BumpSpec spec, const std::vector<Vec4>& a_samples,
                                                 double delta = 0.5, const BumpOptions& opts = {},
                                                 std::optional<double> F_override = std::nullopt);

} // namespace ctl
