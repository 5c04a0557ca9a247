#pragma once

// The constrained-minimal equation H = Re<Q, h0>_g on tori: fitting the constant
// quadratic differential, ellipticity regimes, isothermic detection, the
// flat-CMC classification and the normal-form PDE residuals.

#include "ctl/geometry.hpp"

#include <optional>
#include <string>

namespace ctl {

// Q = (q1 + i q2) dz^2 in the flat lattice chart. Its real form is
// qbar = a (dx1^2 - dx2^2) + b (dx1 dx2 + dx2 dx1) with a = 2 q1, b = -2 q2.
struct QuadraticDifferential {
    double q1 = 0.0;
    double q2 = 0.0;

    double a() const { return 2.0 * q1; }
    double b() const { return -2.0 * q2; }
    cplx value() const { return {q1, q2}; }
    static QuadraticDifferential from(cplx q) { return {q.real(), q.imag()}; }
};

// Pointwise Re<Q, h0>_g = 4 e^{-4 lambda} (q1 II0_11 - q2 II0_12); also equals
// <qbar, II0>_g = g^ik g^jl qbar_ij II0_kl in a conformal chart.
ScalarField re_Q_h0(const GeometryFields& geo, const QuadraticDifferential& Q);

struct QFit {
    QuadraticDifferential Q;
    ScalarField residual;        // H - Re<Q, h0>_g
    double rel_residual = 0.0;   // L2(dvol) norm of residual over that of H
    bool minimal = false;        // H vanished; Q = 0 returned
    int rank = 2;                // numerical rank of the weighted design matrix
    bool degenerate = false;     // rank < 2 and the residual is still above threshold
    std::string message;
};

// Weighted (dvol) least squares for (q1, q2); rank-deficient systems return the
// minimum-norm solution.
QFit fit_Q(const GeometryFields& geo, double minimal_tol = 1e-8, double fit_tol = 1e-6);

double ccms_residual(const GeometryFields& geo, const QuadraticDifferential& Q);

enum class Ellipticity { strictly_elliptic, elliptic, mixed, hyperbolic };
const char* to_string(Ellipticity e);

struct EllipticityReport {
    ScalarField two_Q_norm; // 2|Q|_g = 4 e^{-2 lambda} |Q|
    double strictly_elliptic = 0.0;
    double elliptic_boundary = 0.0;
    double hyperbolic = 0.0;
    Ellipticity classification = Ellipticity::strictly_elliptic;
};

EllipticityReport ellipticity(const ScalarField& lambda, const QuadraticDifferential& Q, double band = 1e-6);
EllipticityReport ellipticity(const GeometryFields& geo, const QuadraticDifferential& Q, double band = 1e-6);

struct IsothermicResult {
    bool is_isothermic = false;
    std::optional<double> theta; // in (0, pi): cos(theta) H0_re - sin(theta) H0_im = 0
    double residual = 0.0;       // relative L2 residual of the best combination
};
IsothermicResult isothermic_test(const GeometryFields& geo, double tol = 1e-6);

enum class Bucket { minimal, flat_cmc, constrained_only, not_constrained };
const char* to_string(Bucket b);

struct Classification {
    Bucket bucket = Bucket::not_constrained;
    QFit fit;
    double ccms = 0.0;
    IsothermicResult isothermic;
    double sup_H = 0.0;
    double H_oscillation = 0.0; // sup |H - mean H|
    double K_oscillation = 0.0; // sup |K - mean K|, K the intrinsic curvature
    double K_mean = 0.0;
    double liouville = 0.0;     // sup of the Gauss-equation residual
};
Classification classify_theorem_I2(const GeometryFields& geo);

// Geometry of the same samples seen in the chart w = z / c (lattice omega / c).
GeometryFields rechart(const GeometryFields& geo, cplx c);
// Chart factor c with Q c^2 = 1/4, i.e. c = (4Q)^{-1/2}; throws DomainError for Q = 0.
cplx normalizing_factor(const QuadraticDifferential& Q);

struct CmcRelations {
    bool skipped = false;
    std::string note;
    double theta = 0.0; // isothermic angle in the Q = 1/4 chart
    double tau = 0.0;   // rotation to principal coordinates, theta/2 - pi/4
    cplx chart_factor;  // total chart change z = chart_factor * y
    double kappa1 = 0.0, kappa2 = 0.0; // means of the principal curvatures
    double offdiag = 0.0;     // sup |e^{-2 lambda} II_12| in principal coordinates
    double res_kappa = 0.0;   // principal curvatures vs their H0 expressions
    double res_sum = 0.0;     // k1 + k2 = sin(theta) e^{-2 lambda} (k1 - k2)
    double res_ratio = 0.0;   // k2 = (sin theta - e^{2 lambda})/(sin theta + e^{2 lambda}) k1
    double res_gap = 0.0;     // k2 - k1 = -2 e^{2 lambda} k1 / (sin theta + e^{2 lambda})
    double res_constancy = 0.0; // oscillation of (e^{2 lambda} + sin theta) k1
    double max_residual() const;
};
CmcRelations cmc_relations_check(const GeometryFields& geo);

struct StrictPdeResidual {
    bool minimal_branch = false; // Q = 0: the minimal surface equation was used
    bool strictly_elliptic = false; // lambda > 0 everywhere in the normalized chart
    cplx chart_factor;
    VectorField4 res_I5;  // divergence-form equation for Phi (or Delta Phi + 2 Phi e^{2 lambda})
    ScalarField res_III2; // Delta(e^{4 lambda} H) - d1(e^{2 lambda} d1 H) + d2(e^{2 lambda} d2 H)
    ScalarField res_III3; // divergence-form equation for u = e^{4 lambda} H
    double sup_I5 = 0.0, sup_III2 = 0.0, sup_III3 = 0.0;
};
StrictPdeResidual strict_pde_residual(const GeometryFields& geo, const QuadraticDifferential& Q);

} // namespace ctl
