#pragma once

// First-order variations of the geometry of a conformal immersion along
// t -> normalize(Phi + t w), the constrained second variation of area, and a
// finite-difference harness that checks every formula against the geometry
// recomputed on the perturbed immersion.

#include "ctl/constrained.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ctl {

// w = sigma1 d1 Phi + sigma2 d2 Phi + v n, with w . Phi = 0.
struct VariationField {
    VectorField4 w;
    ScalarField sigma1, sigma2, v;
    bool projected = false;      // the raw input had a radial component that was removed
    double radial_defect = 0.0;  // sup |w_raw . Phi| before projection
    std::string warning;
};

// Radial components up to 1e-10 are removed silently; beyond 1e-6 the field is
// projected and a warning recorded.
VariationField decompose(const GeometryFields& geo, const VectorField4& w_raw);
// Variation with w = v n.
VariationField normal_variation(const GeometryFields& geo, const ScalarField& v);

// normalize(Phi + t w), sample by sample.
VectorField4 path_point(const VectorField4& base, const VectorField4& w, double t);

// Smooth random field tangent to S^3 along Phi: a random trigonometric
// polynomial of lattice degree <= `modes` in each of the four ambient
// components, projected orthogonally to Phi. Deterministic in `seed`.
VectorField4 random_smooth_field(const GeometryFields& geo, std::uint64_t seed, int modes = 3);

// -e^{-2 lambda}[(d1 w . n) d1 Phi + (d2 w . n) d2 Phi] - v Phi.
VectorField4 dn_dt(const GeometryFields& geo, const VariationField& w);
// 1/2 [Delta_g v + (|II|^2 + 2) v] + sigma . grad H.
ScalarField dH_dt(const GeometryFields& geo, const VariationField& w);
// d/dt of sqrt(det g_t): -2 H v e^{2 lambda} + d1(e^{2 lambda} sigma1) + d2(e^{2 lambda} sigma2).
ScalarField dvol_dt(const GeometryFields& geo, const VariationField& w);
// -2 integral of H v dvol_g.
double first_variation_area(const GeometryFields& geo, const VariationField& w);
// d/dt <qbar, II0_t>_{g_t} for the constant quadratic differential Q.
ScalarField dII0_contraction_dt(const GeometryFields& geo, const VariationField& w,
                                const QuadraticDifferential& Q);

// Im<Q, h0>_g = 4 e^{-4 lambda}(-q1 II0_12 - q2 II0_11).
ScalarField im_Q_h0(const GeometryFields& geo, const QuadraticDifferential& Q);

// Second variation of area along conformal-class preserving paths at a
// constrained-minimal immersion. Throws ContractError when
// ccms_residual(geo, Q) exceeds `gate`.
double second_variation(const GeometryFields& geo, const QuadraticDifferential& Q,
                        const VariationField& w, double gate = 1e-5);
// Symmetric bilinear form of the normal part: B(v, v) = second_variation(v n).
double second_variation_bilinear(const GeometryFields& geo, const QuadraticDifferential& Q,
                                 const ScalarField& v1, const ScalarField& v2, double gate = 1e-5);

enum class Formula { dn_dt, dH_dt, dII0, dvol, first_variation };
const char* to_string(Formula f);

struct FdReport {
    Formula formula = Formula::dH_dt;
    std::vector<double> analytic; // flattened field (4 entries per sample for dn_dt)
    std::vector<double> fd;
    double rel_err = 0.0;
};

// Central differences at t and t/2 combined by Richardson extrapolation.
// Fields: rel_err = sup|analytic - fd| / max(sup|analytic|, sup|fd|).
// First variation: |analytic - fd| / max(|analytic|, |fd|, integral |w| dvol),
// so that vanishing first variations (minimal tori) are measured on the scale of w.
FdReport fd_harness(const GeometryFields& geo, const VariationField& w, Formula f,
                    const QuadraticDifferential& Q = {0.3, 0.2}, double t = 1e-3);

} // namespace ctl
