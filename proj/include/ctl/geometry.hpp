#pragma once

// First and second order geometry of an immersion T^2 -> S^3 and the
// Codazzi / Gauss identity residuals.
//
// Conventions (fixed once, used everywhere):
//  * n = *(Phi ^ d1 Phi ^ d2 Phi)/|d1 Phi ^ d2 Phi|, with n_i = det[e_i, Phi, d1 Phi, d2 Phi];
//  * II_ij = n . d_ij Phi, H = (1/2) g^ij II_ij;
//  * II0 = II - H g, H0_re = e^{-2 lambda} II0_11, H0_im = -e^{-2 lambda} II0_12.

#include "ctl/immersion.hpp"

namespace ctl {

struct GeometryFields {
    PeriodicGrid grid;
    Scheme scheme;
    bool conformal;

    VectorField4 phi, d1, d2, d11, d12, d22;
    VectorField4 normal;
    ScalarField g11, g12, g22;
    ScalarField dvol;   // sqrt(det g) per unit dx1 dx2
    ScalarField lambda; // 1/2 log g11 when conformal, 1/4 log det g otherwise
    ScalarField II11, II12, II22;
    ScalarField H;
    ScalarField II0_11, II0_12, II0_22;
    ScalarField H0_re, H0_im;
    ScalarField II_norm2; // |II|^2_g
    double conformality_defect = 0.0; // sup |1/2 log g11 - 1/2 log g22| + sup |g12|/max g11
};

VectorField4 gauss_map(const Immersion& phi, Scheme s = Scheme::spectral);
GeometryFields geometry(const Immersion& phi, Scheme s = Scheme::spectral);

// Variant that accepts a (possibly non-conformal) point field without the
// conformal-flag consistency check; used along variation paths.
GeometryFields geometry_of_points(const VectorField4& pts, bool conformal, Scheme s = Scheme::spectral);

struct CodazziResidual {
    ScalarField field1, field2;
    double sup_norm;
};
CodazziResidual codazzi_residual(const GeometryFields& geo);
ScalarField liouville_residual(const GeometryFields& geo);
// Intrinsic Gauss curvature 1 + H^2 - e^{-4 lambda}((II0_11)^2 + (II0_12)^2).
ScalarField gauss_curvature(const GeometryFields& geo);

// The vector-valued Weingarten coefficient (n . d_z^2 Phi) n with d_z = (d1 - i d2)/2,
// returned as (real part, imaginary part).
std::pair<VectorField4, VectorField4> weingarten_vector(const GeometryFields& geo);

double area(const GeometryFields& geo);

} // namespace ctl
