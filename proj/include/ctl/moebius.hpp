#pragma once

// Conformal transformations Psi_a of S^3 (a in the open unit 4-ball), their
// conformal factors, push-forwards of immersions, numerical checks of how the
// Weingarten form and the mean curvature vector transform, and the conformal
// volume sup_a A(Psi_a o Phi).

#include "ctl/geometry.hpp"

#include <string>
#include <vector>

namespace ctl {

// Parameter of Psi_a; the constructor enforces |a| < 1 - 1e-9.
struct MobiusParam {
    Vec4 a = Vec4::Zero();

    MobiusParam() = default;
    explicit MobiusParam(const Vec4& v);
    // Parameter of the inverse map: Psi_a^{-1} = Psi_{-a}.
    MobiusParam inverse() const { return MobiusParam(-a); }
};

constexpr double kMobiusRadius = 1.0 - 1e-9;

// Psi_a(y) = (1 - |a|^2)(y - a)/|y - a|^2 - a.
Vec4 psi(const MobiusParam& a, const Vec4& y);
// Ambient 4x4 Jacobian of Psi_a at y: (1 - |a|^2)[I/|d|^2 - 2 d d^T/|d|^4], d = y - a.
Eigen::Matrix4d psi_jacobian(const MobiusParam& a, const Vec4& y);
// mu_a(y) = log((1 - |a|^2)/(1 + |a|^2 - 2 a.y)).
double mu(const MobiusParam& a, const Vec4& y);
// Gradient of mu_a along S^3 at y: the tangential part of 2a/(1 + |a|^2 - 2 a.y).
Vec4 grad_mu(const MobiusParam& a, const Vec4& y);

ScalarField conformal_factor(const MobiusParam& a, const Immersion& phi);
Immersion push_immersion(const MobiusParam& a, const Immersion& phi);

// sup-norm of h0(Psi o Phi) - Psi_* h0(Phi) (real and imaginary parts).
double check_lemma_V1(const MobiusParam& a, const Immersion& phi, Scheme s = Scheme::spectral);
// sup-norm of Hvec(Psi o Phi) - e^{-2 mu} Psi_*[Hvec - (grad mu . n) n].
double check_lemma_V2(const MobiusParam& a, const Immersion& phi, Scheme s = Scheme::spectral);

// A(Psi_a o Phi) = integral of e^{2 mu_a(Phi)} dvol_g.
double area_under_mobius(const MobiusParam& a, const GeometryFields& geo);
double area_under_mobius(const MobiusParam& a, const Immersion& phi, Scheme s = Scheme::spectral);

struct VcOptions {
    double start_radius = 0.5;
    int max_iters = 400;
    double fd_step = 1e-5;
    double grad_tol = 1e-9;
    double step_tol = 1e-14;
    double initial_step = 0.05;
};

struct VcTraceRow {
    int start = 0;
    int iter = 0;
    double value = 0.0;
    double a_norm = 0.0;
    double grad_norm = 0.0;
};

struct ConformalVolume {
    double vc = 0.0;
    MobiusParam argmax;
    std::vector<VcTraceRow> trace;
    bool converged = true;
    std::string warning;
};

// Multi-start projected gradient ascent of a -> A(Psi_a o Phi) over the ball.
ConformalVolume conformal_volume(const GeometryFields& geo, const VcOptions& opts = {});
ConformalVolume conformal_volume(const Immersion& phi, const VcOptions& opts = {});

} // namespace ctl
