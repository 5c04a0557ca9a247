#pragma once

// Immersions of the torus into S^3 sampled on a periodic grid, the explicit
// solution families (product tori, Hopf tori) and the CTL1 file format.

#include "ctl/grid.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace ctl {

using Vec3 = Eigen::Vector3d;

struct Immersion {
    PeriodicGrid grid;
    VectorField4 points;
    bool conformal = false;

    // Validates |Phi| = 1 within `unit_tol` at every sample.
    Immersion(VectorField4 pts, bool conformal, double unit_tol = 1e-10);
};

// A closed curve on the unit sphere S^2, sampled uniformly in arclength.
// `samples` holds m+1 points, the last one repeating the first.
struct CurveOnS2 {
    std::vector<Vec3> samples;
    double length = 0.0;
    double enclosed_area = 0.0; // spherical area to the left of the curve
    double curvature_energy = 0.0; // integral of kappa_g^2 along the curve (diagnostic)
};

// Builds a CurveOnS2 from m+1 arclength-uniform samples (last ~ first).
CurveOnS2 make_curve(std::vector<Vec3> samples);
// Resamples a smooth closed parametrization c(u), u in [0, period), uniformly in arclength.
CurveOnS2 curve_from_parametrization(const std::function<Vec3(double)>& c, double period, int m);
// Circle of geodesic curvature kappa0 around the north pole, counter-clockwise.
CurveOnS2 circle_curve(double kappa0, int m);
// Closed curve with polar angle rho(phi) = arccot(kappa0) + amp cos(lobes phi).
CurveOnS2 wobbly_circle_curve(double kappa0, double amp, int lobes, int m);

// (cos x1, sin x1, cos x2, sin x2)/sqrt(2) on the 2 pi x 2 pi square, lambda = -log(2)/2.
Immersion clifford_torus(int n1, int n2);
// Product torus a S^1 x sqrt(1-a^2) S^1 in arclength coordinates (lambda = 0).
Immersion flat_cmc_torus(double a, int n1, int n2);
// Hopf torus over the circle of geodesic curvature kappa0, closed form, lambda = 0.
Immersion hopf_torus_circle(double kappa0, int n1, int n2);
// How the horizontal lift is obtained: a global section corrected by the gauge
// phase integrated spectrally (default), or fixed-step RK4 on the horizontality
// ODE with `substeps` steps per grid interval (kept as an independent cross-check).
enum class HopfLift { spectral, rk4 };

// Hopf torus over an arbitrary closed curve. The lattice is (L/2, -holonomy) and
// (0, 2 pi); the closed-form circle family is reproduced sample by sample.
Immersion hopf_torus_curve(const CurveOnS2& curve, int n1, int n2,
                           HopfLift method = HopfLift::spectral, int substeps = 8);

struct WeakImmersionReport {
    double lipschitz_bound = 0.0;        // max |d Phi| (operator norm)
    double nondegeneracy_constant = 0.0; // best C with C^-1 g0 <= g <= C g0
    double min_det_g = 0.0;
    double gauss_map_energy = 0.0;       // integral of |d n|^2
    // smallest Gram determinant of the forward edge differences of a grid cell,
    // relative to its mean; zero when adjacent samples coincide
    double min_cell_det_ratio = 0.0;
    bool nondegenerate = true;
    bool ok = true;
};
WeakImmersionReport validate_weak_immersion(const Immersion& phi, Scheme s = Scheme::spectral);

// CTL1 binary format (little endian): "CTL1", u32 n1, u32 n2, 4 x f64 lattice,
// u8 conformal flag, then n1*n2 records of 4 x f64 in row-major order.
std::vector<std::uint8_t> serialize(const Immersion& phi);
Immersion deserialize(const std::vector<std::uint8_t>& bytes);
void write_immersion(const std::string& path, const Immersion& phi,
                     const std::map<std::string, std::string>& metadata = {});
Immersion read_immersion(const std::string& path);
// Sidecar "<path>.meta" with key = value lines; empty when absent.
std::map<std::string, std::string> read_metadata(const std::string& path);

} // namespace ctl
