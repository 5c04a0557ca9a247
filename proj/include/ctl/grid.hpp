#pragma once

// Periodic sampling of a flat torus C / (omega1 Z + omega2 Z) together with the
// calculus kernel (spectral or second-order differences, trapezoid quadrature)
// used by every other part of the toolkit.

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <functional>
#include <utility>
#include <vector>

namespace ctl {

using Vec4 = Eigen::Vector4d;
using cplx = std::complex<double>;

enum class Scheme { spectral, fd2 };
enum class Direction { x1, x2 };

class Lattice {
public:
    Lattice(cplx omega1, cplx omega2);

    cplx omega1() const { return w1_; }
    cplx omega2() const { return w2_; }
    // |Im(conj(omega1) * omega2)|, the area of the fundamental parallelogram.
    double cell_area() const;
    // The same lattice seen in the chart w = z / c (used for chart normalizations).
    Lattice scaled(cplx inverse_factor) const;

    bool operator==(const Lattice& o) const { return w1_ == o.w1_ && w2_ == o.w2_; }

private:
    cplx w1_, w2_;
};

class PeriodicGrid {
public:
    PeriodicGrid(const Lattice& lattice, int n1, int n2);

    const Lattice& lattice() const { return lattice_; }
    int n1() const { return n1_; }
    int n2() const { return n2_; }
    std::size_t size() const { return static_cast<std::size_t>(n1_) * n2_; }
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * n2_ + j; }
    // Position (i/n1) omega1 + (j/n2) omega2 in the flat chart.
    cplx point(int i, int j) const;
    double x1(std::size_t k) const { return point(int(k / n2_), int(k % n2_)).real(); }
    double x2(std::size_t k) const { return point(int(k / n2_), int(k % n2_)).imag(); }

    // d/dx_d = chain[d][0] d/du1 + chain[d][1] d/du2, where u are the lattice
    // coordinates in [0,1)^2.
    const std::array<std::array<double, 2>, 2>& chain() const { return chain_; }

    bool operator==(const PeriodicGrid& o) const {
        return n1_ == o.n1_ && n2_ == o.n2_ && lattice_ == o.lattice_;
    }
    bool operator!=(const PeriodicGrid& o) const { return !(*this == o); }

private:
    Lattice lattice_;
    int n1_, n2_;
    std::array<std::array<double, 2>, 2> chain_;
};

struct ScalarField {
    PeriodicGrid grid;
    std::vector<double> values;

    explicit ScalarField(const PeriodicGrid& g, double fill = 0.0);
    ScalarField(const PeriodicGrid& g, std::vector<double> v);
    static ScalarField from(const PeriodicGrid& g, const std::function<double(double, double)>& f);

    std::size_t size() const { return values.size(); }
    double& operator[](std::size_t k) { return values[k]; }
    double operator[](std::size_t k) const { return values[k]; }

    ScalarField map(const std::function<double(double)>& f) const;
    double sup_norm() const;
    double max() const;
    double min() const;
    double mean() const;

    ScalarField& operator+=(const ScalarField& o);
    ScalarField& operator-=(const ScalarField& o);
    ScalarField& operator*=(const ScalarField& o);
    ScalarField& operator*=(double s);
    ScalarField& operator+=(double s);
};

struct VectorField4 {
    PeriodicGrid grid;
    std::vector<Vec4> values;

    explicit VectorField4(const PeriodicGrid& g);
    VectorField4(const PeriodicGrid& g, std::vector<Vec4> v);

    std::size_t size() const { return values.size(); }
    Vec4& operator[](std::size_t k) { return values[k]; }
    const Vec4& operator[](std::size_t k) const { return values[k]; }

    ScalarField component(int c) const;
    void set_component(int c, const ScalarField& f);
    double sup_norm() const; // max over samples of the Euclidean norm
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(ScalarField a, const ScalarField& b);
ScalarField operator/(ScalarField a, const ScalarField& b);
ScalarField operator*(double s, ScalarField a);
ScalarField operator*(ScalarField a, double s);
ScalarField operator+(ScalarField a, double s);
ScalarField operator+(double s, ScalarField a);
ScalarField operator-(ScalarField a, double s);
ScalarField operator-(double s, ScalarField a);
ScalarField operator-(ScalarField a);
ScalarField exp(const ScalarField& a);
ScalarField log(const ScalarField& a);
ScalarField sqrt(const ScalarField& a);
ScalarField abs(const ScalarField& a);

VectorField4 operator+(VectorField4 a, const VectorField4& b);
VectorField4 operator-(VectorField4 a, const VectorField4& b);
VectorField4 operator*(const ScalarField& s, VectorField4 a);
VectorField4 operator*(double s, VectorField4 a);
ScalarField dot(const VectorField4& a, const VectorField4& b);
ScalarField norm(const VectorField4& a);

// Partial derivative along the chart coordinate x1 or x2.
ScalarField derivative(const ScalarField& f, Direction d, Scheme s = Scheme::spectral);
VectorField4 derivative(const VectorField4& f, Direction d, Scheme s = Scheme::spectral);
// Both partials with a single forward transform.
std::pair<ScalarField, ScalarField> gradient(const ScalarField& f, Scheme s = Scheme::spectral);
std::pair<VectorField4, VectorField4> gradient(const VectorField4& f, Scheme s = Scheme::spectral);
ScalarField laplacian(const ScalarField& f, Scheme s = Scheme::spectral);

// Periodic trapezoid rule for the integral of f * weight over a fundamental domain.
double integrate(const ScalarField& f, const ScalarField& weight);
double integrate(const ScalarField& f);

void require_same_grid(const PeriodicGrid& a, const PeriodicGrid& b, const char* what);

} // namespace ctl
