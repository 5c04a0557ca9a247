#include "ctl/grid.hpp"
#include "ctl/errors.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>

namespace ctl {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// FFTW plans are cached per shape.  Planning is not thread safe, execution
// through the new-array interface is, so only the lookup takes the lock.
struct PlanPair {
    fftw_plan forward;
    fftw_plan backward;
};

const PlanPair& plans_for(int n1, int n2) {
    static std::mutex mtx;
    static std::map<std::pair<int, int>, PlanPair> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find({n1, n2});
    if (it != cache.end()) return it->second;
    const int nc = n2 / 2 + 1;
    double* in = fftw_alloc_real(static_cast<std::size_t>(n1) * n2);
    fftw_complex* out = fftw_alloc_complex(static_cast<std::size_t>(n1) * nc);
    PlanPair p{};
    p.forward = fftw_plan_dft_r2c_2d(n1, n2, in, out, FFTW_ESTIMATE | FFTW_UNALIGNED);
    p.backward = fftw_plan_dft_c2r_2d(n1, n2, out, in, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(in);
    fftw_free(out);
    return cache.emplace(std::make_pair(n1, n2), p).first->second;
}

// Spectral d/du1 and d/du2 of a real periodic array; Nyquist modes are dropped
// because their odd derivative is not representable as a real field.
void spectral_lattice_gradient(const PeriodicGrid& g, const std::vector<double>& f,
                               std::vector<double>& du1, std::vector<double>& du2) {
    const int n1 = g.n1(), n2 = g.n2(), nc = n2 / 2 + 1;
    const PlanPair& p = plans_for(n1, n2);
    std::vector<cplx> spec(static_cast<std::size_t>(n1) * nc);
    std::vector<cplx> work(spec.size());
    std::vector<double> in(f);
    fftw_execute_dft_r2c(p.forward, in.data(), reinterpret_cast<fftw_complex*>(spec.data()));
    const double scale = 1.0 / (static_cast<double>(n1) * n2);
    du1.assign(g.size(), 0.0);
    du2.assign(g.size(), 0.0);
    for (int dir = 0; dir < 2; ++dir) {
        for (int i = 0; i < n1; ++i) {
            const int k1 = i <= n1 / 2 ? i : i - n1;
            for (int j = 0; j < nc; ++j) {
                const int k2 = j;
                const bool nyq = (dir == 0 && 2 * i == n1) || (dir == 1 && 2 * j == n2);
                const double k = dir == 0 ? k1 : k2;
                const std::size_t idx = static_cast<std::size_t>(i) * nc + j;
                work[idx] = nyq ? cplx(0.0, 0.0) : spec[idx] * cplx(0.0, kTwoPi * k * scale);
            }
        }
        std::vector<double>& out = dir == 0 ? du1 : du2;
        fftw_execute_dft_c2r(p.backward, reinterpret_cast<fftw_complex*>(work.data()), out.data());
    }
}

void fd2_lattice_gradient(const PeriodicGrid& g, const std::vector<double>& f,
                          std::vector<double>& du1, std::vector<double>& du2) {
    const int n1 = g.n1(), n2 = g.n2();
    du1.assign(g.size(), 0.0);
    du2.assign(g.size(), 0.0);
    for (int i = 0; i < n1; ++i) {
        const int ip = (i + 1) % n1, im = (i + n1 - 1) % n1;
        for (int j = 0; j < n2; ++j) {
            const int jp = (j + 1) % n2, jm = (j + n2 - 1) % n2;
            du1[g.index(i, j)] = (f[g.index(ip, j)] - f[g.index(im, j)]) * 0.5 * n1;
            du2[g.index(i, j)] = (f[g.index(i, jp)] - f[g.index(i, jm)]) * 0.5 * n2;
        }
    }
}

void chart_gradient(const PeriodicGrid& g, const std::vector<double>& f, Scheme s,
                    std::vector<double>& d1, std::vector<double>& d2) {
    std::vector<double> du1, du2;
    if (s == Scheme::spectral)
        spectral_lattice_gradient(g, f, du1, du2);
    else
        fd2_lattice_gradient(g, f, du1, du2);
    const auto& c = g.chain();
    d1.resize(g.size());
    d2.resize(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
        d1[k] = c[0][0] * du1[k] + c[0][1] * du2[k];
        d2[k] = c[1][0] * du1[k] + c[1][1] * du2[k];
    }
}

} // namespace

// ---------------------------------------------------------------- Lattice

Lattice::Lattice(cplx omega1, cplx omega2) : w1_(omega1), w2_(omega2) {
    if (std::abs(w1_) == 0.0 || std::abs(w2_) == 0.0)
        throw ConfigError("lattice periods must be non-zero");
    if ((w2_ / w1_).imag() <= 0.0)
        throw ConfigError("lattice must satisfy Im(omega2/omega1) > 0");
}

double Lattice::cell_area() const { return std::abs((std::conj(w1_) * w2_).imag()); }

Lattice Lattice::scaled(cplx inverse_factor) const {
    return Lattice(w1_ / inverse_factor, w2_ / inverse_factor);
}

// ----------------------------------------------------------- PeriodicGrid

PeriodicGrid::PeriodicGrid(const Lattice& lattice, int n1, int n2)
    : lattice_(lattice), n1_(n1), n2_(n2) {
    if (n1 < 8 || n2 < 8) throw ConfigError("grid needs at least 8 samples per direction");
    if (n1 % 2 != 0 || n2 % 2 != 0) throw ConfigError("grid sample counts must be even");
    // x = u1 w1 + u2 w2, so [dx1; dx2] = J [du1; du2] with J = [[Re w1, Re w2], [Im w1, Im w2]]
    // and (d/du) = J^T (d/dx)  =>  (d/dx) = J^{-T} (d/du).
    const double a = lattice.omega1().real(), b = lattice.omega2().real();
    const double c = lattice.omega1().imag(), d = lattice.omega2().imag();
    const double det = a * d - b * c;
    // J^{-1} = [[d, -b], [-c, a]] / det ; J^{-T} = [[d, -c], [-b, a]] / det
    chain_ = {{{d / det, -c / det}, {-b / det, a / det}}};
}

cplx PeriodicGrid::point(int i, int j) const {
    return (static_cast<double>(i) / n1_) * lattice_.omega1() +
           (static_cast<double>(j) / n2_) * lattice_.omega2();
}

void require_same_grid(const PeriodicGrid& a, const PeriodicGrid& b, const char* what) {
    if (a != b) throw DimensionError(std::string("grid mismatch in ") + what);
}

// ------------------------------------------------------------ ScalarField

ScalarField::ScalarField(const PeriodicGrid& g, double fill) : grid(g), values(g.size(), fill) {}

ScalarField::ScalarField(const PeriodicGrid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (values.size() != g.size()) throw DimensionError("scalar field size differs from grid size");
}

ScalarField ScalarField::from(const PeriodicGrid& g, const std::function<double(double, double)>& f) {
    ScalarField r(g);
    for (int i = 0; i < g.n1(); ++i)
        for (int j = 0; j < g.n2(); ++j) {
            const cplx z = g.point(i, j);
            r.values[g.index(i, j)] = f(z.real(), z.imag());
        }
    return r;
}

ScalarField ScalarField::map(const std::function<double(double)>& f) const {
    ScalarField r(grid);
    std::transform(values.begin(), values.end(), r.values.begin(), f);
    return r;
}

double ScalarField::sup_norm() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}
double ScalarField::max() const { return *std::max_element(values.begin(), values.end()); }
double ScalarField::min() const { return *std::min_element(values.begin(), values.end()); }
double ScalarField::mean() const {
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

ScalarField& ScalarField::operator+=(const ScalarField& o) {
    require_same_grid(grid, o.grid, "field addition");
    for (std::size_t k = 0; k < values.size(); ++k) values[k] += o.values[k];
    return *this;
}
ScalarField& ScalarField::operator-=(const ScalarField& o) {
    require_same_grid(grid, o.grid, "field subtraction");
    for (std::size_t k = 0; k < values.size(); ++k) values[k] -= o.values[k];
    return *this;
}
ScalarField& ScalarField::operator*=(const ScalarField& o) {
    require_same_grid(grid, o.grid, "field product");
    for (std::size_t k = 0; k < values.size(); ++k) values[k] *= o.values[k];
    return *this;
}
ScalarField& ScalarField::operator*=(double s) {
    for (double& v : values) v *= s;
    return *this;
}
ScalarField& ScalarField::operator+=(double s) {
    for (double& v : values) v += s;
    return *this;
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(ScalarField a, const ScalarField& b) { return a *= b; }
ScalarField operator/(ScalarField a, const ScalarField& b) {
    require_same_grid(a.grid, b.grid, "field quotient");
    for (std::size_t k = 0; k < a.values.size(); ++k) a.values[k] /= b.values[k];
    return a;
}
ScalarField operator*(double s, ScalarField a) { return a *= s; }
ScalarField operator*(ScalarField a, double s) { return a *= s; }
ScalarField operator+(ScalarField a, double s) { return a += s; }
ScalarField operator+(double s, ScalarField a) { return a += s; }
ScalarField operator-(ScalarField a, double s) { return a += -s; }
ScalarField operator-(double s, ScalarField a) {
    for (double& v : a.values) v = s - v;
    return a;
}
ScalarField operator-(ScalarField a) { return a *= -1.0; }
ScalarField exp(const ScalarField& a) { return a.map([](double v) { return std::exp(v); }); }
ScalarField log(const ScalarField& a) { return a.map([](double v) { return std::log(v); }); }
ScalarField sqrt(const ScalarField& a) { return a.map([](double v) { return std::sqrt(v); }); }
ScalarField abs(const ScalarField& a) { return a.map([](double v) { return std::abs(v); }); }

// ----------------------------------------------------------- VectorField4

VectorField4::VectorField4(const PeriodicGrid& g) : grid(g), values(g.size(), Vec4::Zero()) {}

VectorField4::VectorField4(const PeriodicGrid& g, std::vector<Vec4> v) : grid(g), values(std::move(v)) {
    if (values.size() != g.size()) throw DimensionError("vector field size differs from grid size");
}

ScalarField VectorField4::component(int c) const {
    ScalarField r(grid);
    for (std::size_t k = 0; k < values.size(); ++k) r.values[k] = values[k][c];
    return r;
}

void VectorField4::set_component(int c, const ScalarField& f) {
    require_same_grid(grid, f.grid, "set_component");
    for (std::size_t k = 0; k < values.size(); ++k) values[k][c] = f.values[k];
}

double VectorField4::sup_norm() const {
    double m = 0.0;
    for (const auto& v : values) m = std::max(m, v.norm());
    return m;
}

VectorField4 operator+(VectorField4 a, const VectorField4& b) {
    require_same_grid(a.grid, b.grid, "vector addition");
    for (std::size_t k = 0; k < a.values.size(); ++k) a.values[k] += b.values[k];
    return a;
}
VectorField4 operator-(VectorField4 a, const VectorField4& b) {
    require_same_grid(a.grid, b.grid, "vector subtraction");
    for (std::size_t k = 0; k < a.values.size(); ++k) a.values[k] -= b.values[k];
    return a;
}
VectorField4 operator*(const ScalarField& s, VectorField4 a) {
    require_same_grid(a.grid, s.grid, "scalar-vector product");
    for (std::size_t k = 0; k < a.values.size(); ++k) a.values[k] *= s.values[k];
    return a;
}
VectorField4 operator*(double s, VectorField4 a) {
    for (auto& v : a.values) v *= s;
    return a;
}
ScalarField dot(const VectorField4& a, const VectorField4& b) {
    require_same_grid(a.grid, b.grid, "dot");
    ScalarField r(a.grid);
    for (std::size_t k = 0; k < a.values.size(); ++k) r.values[k] = a.values[k].dot(b.values[k]);
    return r;
}
ScalarField norm(const VectorField4& a) {
    ScalarField r(a.grid);
    for (std::size_t k = 0; k < a.values.size(); ++k) r.values[k] = a.values[k].norm();
    return r;
}

// ---------------------------------------------------------------- calculus

std::pair<ScalarField, ScalarField> gradient(const ScalarField& f, Scheme s) {
    std::vector<double> d1, d2;
    chart_gradient(f.grid, f.values, s, d1, d2);
    return {ScalarField(f.grid, std::move(d1)), ScalarField(f.grid, std::move(d2))};
}

std::pair<VectorField4, VectorField4> gradient(const VectorField4& f, Scheme s) {
    VectorField4 g1(f.grid), g2(f.grid);
    for (int c = 0; c < 4; ++c) {
        auto [a, b] = gradient(f.component(c), s);
        g1.set_component(c, a);
        g2.set_component(c, b);
    }
    return {std::move(g1), std::move(g2)};
}

ScalarField derivative(const ScalarField& f, Direction d, Scheme s) {
    auto g = gradient(f, s);
    return d == Direction::x1 ? std::move(g.first) : std::move(g.second);
}

VectorField4 derivative(const VectorField4& f, Direction d, Scheme s) {
    auto g = gradient(f, s);
    return d == Direction::x1 ? std::move(g.first) : std::move(g.second);
}

ScalarField laplacian(const ScalarField& f, Scheme s) {
    auto [f1, f2] = gradient(f, s);
    return derivative(f1, Direction::x1, s) + derivative(f2, Direction::x2, s);
}

double integrate(const ScalarField& f, const ScalarField& weight) {
    require_same_grid(f.grid, weight.grid, "integrate");
    double acc = 0.0;
    for (std::size_t k = 0; k < f.values.size(); ++k) acc += f.values[k] * weight.values[k];
    return acc / static_cast<double>(f.values.size()) * f.grid.lattice().cell_area();
}

double integrate(const ScalarField& f) { return f.mean() * f.grid.lattice().cell_area(); }

} // namespace ctl
