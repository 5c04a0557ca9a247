// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "ctl/constrained.hpp"
#include "ctl/geometry.hpp"
#include "ctl/moebius.hpp"
#include "ctl/perturbation.hpp"
#include "ctl/variation.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>

using namespace ctl;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// sup | |f| - c |: the sign of H and II follows the chosen normal.
double sup_abs_dev(const ScalarField& f, double c) {
    double m = 0.0;
    for (double x : f.values) m = std::max(m, std::abs(std::abs(x) - c));
    return m;
}

std::vector<std::pair<std::string, Immersion>> all_families() {
    const int n = 64;
    return {{"clifford", clifford_torus(n, n)},
            {"flat-cmc-0.3", flat_cmc_torus(0.3, n, n)},
            {"flat-cmc-0.6", flat_cmc_torus(0.6, n, n)},
            {"flat-cmc-0.8", flat_cmc_torus(0.8, n, n)},
            {"hopf-circle-1", hopf_torus_circle(1.0, n, n)},
            {"hopf-circle-0.5", hopf_torus_circle(0.5, n, n)},
            {"hopf-wobbly", hopf_torus_curve(wobbly_circle_curve(1.0, 0.05, 2, 256), n, n)},
            {"clifford-moebius", push_immersion(MobiusParam(Vec4(0.3, -0.1, 0.2, 0.0)), clifford_torus(n, n))}};
}

Vec4 random_ball(std::mt19937_64& rng, double r) {
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return r * std::pow(u(rng), 0.25) * Vec4(g(rng), g(rng), g(rng), g(rng)).normalized();
}

void ac1(Outcome& o) {
    Stopwatch sw;
    const GeometryFields geo = geometry(clifford_torus(64, 64));
    const double supH = geo.H.sup_norm(), A = area(geo), secs = sw.seconds();
    const double err = std::abs(A - 2 * oracle::pi * oracle::pi);
    o.detail << "max|H| = " << supH << ", |A - 2pi^2| = " << err << ", " << secs << " s";
    o.require(supH <= 1e-9, "max|H| <= 1e-9");
    o.require(err <= 1e-8, "A = 2 pi^2 +- 1e-8");
    o.require(secs < 1.0, "runtime < 1 s");
}

void ac2(Outcome& o) {
    double worst_H = 0.0, worst_rel = 0.0;
    for (double a : {0.3, 0.6, 0.8}) {
        const GeometryFields geo = geometry(flat_cmc_torus(a, 64, 64));
        worst_H = std::max(worst_H, sup_abs_dev(geo.H, std::abs(oracle::flat_cmc_H(a))));
        const Classification c = classify_theorem_I2(geo);
        o.require(c.bucket == Bucket::flat_cmc, "a = " + std::to_string(a) + " classified " + to_string(c.bucket));
        const CmcRelations r = cmc_relations_check(geo);
        o.require(!r.skipped, "relations skipped for a = " + std::to_string(a));
        worst_rel = std::max(worst_rel, r.max_residual());
    }
    o.detail << "sup|H - H(a)| = " << worst_H << ", relation residual = " << worst_rel;
    o.require(worst_H <= 1e-9, "H within 1e-9");
    o.require(worst_rel <= 1e-7, "relations <= 1e-7");
}

void ac3(Outcome& o) {
    const GeometryFields geo = geometry(hopf_torus_circle(1.0, 64, 64));
    const double s = geo.II12.mean() > 0 ? 1.0 : -1.0;
    const double lam = geo.lambda.sup_norm();
    const double dII = std::max({(s * geo.II11 - 2.0).sup_norm(), (s * geo.II12 - 1.0).sup_norm(), geo.II22.sup_norm()});
    const QFit fit = fit_Q(geo);
    const EllipticityReport e = ellipticity(geo, fit.Q);
    const double dQ = (e.two_Q_norm - 1.0 / std::sqrt(2.0)).sup_norm();
    const double r = ccms_residual(geo, fit.Q);
    o.detail << "sup|lambda| = " << lam << ", II error = " << dII << ", |2|Q|_g - 1/sqrt2| = " << dQ
             << ", " << to_string(e.classification) << ", ccms = " << r;
    o.require(lam <= 1e-10, "lambda = 0");
    o.require(dII <= 1e-8, "II = [[2,1],[1,0]]");
    o.require(dQ <= 1e-6, "2|Q|_g = 1/sqrt 2");
    o.require(e.classification == Ellipticity::strictly_elliptic, "strictly elliptic");
    o.require(r <= 1e-6, "ccms residual <= 1e-6");
}

void ac4(Outcome& o) {
    Stopwatch sw;
    double worst = 0.0;
    int runs = 0;
    const std::vector<std::pair<std::string, Immersion>> fams{{"clifford", clifford_torus(64, 64)},
                                                              {"flat-cmc-0.6", flat_cmc_torus(0.6, 64, 64)},
                                                              {"hopf-circle-1", hopf_torus_circle(1.0, 64, 64)}};
    for (const auto& [name, phi] : fams) {
        const GeometryFields geo = geometry(phi);
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            const VariationField w = decompose(geo, random_smooth_field(geo, seed));
            for (Formula f : {Formula::dn_dt, Formula::dH_dt, Formula::dII0, Formula::dvol, Formula::first_variation}) {
                const double e = fd_harness(geo, w, f).rel_err;
                if (e > 1e-5) o.require(false, name + " " + to_string(f) + " seed " + std::to_string(seed));
                worst = std::max(worst, e);
                ++runs;
            }
        }
    }
    const double secs = sw.seconds();
    o.detail << runs << " checks, worst rel_err = " << worst << ", " << secs << " s";
    o.require(secs < 60.0, "runtime < 60 s");
}

void ac5(Outcome& o) {
    double worst = 0.0;
    for (const auto& [name, phi] : all_families()) {
        const double r = codazzi_residual(geometry(phi)).sup_norm;
        if (r > 1e-8) o.require(false, name);
        worst = std::max(worst, r);
    }
    std::vector<double> r;
    for (int n : {32, 64, 128}) {
        const Immersion phi = hopf_torus_curve(wobbly_circle_curve(1.0, 0.05, 2, 256), n, n);
        r.push_back(codazzi_residual(geometry_of_points(phi.points, true, Scheme::fd2)).sup_norm);
    }
    const double p1 = oracle::order(r[0], r[1]), p2 = oracle::order(r[1], r[2]);
    o.detail << "spectral worst = " << worst << ", fd2 orders " << p1 << ", " << p2;
    o.require(p1 >= 1.9 && p2 >= 1.9, "fd2 order >= 1.9");
}

void ac6(Outcome& o) {
    double worst = 0.0;
    for (const auto& [name, phi] : all_families()) {
        const double r = liouville_residual(geometry(phi)).sup_norm();
        if (r > 1e-8) o.require(false, name);
        worst = std::max(worst, r);
    }
    o.detail << "worst residual = " << worst;
}

void ac7(Outcome& o) {
    std::mt19937_64 rng(2024);
    double w1 = 0.0, w2 = 0.0;
    // The constructor families at N = 64. The already pushed Clifford torus is
    // not a constructor family; composing a second transformation with it needs
    // N = 128 to be resolved, so it is checked there.
    auto fams = all_families();
    fams.back().second = push_immersion(MobiusParam(Vec4(0.3, -0.1, 0.2, 0.0)), clifford_torus(128, 128));
    for (const auto& [name, phi] : fams) {
        for (int t = 0; t < 20; ++t) {
            const MobiusParam a(random_ball(rng, 0.5));
            w1 = std::max(w1, check_lemma_V1(a, phi));
            w2 = std::max(w2, check_lemma_V2(a, phi));
        }
    }
    o.detail << "worst h0 law = " << w1 << ", worst H law = " << w2;
    o.require(w1 <= 1e-6, "h0 transformation <= 1e-6");
    o.require(w2 <= 1e-6, "H transformation <= 1e-6");
}

void ac8(Outcome& o) {
    Stopwatch sw;
    const ConformalVolume c = conformal_volume(clifford_torus(64, 64));
    const Immersion flat = flat_cmc_torus(0.6, 64, 64);
    const GeometryFields geo = geometry(flat);
    const ConformalVolume f = conformal_volume(geo);
    const double secs = sw.seconds();
    const double cell = geo.grid.lattice().cell_area() / double(geo.grid.size());
    std::vector<double> w(geo.grid.size());
    for (std::size_t k = 0; k < w.size(); ++k) w[k] = geo.dvol[k] * cell;
    const double brute = oracle::mobius_grid_max(flat.points.values, w, w.size());
    const double dc = std::abs(c.vc - 2 * oracle::pi * oracle::pi), df = std::abs(f.vc - brute);
    o.detail << "|vc - 2pi^2| = " << dc << ", |argmax| = " << c.argmax.a.norm() << ", flat CMC |vc - grid| = " << df
             << ", " << secs << " s";
    o.require(dc <= 1e-4, "Clifford vc");
    o.require(c.argmax.a.norm() <= 1e-3, "Clifford argmax");
    o.require(df <= 1e-3, "agreement with the grid oracle");
    o.require(secs < 120.0, "runtime < 120 s");
}

void ac9(Outcome& o) {
    double worst = 0.0;
    for (double tau : {0.3, 0.7, 1.0, 2.0, 3.0, 5.0})
        for (double k : {-1.7, -0.5, 0.0, 0.5, 1.5}) {
            const double q = F_chi(0.0, k / 4.0, chi_tau(standard_bump_1d(), tau));
            const double c = F_chi_tau_closed(standard_bump_1d(), tau, k);
            worst = std::max(worst, std::abs(q - c));
        }
    o.require(worst <= 1e-8, "closed form vs quadrature");
    int agree = 0;
    for (int s = 0; s < 20; ++s) {
        const double k = -2.0 + 4.0 * s / 19.0;
        // negativity attainable: some tau on a wide logarithmic scan gives F < 0
        bool negative = false;
        for (double tau = 1e-3; tau < 1e3; tau *= 1.05)
            if (F_chi_tau_closed(standard_bump_1d(), tau, k, 2001) < 0.0) negative = true;
        // the quadrature F at the predicted side of the threshold
        bool quad_ok = true;
        if (auto thr = negative_tau_threshold(k)) {
            const double tau = k > 1.0 ? 1.5 * *thr : *thr / 1.5;
            quad_ok = F_chi(0.0, k / 4.0, chi_tau(standard_bump_1d(), tau)) < 0.0;
        } else {
            const double tau = std::sqrt((1.0 + k) / (1.0 - k));
            quad_ok = F_chi(0.0, k / 4.0, chi_tau(standard_bump_1d(), tau)) >= 0.0;
        }
        if (negative == (std::abs(k) > 1.0) && quad_ok) ++agree;
    }
    o.detail << "closed form vs quadrature = " << worst << ", sign law holds at " << agree << "/20 sweep points";
    o.require(agree == 20, "sign law on the sweep");
}

void ac10(Outcome& o) {
    // unit norm and the eps^3 law on a non-isothermic base
    const GeometryFields wob = geometry(hopf_torus_curve(wobbly_circle_curve(1.0, 0.05, 2, 256), 256, 256));
    const TeichDirections dirs = teich_directions(wob);
    BumpSpec s;
    s.i0 = 40;
    s.j0 = 100;
    double unit = 0.0;
    std::vector<double> le, la;
    for (double e : {0.2, 0.1, 0.05}) {
        s.epsilon = e;
        s.t = 0.5 * e;
        const BumpFamily f = bump_family(wob, s, dirs);
        for (const Vec4& p : f.points.values) unit = std::max(unit, std::abs(p.norm() - 1.0));
        le.push_back(std::log(e));
        la.push_back(std::log(f.alpha0.norm()));
    }
    const double mx = (le[0] + le[1] + le[2]) / 3, my = (la[0] + la[1] + la[2]) / 3;
    double sxy = 0, sxx = 0;
    for (int i = 0; i < 3; ++i) {
        sxy += (le[i] - mx) * (la[i] - my);
        sxx += (le[i] - mx) * (le[i] - mx);
    }
    const double slope = sxy / sxx;
    // descent expansion on flat CMC 0.6 (isothermic: least-squares class correction)
    const GeometryFields geo = geometry(flat_cmc_torus(0.6, 256, 256));
    BumpSpec d;
    d.i0 = 64;
    d.j0 = 32;
    d.epsilon = 0.05;
    BumpOptions iso;
    iso.allow_isothermic = true;
    const DescentCheck dc = descent_expansion_check(geo, fit_Q(geo).Q, d, 0.5, iso);
    unit = std::max(unit, dc.unit_defect);
    o.detail << "sup||Phi| - 1| = " << unit << ", alpha0 slope = " << slope << ", descent rel_err = " << dc.rel_err;
    o.require(unit <= 1e-12, "unit norm");
    o.require(slope >= 2.7, "alpha0 slope >= 2.7");
    o.require(dc.rel_err <= 0.1, "descent rel_err <= 0.1");
}

void ac11(Outcome& o) {
    const GeometryFields geo = geometry(clifford_torus(64, 64));
    const QuadraticDifferential Q0{};
    const double v1 = second_variation(geo, Q0, normal_variation(geo, ScalarField(geo.grid, 1.0)));
    const double e1 = std::abs(v1 + 8 * oracle::pi * oracle::pi);
    const ScalarField a = decompose(geo, random_smooth_field(geo, 21)).v;
    const ScalarField b = decompose(geo, random_smooth_field(geo, 22)).v;
    const double sym = std::abs(second_variation_bilinear(geo, Q0, a, b) - second_variation_bilinear(geo, Q0, b, a));
    ScalarField s1(geo.grid), s2(geo.grid);
    for (std::size_t k = 0; k < geo.grid.size(); ++k) {
        s1[k] = std::sin(geo.grid.x1(k) + geo.grid.x2(k));
        s2[k] = 0.5 + std::cos(2 * geo.grid.x2(k));
    }
    const double tang = std::abs(second_variation(geo, Q0, decompose(geo, s1 * geo.d1 + s2 * geo.d2)));
    o.detail << "|Q(1) + 8pi^2| = " << e1 << ", asymmetry = " << sym << ", tangential = " << tang;
    o.require(e1 <= 1e-6, "-8 pi^2");
    o.require(sym <= 1e-9, "symmetry");
    o.require(tang <= 1e-10, "tangential 0");
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
        {"AC1 Clifford torus is minimal with area 2pi^2", ac1},
        {"AC2 flat CMC family", ac2},
        {"AC3 Hopf circle torus", ac3},
        {"AC4 variation formulas vs finite differences", ac4},
        {"AC5 Codazzi residual and fd2 order", ac5},
        {"AC6 Gauss equation residual", ac6},
        {"AC7 Moebius transformation laws", ac7},
        {"AC8 conformal volume", ac8},
        {"AC9 F_chi sign law", ac9},
        {"AC10 conformal-class bump family and descent", ac10},
        {"AC11 second variation", ac11},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        Outcome o;
        Stopwatch sw;
        try {
            run(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << " [exception: " << e.what() << "]";
        }
        std::printf("%s: %s (%s; %.2f s)\n", name.c_str(), o.pass ? "PASS" : "FAIL", o.detail.str().c_str(),
                    sw.seconds());
        std::fflush(stdout);
        if (!o.pass) ++failed;
    }
    std::printf("%d of %zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
