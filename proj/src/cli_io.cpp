#include "ctl/cli_io.hpp"
#include "ctl/constrained.hpp"
#include "ctl/errors.hpp"
#include "ctl/moebius.hpp"
#include "ctl/perturbation.hpp"
#include "ctl/variation.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ctl {

// ------------------------------------------------------------------ writers

std::string fmt(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(std::vector<std::string> row) {
    if (row.size() != header_.size()) throw DimensionError("CSV row width does not match the header");
    rows_.push_back(std::move(row));
}

void CsvTable::write(std::ostream& os) const {
    auto line = [&os](const std::vector<std::string>& r) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << csv_escape(r[i]);
        os << "\r\n";
    };
    line(header_);
    for (const auto& r : rows_) line(r);
}

void CsvTable::write(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot open " + path + " for writing");
    write(f);
}

std::string Report::str() const {
    std::ostringstream os;
    os << "# ctl " << command << "\n[config]\n" << config;
    if (!config.empty() && config.back() != '\n') os << '\n';
    os << "[result]\n";
    for (const auto& [k, v] : values) os << k << " = " << v << '\n';
    os << "status = " << (pass ? "pass" : "fail") << '\n';
    return os.str();
}

std::vector<Vec3> read_curve_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw InputError("cannot open curve file " + path);
    std::vector<Vec3> pts;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream is(line);
        Vec3 p;
        std::string extra;
        if (!(is >> p[0] >> p[1] >> p[2]) || (is >> extra))
            throw InputError(path + ":" + std::to_string(lineno) + ": expected three numbers");
        pts.push_back(p);
    }
    return pts;
}

const std::vector<std::string>& plot_quantities() {
    static const std::vector<std::string> q{"lambda", "H", "H0_re", "H0_im", "K", "dvol", "two_Q_norm",
                                            "ccms_residual", "liouville", "codazzi1", "codazzi2"};
    return q;
}

void apply_thread_limit() {
#ifdef _OPENMP
    if (const char* s = std::getenv("CTL_THREADS")) {
        char* end = nullptr;
        const long n = std::strtol(s, &end, 10);
        if (end != s && *end == '\0' && n > 0) omp_set_num_threads(int(std::min<long>(n, omp_get_max_threads())));
    }
#endif
}

namespace {

// ----------------------------------------------------------------- options

struct Common {
    std::string in;
    std::string scheme = "spectral";
    std::string report; // empty: standard output
    std::string csv;

    Scheme sch() const { return scheme == "fd2" ? Scheme::fd2 : Scheme::spectral; }
};

struct GenOpts {
    std::string family, out;
    double a = 0.6, kappa = 1.0, amp = 0.05;
    int lobes = 2, n = 64, n2 = 0, curve_samples = 256;
    std::string curve, lift = "spectral";
};

struct GeomOpts { Common c; double tol = 1e-6; };
struct FitOpts { Common c; double minimal_tol = 1e-8, fit_tol = 1e-6, band = 1e-6; };
struct ClassifyOpts { Common c; };
struct VcOpts { Common c; VcOptions vc; };
struct SecondVarOpts {
    Common c;
    std::string field = "normal-one";
    int mode = 1, fd_samples = 0;
    std::uint64_t seed = 7;
    double gate = 1e-5, fd_tol = 1e-5;
};
struct MobiusOpts {
    Common c;
    std::vector<double> a{0.3, 0.0, 0.0, 0.0};
    int random = 0;
    double radius = 0.5, tol = 1e-6;
    std::uint64_t seed = 11;
};
struct DescentOpts {
    Common c;
    std::vector<int> x0{0, 0};
    std::vector<double> eps{0.2, 0.1, 0.05};
    double delta = 0.5, tau = 3.0, tol = 0.1, mobius_radius = 0.2;
    std::string profile = "radial";
    bool allow_isothermic = false;
    int mobius_samples = 0;
    std::uint64_t seed = 13;
};
struct PlotOpts { Common c; std::string quantity; };

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("input", c.in, "CTL1 immersion file")->required();
    sub->add_option("--scheme", c.scheme, "derivative scheme")
        ->check(CLI::IsMember({"spectral", "fd2"}))
        ->capture_default_str();
    sub->add_option("--report", c.report, "write the text report here (default: standard output)");
    sub->add_option("--csv", c.csv, "write the CSV table here");
}

const CLI::Validator even_resolution =
    CLI::Validator([](std::string& s) -> std::string {
        int v = 0;
        try {
            v = std::stoi(s);
        } catch (...) {
            return "not an integer: " + s;
        }
        if (v < 8 || v % 2) return "resolution must be even and >= 8";
        return {};
    }, "EVEN>=8");

void emit(const Report& r, const Common& c, std::ostream& out) {
    if (c.report.empty()) {
        out << r.str();
        return;
    }
    std::ofstream f(c.report);
    if (!f) throw InputError("cannot open " + c.report + " for writing");
    f << r.str();
}

void emit_csv(const CsvTable& t, const Common& c) {
    if (!c.csv.empty()) t.write(c.csv);
}

std::string vec_str(const Vec4& v) {
    return fmt(v[0]) + "," + fmt(v[1]) + "," + fmt(v[2]) + "," + fmt(v[3]);
}

// --------------------------------------------------------------- commands

int cmd_gen(const GenOpts& o, const std::string& config, std::ostream& out) {
    const int n1 = o.n, n2 = o.n2 > 0 ? o.n2 : o.n;
    std::map<std::string, std::string> meta{{"family", o.family}, {"n1", std::to_string(n1)},
                                            {"n2", std::to_string(n2)}};
    const HopfLift lift = o.lift == "rk4" ? HopfLift::rk4 : HopfLift::spectral;
    auto make = [&]() -> Immersion {
        if (o.family == "clifford") return clifford_torus(n1, n2);
        if (o.family == "flat-cmc") {
            meta["a"] = fmt(o.a);
            return flat_cmc_torus(o.a, n1, n2);
        }
        if (o.family == "hopf-circle") {
            meta["kappa"] = fmt(o.kappa);
            return hopf_torus_circle(o.kappa, n1, n2);
        }
        if (o.family == "hopf-wobbly") {
            meta["kappa"] = fmt(o.kappa);
            meta["amp"] = fmt(o.amp);
            meta["lobes"] = std::to_string(o.lobes);
            return hopf_torus_curve(wobbly_circle_curve(o.kappa, o.amp, o.lobes, o.curve_samples), n1, n2, lift);
        }
        if (o.curve.empty()) throw ConfigError("hopf-curve needs --curve FILE");
        meta["curve"] = o.curve;
        return hopf_torus_curve(make_curve(read_curve_file(o.curve)), n1, n2, lift);
    };
    const Immersion phi = make();
    write_immersion(o.out, phi, meta);
    const GeometryFields geo = geometry(phi);
    Report r{"gen", config, {}, true};
    r.add("family", o.family);
    r.add("file", o.out);
    r.add("n1", std::to_string(n1));
    r.add("n2", std::to_string(n2));
    r.add("area", area(geo));
    r.add("conformality_defect", geo.conformality_defect);
    out << r.str();
    return exit_pass;
}

int cmd_geom(const GeomOpts& o, const std::string& config, std::ostream& out) {
    const Immersion phi = read_immersion(o.c.in);
    const GeometryFields geo = geometry(phi, o.c.sch());
    const double codazzi = codazzi_residual(geo).sup_norm;
    const ScalarField liou = liouville_residual(geo);
    const ScalarField K = gauss_curvature(geo);
    const WeakImmersionReport weak = validate_weak_immersion(phi, o.c.sch());
    Report r{"geom", config, {}, true};
    r.add("n1", std::to_string(geo.grid.n1()));
    r.add("n2", std::to_string(geo.grid.n2()));
    r.add("omega1", fmt(geo.grid.lattice().omega1().real()) + "," + fmt(geo.grid.lattice().omega1().imag()));
    r.add("omega2", fmt(geo.grid.lattice().omega2().real()) + "," + fmt(geo.grid.lattice().omega2().imag()));
    r.add("conformal", phi.conformal ? "true" : "false");
    r.add("conformality_defect", geo.conformality_defect);
    r.add("area", area(geo));
    r.add("lambda_min", geo.lambda.min());
    r.add("lambda_max", geo.lambda.max());
    r.add("H_min", geo.H.min());
    r.add("H_max", geo.H.max());
    r.add("sup_H", geo.H.sup_norm());
    r.add("II11_mean", geo.II11.mean());
    r.add("II12_mean", geo.II12.mean());
    r.add("II22_mean", geo.II22.mean());
    r.add("II_oscillation", std::max({(geo.II11 - geo.II11.mean()).sup_norm(), (geo.II12 - geo.II12.mean()).sup_norm(),
                                      (geo.II22 - geo.II22.mean()).sup_norm()}));
    r.add("K_mean", K.mean());
    r.add("codazzi_residual", codazzi);
    r.add("liouville_residual", liou.sup_norm());
    r.add("min_det_g", weak.min_det_g);
    r.add("gauss_map_energy", weak.gauss_map_energy);
    r.add("weak_immersion_ok", weak.ok ? "true" : "false");
    r.pass = weak.ok && codazzi <= o.tol && (!phi.conformal || liou.sup_norm() <= o.tol);
    emit(r, o.c, out);
    CsvTable t({"x1", "x2", "lambda", "H", "H0_re", "H0_im", "K", "dvol"});
    for (std::size_t k = 0; k < geo.grid.size(); ++k)
        t.add_row({fmt(geo.grid.x1(k)), fmt(geo.grid.x2(k)), fmt(geo.lambda[k]), fmt(geo.H[k]), fmt(geo.H0_re[k]),
                   fmt(geo.H0_im[k]), fmt(K[k]), fmt(geo.dvol[k])});
    emit_csv(t, o.c);
    return r.pass ? exit_pass : exit_fail;
}

int cmd_fitq(const FitOpts& o, const std::string& config, std::ostream& out) {
    const GeometryFields geo = geometry(read_immersion(o.c.in), o.c.sch());
    const QFit fit = fit_Q(geo, o.minimal_tol, o.fit_tol);
    const EllipticityReport ell = ellipticity(geo, fit.Q, o.band);
    const ScalarField model = re_Q_h0(geo, fit.Q);
    Report r{"fitq", config, {}, true};
    r.add("q1", fit.Q.q1);
    r.add("q2", fit.Q.q2);
    r.add("abs_Q", std::abs(fit.Q.value()));
    r.add("minimal", fit.minimal ? "true" : "false");
    r.add("rank", std::to_string(fit.rank));
    r.add("degenerate", fit.degenerate ? "true" : "false");
    r.add("rel_residual", fit.rel_residual);
    r.add("ccms_residual", ccms_residual(geo, fit.Q));
    r.add("two_Q_norm_min", ell.two_Q_norm.min());
    r.add("two_Q_norm_max", ell.two_Q_norm.max());
    r.add("ellipticity", to_string(ell.classification));
    if (!fit.message.empty()) r.add("message", fit.message);
    r.pass = fit.minimal || fit.rel_residual <= o.fit_tol;
    emit(r, o.c, out);
    CsvTable t({"x1", "x2", "H", "re_Q_h0", "residual", "two_Q_norm"});
    for (std::size_t k = 0; k < geo.grid.size(); ++k)
        t.add_row({fmt(geo.grid.x1(k)), fmt(geo.grid.x2(k)), fmt(geo.H[k]), fmt(model[k]),
                   fmt(fit.residual[k]), fmt(ell.two_Q_norm[k])});
    emit_csv(t, o.c);
    return r.pass ? exit_pass : exit_fail;
}

int cmd_classify(const ClassifyOpts& o, const std::string& config, std::ostream& out) {
    const GeometryFields geo = geometry(read_immersion(o.c.in), o.c.sch());
    const Classification c = classify_theorem_I2(geo);
    Report r{"classify", config, {}, true};
    r.add("bucket", to_string(c.bucket));
    r.add("q1", c.fit.Q.q1);
    r.add("q2", c.fit.Q.q2);
    r.add("rel_residual", c.fit.rel_residual);
    r.add("ccms_residual", c.ccms);
    r.add("isothermic", c.isothermic.is_isothermic ? "true" : "false");
    r.add("isothermic_residual", c.isothermic.residual);
    if (c.isothermic.theta) r.add("isothermic_theta", *c.isothermic.theta);
    r.add("sup_H", c.sup_H);
    r.add("H_oscillation", c.H_oscillation);
    r.add("K_mean", c.K_mean);
    r.add("K_oscillation", c.K_oscillation);
    r.add("liouville_residual", c.liouville);
    if (c.bucket == Bucket::flat_cmc) {
        const CmcRelations cmc = cmc_relations_check(geo);
        r.add("cmc_relations_max_residual", cmc.skipped ? std::string("skipped: ") + cmc.note : fmt(cmc.max_residual()));
    }
    if (c.bucket == Bucket::flat_cmc || c.bucket == Bucket::constrained_only) {
        const EllipticityReport ell = ellipticity(geo, c.fit.Q);
        r.add("ellipticity", to_string(ell.classification));
    }
    r.pass = c.bucket != Bucket::not_constrained;
    emit(r, o.c, out);
    CsvTable t({"bucket", "q1", "q2", "rel_residual", "ccms_residual", "isothermic", "sup_H", "K_mean"});
    t.add_row({to_string(c.bucket), fmt(c.fit.Q.q1), fmt(c.fit.Q.q2), fmt(c.fit.rel_residual), fmt(c.ccms),
               c.isothermic.is_isothermic ? "true" : "false", fmt(c.sup_H), fmt(c.K_mean)});
    emit_csv(t, o.c);
    return r.pass ? exit_pass : exit_fail;
}

int cmd_vc(const VcOpts& o, const std::string& config, std::ostream& out) {
    const GeometryFields geo = geometry(read_immersion(o.c.in), o.c.sch());
    const ConformalVolume v = conformal_volume(geo, o.vc);
    Report r{"vc", config, {}, true};
    r.add("area", area(geo));
    r.add("vc", v.vc);
    r.add("argmax", vec_str(v.argmax.a));
    r.add("argmax_norm", v.argmax.a.norm());
    r.add("converged", v.converged ? "true" : "false");
    if (!v.warning.empty()) r.add("warning", v.warning);
    r.pass = v.converged;
    emit(r, o.c, out);
    CsvTable t({"start", "iter", "value", "a_norm", "grad_norm"});
    for (const auto& row : v.trace)
        t.add_row({std::to_string(row.start), std::to_string(row.iter), fmt(row.value), fmt(row.a_norm),
                   fmt(row.grad_norm)});
    emit_csv(t, o.c);
    return r.pass ? exit_pass : exit_fail;
}

int cmd_secondvar(const SecondVarOpts& o, const std::string& config, std::ostream& out) {
    const GeometryFields geo = geometry(read_immersion(o.c.in), o.c.sch());
    const QFit fit = fit_Q(geo);
    VariationField w = [&] {
        if (o.field == "random") return decompose(geo, random_smooth_field(geo, o.seed));
        if (o.field == "tangential") return decompose(geo, geo.d1);
        ScalarField v(geo.grid, 1.0);
        if (o.field == "normal-cos")
            for (std::size_t k = 0; k < geo.grid.size(); ++k) v[k] = std::cos(o.mode * geo.grid.x1(k));
        return normal_variation(geo, v);
    }();
    Report r{"secondvar", config, {}, true};
    r.add("q1", fit.Q.q1);
    r.add("q2", fit.Q.q2);
    r.add("ccms_residual", ccms_residual(geo, fit.Q));
    r.add("second_variation", second_variation(geo, fit.Q, w, o.gate));
    CsvTable t({"sample", "formula", "rel_err"});
    if (o.fd_samples > 0) {
        double worst = 0.0;
        for (int s = 0; s < o.fd_samples; ++s) {
            const VariationField ws = decompose(geo, random_smooth_field(geo, o.seed + 1 + s));
            for (Formula f : {Formula::dn_dt, Formula::dH_dt, Formula::dII0, Formula::dvol, Formula::first_variation}) {
                const FdReport fd = fd_harness(geo, ws, f);
                worst = std::max(worst, fd.rel_err);
                t.add_row({std::to_string(s), to_string(f), fmt(fd.rel_err)});
            }
        }
        r.add("fd_worst_rel_err", worst);
        r.pass = worst <= o.fd_tol;
    }
    emit(r, o.c, out);
    emit_csv(t, o.c);
    return r.pass ? exit_pass : exit_fail;
}

int cmd_mobius(const MobiusOpts& o, const std::string& config, std::ostream& out) {
    const Immersion phi = read_immersion(o.c.in);
    if (o.a.size() != 4) throw ConfigError("--a needs four comma-separated components");
    std::vector<Vec4> as{Vec4(o.a[0], o.a[1], o.a[2], o.a[3])};
    std::mt19937_64 rng(o.seed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < o.random; ++i) {
        Vec4 d(g(rng), g(rng), g(rng), g(rng));
        as.push_back(o.radius * std::pow(u(rng), 0.25) * d.normalized());
    }
    const GeometryFields geo = geometry(phi, o.c.sch());
    Report r{"mobius-check", config, {}, true};
    CsvTable t({"a1", "a2", "a3", "a4", "lemma_V1", "lemma_V2", "area_pushed", "area_weighted"});
    double w1 = 0.0, w2 = 0.0;
    for (std::size_t i = 0; i < as.size(); ++i) {
        const MobiusParam p(as[i]);
        const double v1 = check_lemma_V1(p, phi, o.c.sch()), v2 = check_lemma_V2(p, phi, o.c.sch());
        const double pushed = area(geometry_of_points(push_immersion(p, phi).points, phi.conformal, o.c.sch()));
        const double weighted = area_under_mobius(p, geo);
        w1 = std::max(w1, v1);
        w2 = std::max(w2, v2);
        if (i == 0) {
            r.add("a", vec_str(as[0]));
            r.add("lemma_V1_discrepancy", v1);
            r.add("lemma_V2_discrepancy", v2);
            r.add("area_pushed", pushed);
            r.add("area_weighted", weighted);
        }
        t.add_row({fmt(as[i][0]), fmt(as[i][1]), fmt(as[i][2]), fmt(as[i][3]), fmt(v1), fmt(v2), fmt(pushed),
                   fmt(weighted)});
    }
    if (as.size() > 1) {
        r.add("samples", std::to_string(as.size()));
        r.add("worst_lemma_V1", w1);
        r.add("worst_lemma_V2", w2);
    }
    r.pass = w1 <= o.tol && w2 <= o.tol;
    emit(r, o.c, out);
    emit_csv(t, o.c);
    return r.pass ? exit_pass : exit_fail;
}

int cmd_descent(const DescentOpts& o, const std::string& config, std::ostream& out) {
    const GeometryFields geo = geometry(read_immersion(o.c.in), o.c.sch());
    if (o.x0.size() != 2) throw ConfigError("--x0 needs two grid indices i,j");
    const QFit fit = fit_Q(geo);
    BumpSpec spec;
    spec.i0 = o.x0[0];
    spec.j0 = o.x0[1];
    spec.chi = o.profile == "tau" ? chi_tau(standard_bump_1d(), o.tau) : radial_bump();
    BumpOptions bo;
    bo.allow_isothermic = o.allow_isothermic;

    std::vector<Vec4> as;
    std::mt19937_64 rng(o.seed);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int i = 0; i < o.mobius_samples; ++i) {
        Vec4 d(g(rng), g(rng), g(rng), g(rng));
        as.push_back(o.mobius_radius * d.normalized());
    }

    Report r{"descent", config, {}, true};
    r.add("q1", fit.Q.q1);
    r.add("q2", fit.Q.q2);
    CsvTable t({"epsilon", "t", "F", "lhs", "model", "rel_err", "alpha0_1", "alpha0_2", "mobius_margin",
                "mobius_budget_constant"});
    double last = 0.0, smallest = std::numeric_limits<double>::infinity();
    for (double e : o.eps) {
        spec.epsilon = e;
        const DescentCheck d = descent_expansion_check(geo, fit.Q, spec, o.delta, bo);
        std::string margin = "", budget = "";
        if (!as.empty()) {
            const MobiusDescentReport m = mobius_uniform_descent_check(geo, fit.Q, spec, as, o.delta, bo);
            margin = fmt(m.margin);
            budget = fmt(m.budget_constant);
        }
        t.add_row({fmt(e), fmt(d.t), fmt(d.F), fmt(d.lhs), fmt(d.model), fmt(d.rel_err), fmt(d.alpha0[0]),
                   fmt(d.alpha0[1]), margin, budget});
        r.add("rel_err[eps=" + fmt(e) + "]", d.rel_err);
        r.add("F", d.F);
        if (e < smallest) {
            smallest = e;
            last = d.rel_err;
        }
    }
    r.pass = last <= o.tol;
    emit(r, o.c, out);
    emit_csv(t, o.c);
    return r.pass ? exit_pass : exit_fail;
}

int cmd_plotdata(const PlotOpts& o, const std::string& config, std::ostream& out) {
    const GeometryFields geo = geometry(read_immersion(o.c.in), o.c.sch());
    auto field = [&]() -> ScalarField {
        const std::string& q = o.quantity;
        if (q == "lambda") return geo.lambda;
        if (q == "H") return geo.H;
        if (q == "H0_re") return geo.H0_re;
        if (q == "H0_im") return geo.H0_im;
        if (q == "K") return gauss_curvature(geo);
        if (q == "dvol") return geo.dvol;
        if (q == "liouville") return liouville_residual(geo);
        if (q == "codazzi1") return codazzi_residual(geo).field1;
        if (q == "codazzi2") return codazzi_residual(geo).field2;
        const QFit fit = fit_Q(geo);
        if (q == "two_Q_norm") return ellipticity(geo, fit.Q).two_Q_norm;
        return fit.residual; // ccms_residual
    }();
    CsvTable t({"x1", "x2", o.quantity});
    for (std::size_t k = 0; k < geo.grid.size(); ++k)
        t.add_row({fmt(geo.grid.x1(k)), fmt(geo.grid.x2(k)), fmt(field[k])});
    if (o.c.csv.empty())
        t.write(out);
    else
        t.write(o.c.csv);
    Report r{"plotdata", config, {}, true};
    r.add("quantity", o.quantity);
    r.add("min", field.min());
    r.add("max", field.max());
    r.add("mean", field.mean());
    if (!o.c.csv.empty()) emit(r, o.c, out);
    return exit_pass;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Numerical toolkit for immersed tori in S^3: geometry, constrained-minimal fits, "
                 "variations of area and conformal volume."};
    app.set_config("--config", "", "INI/TOML configuration file; [section] names select the subcommand");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.require_subcommand(1);

    GenOpts gen;
    auto* s_gen = app.add_subcommand("gen", "generate an immersion and write it as CTL1");
    s_gen->add_option("family", gen.family, "clifford | flat-cmc | hopf-circle | hopf-wobbly | hopf-curve")
        ->required()
        ->check(CLI::IsMember({"clifford", "flat-cmc", "hopf-circle", "hopf-wobbly", "hopf-curve"}));
    s_gen->add_option("--a", gen.a, "flat-cmc radius a in (0,1)")->capture_default_str();
    s_gen->add_option("--kappa", gen.kappa, "geodesic curvature of the base circle")->capture_default_str();
    s_gen->add_option("--amp", gen.amp, "hopf-wobbly amplitude")->capture_default_str();
    s_gen->add_option("--lobes", gen.lobes, "hopf-wobbly lobes")->capture_default_str();
    s_gen->add_option("--curve-samples", gen.curve_samples, "hopf-wobbly curve samples")->capture_default_str();
    s_gen->add_option("--curve", gen.curve, "hopf-curve: file of x,y,z arclength-uniform samples");
    s_gen->add_option("--lift", gen.lift, "horizontal lift method")
        ->check(CLI::IsMember({"spectral", "rk4"}))
        ->capture_default_str();
    s_gen->add_option("--n", gen.n, "grid resolution (n1, and n2 unless --n2)")
        ->check(even_resolution)
        ->capture_default_str();
    s_gen->add_option("--n2", gen.n2, "second grid resolution")->check(even_resolution);
    s_gen->add_option("--out,-o", gen.out, "output CTL1 path")->required();

    GeomOpts geom;
    auto* s_geom = app.add_subcommand("geom", "metric, curvatures and identity residuals "
                                              "(CSV: x1,x2,lambda,H,H0_re,H0_im,K,dvol)");
    add_common(s_geom, geom.c);
    s_geom->add_option("--tol", geom.tol, "Codazzi / Gauss residual threshold")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    FitOpts fq;
    auto* s_fit = app.add_subcommand("fitq", "fit H = Re<Q,h0> (CSV: x1,x2,H,re_Q_h0,residual,two_Q_norm)");
    add_common(s_fit, fq.c);
    s_fit->add_option("--minimal-tol", fq.minimal_tol)->check(CLI::PositiveNumber)->capture_default_str();
    s_fit->add_option("--fit-tol", fq.fit_tol)->check(CLI::PositiveNumber)->capture_default_str();
    s_fit->add_option("--band", fq.band, "ellipticity band around 2|Q|_g = 1")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    ClassifyOpts cl;
    auto* s_cl = app.add_subcommand("classify", "minimal / flat CMC / constrained classification "
                                                "(CSV: bucket,q1,q2,rel_residual,ccms_residual,isothermic,sup_H,K_mean)");
    add_common(s_cl, cl.c);

    VcOpts vc;
    auto* s_vc = app.add_subcommand("vc", "conformal volume by multi-start ascent "
                                          "(CSV trace: start,iter,value,a_norm,grad_norm)");
    add_common(s_vc, vc.c);
    s_vc->add_option("--start-radius", vc.vc.start_radius)->check(CLI::Range(0.0, 0.99))->capture_default_str();
    s_vc->add_option("--max-iters", vc.vc.max_iters)->check(CLI::PositiveNumber)->capture_default_str();
    s_vc->add_option("--fd-step", vc.vc.fd_step)->check(CLI::PositiveNumber)->capture_default_str();
    s_vc->add_option("--grad-tol", vc.vc.grad_tol)->check(CLI::PositiveNumber)->capture_default_str();

    SecondVarOpts sv;
    auto* s_sv = app.add_subcommand("secondvar", "constrained second variation of area; optional FD suite "
                                                 "(CSV: sample,formula,rel_err)");
    add_common(s_sv, sv.c);
    s_sv->add_option("--field", sv.field, "variation field")
        ->check(CLI::IsMember({"normal-one", "normal-cos", "random", "tangential"}))
        ->capture_default_str();
    s_sv->add_option("--mode", sv.mode, "frequency k of v = cos(k x1) for normal-cos")->capture_default_str();
    s_sv->add_option("--seed", sv.seed)->capture_default_str();
    s_sv->add_option("--gate", sv.gate, "criticality gate on sup|H - Re<Q,h0>|")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    s_sv->add_option("--fd-samples", sv.fd_samples, "random fields for the finite-difference suite")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    s_sv->add_option("--fd-tol", sv.fd_tol)->check(CLI::PositiveNumber)->capture_default_str();

    MobiusOpts mb;
    auto* s_mb = app.add_subcommand("mobius-check", "transformation laws of h0 and H under Psi_a "
                                                    "(CSV: a1..a4,lemma_V1,lemma_V2,area_pushed,area_weighted)");
    add_common(s_mb, mb.c);
    s_mb->add_option("--a", mb.a, "Moebius parameter a1,a2,a3,a4")->delimiter(',')->expected(4);
    s_mb->add_option("--random", mb.random, "additional random parameters")->capture_default_str();
    s_mb->add_option("--radius", mb.radius, "radius bound of the random parameters")
        ->check(CLI::Range(0.0, 0.99))
        ->capture_default_str();
    s_mb->add_option("--seed", mb.seed)->capture_default_str();
    s_mb->add_option("--tol", mb.tol)->check(CLI::PositiveNumber)->capture_default_str();

    DescentOpts ds;
    auto* s_ds = app.add_subcommand("descent", "second-order area expansion along conformal-class bumps "
                                               "(CSV: epsilon,t,F,lhs,model,rel_err,alpha0_1,alpha0_2,"
                                               "mobius_margin,mobius_budget_constant)");
    add_common(s_ds, ds.c);
    s_ds->add_option("--x0", ds.x0, "bump centre grid indices i,j")->delimiter(',')->expected(2);
    s_ds->add_option("--eps", ds.eps, "bump radii")->delimiter(',');
    s_ds->add_option("--delta", ds.delta, "t = delta * eps")->check(CLI::PositiveNumber)->capture_default_str();
    s_ds->add_option("--profile", ds.profile)->check(CLI::IsMember({"radial", "tau"}))->capture_default_str();
    s_ds->add_option("--tau", ds.tau)->check(CLI::PositiveNumber)->capture_default_str();
    s_ds->add_flag("--allow-isothermic", ds.allow_isothermic, "least-squares class correction on isothermic tori");
    s_ds->add_option("--tol", ds.tol, "relative error threshold at the smallest eps")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    s_ds->add_option("--mobius-samples", ds.mobius_samples)->check(CLI::NonNegativeNumber)->capture_default_str();
    s_ds->add_option("--mobius-radius", ds.mobius_radius)->check(CLI::Range(0.0, 0.99))->capture_default_str();
    s_ds->add_option("--seed", ds.seed)->capture_default_str();

    PlotOpts pl;
    auto* s_pl = app.add_subcommand("plotdata", "dump a scalar field as x1,x2,value CSV");
    add_common(s_pl, pl.c);
    s_pl->add_option("--quantity,-q", pl.quantity)->required()->check(CLI::IsMember(plot_quantities()));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return exit_usage;
    }

    apply_thread_limit();
    try {
        for (CLI::App* sub : app.get_subcommands()) {
            const std::string config = sub->config_to_str(true, false);
            const std::string name = sub->get_name();
            if (name == "gen") return cmd_gen(gen, config, out);
            if (name == "geom") return cmd_geom(geom, config, out);
            if (name == "fitq") return cmd_fitq(fq, config, out);
            if (name == "classify") return cmd_classify(cl, config, out);
            if (name == "vc") return cmd_vc(vc, config, out);
            if (name == "secondvar") return cmd_secondvar(sv, config, out);
            if (name == "mobius-check") return cmd_mobius(mb, config, out);
            if (name == "descent") return cmd_descent(ds, config, out);
            if (name == "plotdata") return cmd_plotdata(pl, config, out);
        }
    } catch (const ContractError& e) {
        err << "contract error: " << e.what() << '\n';
        return exit_fail;
    } catch (const DegeneracyError& e) {
        err << "degenerate: " << e.what() << '\n';
        return exit_fail;
    } catch (const ConstructionError& e) {
        err << "construction failed: " << e.what() << '\n';
        return exit_fail;
    } catch (const DomainError& e) {
        err << "domain error: " << e.what() << '\n';
        return exit_usage;
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << '\n';
        return exit_usage;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::exception& e) {
        err << "unexpected error: " << e.what() << '\n';
        return exit_usage;
    }
    return exit_usage;
}

} // namespace ctl
