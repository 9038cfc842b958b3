// otsketch: projects an image density onto dots, a constrained curve, or
// dash segments by semi-discrete optimal transport.
//
// Verbs: stipple, curvle, dash, project-curve, bench.
// Exit codes: 0 success, 2 non-convergence, 3 bad input.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "otsketch/bench.hpp"
#include "otsketch/curve_proj.hpp"
#include "otsketch/descent.hpp"
#include "otsketch/errors.hpp"
#include "otsketch/image.hpp"
#include "otsketch/render_svg.hpp"
#include "otsketch/sampling.hpp"
#include "otsketch/snr.hpp"

using namespace otsketch;
using nlohmann::json;

namespace {

struct DensityInput {
    GridDensity density = GridDensity::constant();
    bool has_image = false;
    Image image;
};

bool ends_with(const std::string& s, const std::string& suf) {
    return s.size() >= suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

// "uniform", a PGM/PPM image, or a text grid fixture.
DensityInput load_density(const std::string& path, bool invert, double gamma) {
    DensityInput in;
    if (path == "uniform") return in;
    if (ends_with(path, ".png"))
        throw UnsupportedFormat("PNG input is not built in; convert to PGM/PPM first");
    if (ends_with(path, ".pgm") || ends_with(path, ".ppm")) {
        in.image = read_pnm(path);
        in.has_image = true;
        in.density = build_density(in.image, invert, gamma);
        return in;
    }
    in.density = read_grid_text(path).normalized();
    return in;
}

AdmissibleSet make_set(const std::string& kind, double alpha) {
    AdmissibleSet set;
    if (kind == "ball")
        set.kind = AdmissibleSet::Kind::ball;
    else if (kind == "sphere")
        set.kind = AdmissibleSet::Kind::sphere;
    else
        throw BadInput("constraint config: unknown set kind '" + kind + "'");
    set.alpha = alpha;
    return set;
}

DiffOperator make_operator(const std::string& kind, int n, bool circular) {
    if (kind == "first") return DiffOperator::first(n, circular);
    if (kind == "second") return DiffOperator::second_order(n, circular);
    if (kind == "pairs") return DiffOperator::pairs(n);
    throw BadInput("constraint config: unknown operator kind '" + kind + "'");
}

// {"type":"kinematic"|"geometric", "alpha1":..,"alpha2":..,"circular":..}
// or {"constraints":[{"kind","set","alpha","circular","exempt_endpoints"}...]},
// optionally with "anchors":[{"index","x","y"}], "mean":{"x","y"}, "closure".
ConstraintSystem parse_constraints(const json& j, int n) {
    ConstraintSystem cs;
    const bool circular = j.value("circular", false);
    if (j.contains("type")) {
        const std::string type = j["type"];
        const double a1 = j.value("alpha1", 0.05);
        const double a2 = j.value("alpha2", a1 / 2.0);
        if (type == "kinematic")
            cs = kinematic_set(n, circular, a1, a2);
        else if (type == "geometric")
            cs = geometric_set(n, circular, a1, a2);
        else
            throw BadInput("constraint config: unknown type '" + type + "'");
    } else {
        cs.n = n;
        for (const auto& c : j.value("constraints", json::array())) {
            Constraint con;
            con.A = make_operator(c.value("kind", "first"), n, c.value("circular", circular));
            con.Y = make_set(c.value("set", "ball"), c.value("alpha", 0.05));
            if (c.value("exempt_endpoints", false) && con.A.kind == DiffKind::second &&
                !con.A.circular && con.A.rows() >= 2) {
                con.Y.exempt.assign(std::size_t(con.A.rows()), 0);
                con.Y.exempt.front() = 1;
                con.Y.exempt.back() = 1;
            }
            cs.constraints.push_back(std::move(con));
        }
        if (cs.constraints.empty())
            throw BadInput("constraint config: no constraints given");
    }
    for (const auto& a : j.value("anchors", json::array()))
        cs.add_anchor(a.at("index").get<int>(), {a.at("x").get<double>(), a.at("y").get<double>()});
    if (j.contains("mean"))
        cs.add_mean({j["mean"].at("x").get<double>(), j["mean"].at("y").get<double>()});
    if (j.value("closure", false)) cs.add_closure();
    return cs;
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw BadInput("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw BadInput(std::string("config parse error: ") + e.what());
    }
    return j;
}

// Shared options for the measure-fitting verbs.
struct FitOpts {
    std::string input;
    std::string out_svg;
    std::string points_out;
    std::string trace_path;
    std::string init_csv;
    std::string diagram_svg;
    int points = 4096;
    std::uint64_t seed = 1;
    double snr_stop = 31.0;
    int max_outer = 100;
    bool no_invert = false;
    double gamma = 1.0;
    bool color = false;
    bool simplex = false;
    bool serial = false;
    int threads = 0;
    bool multiscale = false;
    std::string newton = "regularized";
    double dual_tol = 1e-7;
    double step = 1.0;
    bool conservative = false;
    double radius = 2.0;
    double stroke = 1.5;
    int canvas = 1024;
    double time_limit = 0.0;
};

void add_fit_flags(CLI::App* cmd, FitOpts& o) {
    cmd->add_option("input", o.input, "PGM/PPM image, grid text file, or 'uniform'")
        ->required();
    cmd->add_option("-n,--points", o.points, "number of sites");
    cmd->add_option("--seed", o.seed, "RNG seed");
    cmd->add_option("--snr-stop", o.snr_stop, "stop at this SNR (dB); 0 disables");
    cmd->add_option("--max-outer", o.max_outer, "outer iteration cap");
    cmd->add_option("-o,--out", o.out_svg, "output SVG path");
    cmd->add_option("--points-out", o.points_out, "write final points as CSV");
    cmd->add_option("--trace", o.trace_path, "write per-iteration CSV trace");
    cmd->add_option("--init", o.init_csv, "warm start: initial points CSV");
    cmd->add_option("--dump-diagram", o.diagram_svg, "debug SVG of the final diagram");
    cmd->add_flag("--no-invert", o.no_invert, "treat bright pixels as dense");
    cmd->add_option("--gamma", o.gamma, "gamma applied to the gray map");
    cmd->add_flag("--color", o.color, "per-site colors from the input image");
    cmd->add_flag("--simplex", o.simplex, "optimize weights too (Lloyd-style)");
    cmd->add_flag("--serial", o.serial, "run all kernels serially");
    cmd->add_option("--threads", o.threads, "OpenMP thread count");
    cmd->add_flag("--multiscale", o.multiscale, "coarse-to-fine dual warm start");
    cmd->add_option("--newton", o.newton, "dual mode: regularized|lm|pure");
    cmd->add_option("--dual-tol", o.dual_tol, "dual gradient tolerance (inf norm)");
    cmd->add_option("--step", o.step, "x-step length s");
    cmd->add_flag("--conservative", o.conservative, "use the 1/L safeguarded step");
    cmd->add_option("--radius", o.radius, "dot radius (px)");
    cmd->add_option("--stroke", o.stroke, "stroke width (px)");
    cmd->add_option("--canvas", o.canvas, "canvas size (px)");
    cmd->add_option("--time-limit", o.time_limit, "wall-clock limit in seconds");
}

NewtonMode parse_newton(const std::string& s) {
    if (s == "regularized") return NewtonMode::regularized;
    if (s == "lm") return NewtonMode::levenberg_marquardt;
    if (s == "pure") return NewtonMode::pure;
    throw BadInput("unknown newton mode '" + s + "'");
}

DescentConfig make_descent_config(const FitOpts& o, Exec ex) {
    DescentConfig cfg;
    cfg.weight_mode = o.simplex ? WeightMode::simplex : WeightMode::fixed;
    cfg.s = o.step;
    cfg.conservative_step = o.conservative;
    cfg.max_outer = o.max_outer;
    cfg.stop = o.snr_stop > 0.0 ? StopRule::snr : StopRule::iterations;
    cfg.snr_threshold_db = o.snr_stop;
    cfg.time_limit_s = o.time_limit;
    cfg.dual.tol_inf = o.dual_tol;
    cfg.dual.mode = parse_newton(o.newton);
    cfg.dual.exec = ex;
    cfg.dual.multiscale = o.multiscale;
    return cfg;
}

SiteSet initial_sites(const FitOpts& o, const DensityInput& din) {
    if (!o.init_csv.empty()) {
        std::vector<Vec2> pts = read_curve_csv(o.init_csv);
        for (auto& p : pts) p = clamp01(p);
        return uniform_weights(std::move(pts));
    }
    return init_sites(o.points, o.seed, &din.density);
}

int finish_fit(const FitOpts& o, const DensityInput& din, const MeasureState& st,
               RenderMode mode) {
    if (!o.points_out.empty()) write_curve_csv(o.points_out, st.sites.positions);
    if (!o.out_svg.empty()) {
        RenderSpec spec;
        spec.mode = mode;
        spec.dot_radius = o.radius;
        spec.stroke_width = o.stroke;
        spec.canvas = o.canvas;
        if (mode == RenderMode::stipple) {
            std::vector<Rgb> colors;
            if (o.color) {
                if (!din.has_image) throw BadInput("--color needs an image input");
                spec.color = ColorMode::color;
                colors = assign_colors(din.image, st.sites.positions);
            }
            write_svg_points(o.out_svg, st.sites.positions, spec, colors);
        } else if (mode == RenderMode::curvle) {
            Curve c;
            c.pts = st.sites.positions;
            c.weights = st.sites.weights;
            write_svg_curve(o.out_svg, c, spec);
        } else {
            write_svg_dashes(o.out_svg, st.sites.positions, spec);
        }
    }
    if (!o.diagram_svg.empty()) {
        const LaguerreDiagram diag =
            compute_diagram(st.sites, st.psi, o.serial ? Exec::serial : Exec::parallel);
        write_svg_diagram(o.diagram_svg, diag, st.sites.positions, o.canvas);
    }
    std::cout << "iterations " << st.outer_iterations << "  F " << st.F << "  snr "
              << st.last_snr << " dB\n";
    if (st.time_limit) {
        std::cerr << "time limit reached before the stop rule\n";
        return 2;
    }
    return st.converged ? 0 : 2;
}

int run_fit(const FitOpts& o, RenderMode mode, const ConstraintSystem* cs,
            double admm_tol) {
    if (o.threads > 0) set_num_threads(o.threads);
    const Exec ex = o.serial ? Exec::serial : Exec::parallel;
    const DensityInput din = load_density(o.input, !o.no_invert, o.gamma);

    SiteSet init = initial_sites(o, din);
    const int n = int(init.size());

    DescentConfig cfg = make_descent_config(o, ex);
    cfg.projection = cs;
    if (cs) cfg.admm_tol = admm_tol;

    std::unique_ptr<SnrMeter> meter;
    if (cfg.stop == StopRule::snr || !o.trace_path.empty()) {
        meter.reset(new SnrMeter(
            din.has_image ? SnrMeter::for_image(din.image, !o.no_invert, o.gamma, n, ex)
                          : SnrMeter::for_density(din.density, 256, n, ex)));
        cfg.snr_eval = [&m = *meter](const SiteSet& s) { return m.evaluate(s); };
    }

    std::ofstream trace;
    if (!o.trace_path.empty()) {
        trace.open(o.trace_path);
        if (!trace) throw BadInput("cannot open trace file: " + o.trace_path);
        cfg.trace = &trace;
    }

    const MeasureState st = run(din.density, init, cfg);
    return finish_fit(o, din, st, mode);
}

// Evenly spaced circle, small enough steps for the default constraint scale.
std::vector<Vec2> circle_init(int n, double radius) {
    std::vector<Vec2> pts(std::size_t(n), Vec2{});
    for (int i = 0; i < n; ++i) {
        const double t = 2.0 * 3.14159265358979323846 * i / n;
        pts[std::size_t(i)] = {0.5 + radius * std::cos(t), 0.5 + radius * std::sin(t)};
    }
    return pts;
}

// Dash pairs around density samples, each of length alpha/2.
std::vector<Vec2> dash_init(const GridDensity& d, int n, std::uint64_t seed, double alpha) {
    std::vector<Vec2> mids = poisson_density(d, n / 2, seed);
    std::vector<Vec2> pts;
    pts.reserve(std::size_t(n));
    std::uint64_t s = seed * 0x9e3779b97f4a7c15ull + 1;
    for (const Vec2& m : mids) {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        const double t = 2.0 * 3.14159265358979323846 * (double(s >> 11) * 0x1.0p-53);
        const Vec2 h{0.25 * alpha * std::cos(t), 0.25 * alpha * std::sin(t)};
        pts.push_back(clamp01(m - h));
        pts.push_back(clamp01(m + h));
    }
    return pts;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"otsketch: stippling, curvling and dashing by optimal transport"};
    app.require_subcommand(1);

    FitOpts so;
    CLI::App* stipple = app.add_subcommand("stipple", "fit a dot measure to a density");
    add_fit_flags(stipple, so);

    FitOpts co;
    std::string c_config;
    double c_alpha1 = 0.0, c_alpha2 = 0.0, c_tol = 1e-7;
    bool c_circular = false, c_geometric = false;
    std::string c_trajectory;
    CLI::App* curvle = app.add_subcommand("curvle", "fit one constrained curve");
    add_fit_flags(curvle, co);
    curvle->add_option("--config", c_config, "constraint config JSON");
    curvle->add_option("--alpha1", c_alpha1, "speed / length bound (default 1.5/sqrt(n))");
    curvle->add_option("--alpha2", c_alpha2, "acceleration bound (default alpha1/2)");
    curvle->add_flag("--circular", c_circular, "closed curve");
    curvle->add_flag("--geometric", c_geometric, "fixed-length (sphere) constraints");
    curvle->add_option("--admm-tol", c_tol, "projection tolerance");
    curvle->add_option("--trajectory", c_trajectory, "write the curve as CSV");

    FitOpts dho;
    std::string d_config;
    double d_alpha = 0.0, d_tol = 1e-7;
    CLI::App* dash = app.add_subcommand("dash", "fit independent dash segments");
    add_fit_flags(dash, dho);
    dash->add_option("--config", d_config, "constraint config JSON");
    dash->add_option("--alpha1", d_alpha, "dash length bound (default 1.5/sqrt(n))");
    dash->add_option("--admm-tol", d_tol, "projection tolerance");

    std::string p_in, p_out, p_config;
    double p_beta = 5.0, p_tol = 1e-8;
    bool p_report = false;
    CLI::App* project = app.add_subcommand("project-curve",
                                           "project a CSV curve onto a constraint set");
    project->add_option("--in", p_in, "input curve CSV")->required();
    project->add_option("--config", p_config, "constraint config JSON")->required();
    project->add_option("-o,--out", p_out, "output curve CSV")->required();
    project->add_option("--beta", p_beta, "ADMM penalty");
    project->add_option("--tol", p_tol, "residual tolerance");
    project->add_flag("--feasibility", p_report, "print the feasibility report");

    std::string b_density = "uniform", b_sizes = "1024", b_out, b_newton = "regularized";
    std::uint64_t b_seed = 1;
    double b_snr = 31.0, b_time = 0.0;
    int b_grid = 256, b_max = 400;
    bool b_serial = false;
    CLI::App* bench = app.add_subcommand("bench", "iteration-count benchmark");
    bench->add_option("--density", b_density, "uniform | half");
    bench->add_option("--sizes", b_sizes, "comma-separated site counts");
    bench->add_option("--seed", b_seed, "RNG seed");
    bench->add_option("--snr-stop", b_snr, "stop threshold (dB)");
    bench->add_option("--snr-grid", b_grid, "SNR meter resolution");
    bench->add_option("--max-outer", b_max, "iteration cap (NC beyond)");
    bench->add_option("--time-limit", b_time, "seconds per run (TL beyond)");
    bench->add_option("--newton", b_newton, "dual mode: regularized|lm|pure");
    bench->add_option("-o,--out", b_out, "benchmark CSV path");
    bench->add_flag("--serial", b_serial, "serial kernels");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 3;
    }

    try {
        if (stipple->parsed()) return run_fit(so, RenderMode::stipple, nullptr, 0.0);

        if (curvle->parsed()) {
            const int n = co.init_csv.empty() ? std::max(co.points, 8)
                                              : int(read_curve_csv(co.init_csv).size());
            co.points = n;
            if (c_alpha1 <= 0.0) c_alpha1 = 1.5 / std::sqrt(double(n));
            if (c_alpha2 <= 0.0) c_alpha2 = c_alpha1 / 2.0;
            ConstraintSystem cs;
            if (!c_config.empty())
                cs = parse_constraints(read_json(c_config), n);
            else if (c_geometric)
                cs = geometric_set(n, c_circular, c_alpha1, c_alpha2);
            else
                cs = kinematic_set(n, c_circular, c_alpha1, c_alpha2);
            if (co.init_csv.empty()) {
                // start from a feasible circle: step length 2 pi r / n <= alpha1
                const double r =
                    std::min(0.25, 0.8 * c_alpha1 * n / (2.0 * 3.14159265358979323846));
                const std::string scratch = co.out_svg.empty() ? "curvle_init.csv"
                                                               : co.out_svg + ".init.csv";
                write_curve_csv(scratch, circle_init(n, r));
                co.init_csv = scratch;
            }
            if (!c_trajectory.empty()) co.points_out = c_trajectory;
            return run_fit(co, RenderMode::curvle, &cs, c_tol);
        }

        if (dash->parsed()) {
            if (dho.points % 2) throw BadInput("dash: --points must be even");
            const int n = dho.points;
            if (d_alpha <= 0.0) d_alpha = 1.5 / std::sqrt(double(n));
            ConstraintSystem cs;
            if (!d_config.empty()) {
                cs = parse_constraints(read_json(d_config), n);
            } else {
                cs.n = n;
                Constraint con;
                con.A = DiffOperator::pairs(n);
                con.Y = make_set("ball", d_alpha);
                cs.constraints.push_back(con);
            }
            const DensityInput din = load_density(dho.input, !dho.no_invert, dho.gamma);
            if (dho.init_csv.empty()) {
                const std::string scratch = dho.out_svg.empty() ? "dash_init.csv"
                                                                : dho.out_svg + ".init.csv";
                write_curve_csv(scratch, dash_init(din.density, n, dho.seed, d_alpha));
                dho.init_csv = scratch;
            }
            return run_fit(dho, RenderMode::dash, &cs, d_tol);
        }

        if (project->parsed()) {
            std::vector<Vec2> z = read_curve_csv(p_in);
            const ConstraintSystem cs = parse_constraints(read_json(p_config), int(z.size()));
            AdmmOptions opt;
            opt.beta = p_beta;
            opt.tol = p_tol;
            const AdmmState st = admm_project_state(z, cs, opt);
            write_curve_csv(p_out, st.x);
            std::cout << "admm iterations " << st.iterations << "  primal "
                      << st.primal_res << "  dual " << st.dual_res << '\n';
            if (p_report) {
                const FeasibilityReport rep = check_feasibility(st.x, cs);
                std::cout << "feasibility: violation " << rep.max_violation << "  sphere "
                          << rep.max_sphere_dev << "  equality " << rep.max_equality_err
                          << '\n';
            }
            return st.converged ? 0 : 2;
        }

        if (bench->parsed()) {
            BenchConfig cfg;
            if (b_density == "uniform")
                cfg.density = BenchDensity::uniform;
            else if (b_density == "half")
                cfg.density = BenchDensity::half_split;
            else
                throw BadInput("bench: density must be 'uniform' or 'half'");
            std::stringstream ss(b_sizes);
            std::string tok;
            while (std::getline(ss, tok, ','))
                if (!tok.empty()) cfg.sizes.push_back(std::stoi(tok));
            cfg.seed = b_seed;
            cfg.snr_threshold_db = b_snr;
            cfg.snr_grid = b_grid;
            cfg.max_outer = b_max;
            cfg.time_limit_s = b_time;
            cfg.newton = parse_newton(b_newton);
            cfg.exec = b_serial ? Exec::serial : Exec::parallel;
            const auto rows = run_bench(cfg);
            std::cout << "density,n,iterations,seconds,snr_db,status\n";
            for (const auto& r : rows)
                std::cout << r.density << ',' << r.n << ',' << r.iterations << ','
                          << r.seconds << ',' << r.snr_db << ',' << r.status << '\n';
            if (!b_out.empty()) write_bench_csv(b_out, rows);
            for (const auto& r : rows)
                if (r.status != "OK") return 2;
            return 0;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
