#include "otsketch/ot_dual.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "otsketch/errors.hpp"

namespace otsketch {

void DualHessian::apply(const std::vector<double>& x, std::vector<double>& y) const {
    y.resize(std::size_t(n));
    for (int i = 0; i < n; ++i) y[i] = diag[i] * x[i];
    for (const Entry& e : entries) {
        y[e.i] += e.w * x[e.j];
        y[e.j] += e.w * x[e.i];
    }
}

DualState eval_dual(const GridDensity& d, const SiteSet& sites, const DualPotential& psi,
                    Exec ex) {
    DualState st;
    st.diagram = compute_diagram(sites, psi, ex);
    const std::vector<PolyMoments> mom = diagram_moments(d, st.diagram, ex);
    const std::size_t n = sites.size();
    st.psi = psi;
    st.masses.resize(n);
    st.grad.resize(n);
    double g = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 xi = sites.positions[i];
        const double mass = mom[i].mass;
        const double cost =
            mom[i].second - 2.0 * (xi.x * mom[i].mx + xi.y * mom[i].my) + norm2(xi) * mass;
        g += cost - psi[i] * mass + psi[i] * sites.weights[i];
        st.masses[i] = mass;
        st.grad[i] = sites.weights[i] - mass;
    }
    st.value = g;
    return st;
}

DualHessian assemble_hessian(const GridDensity& d, const SiteSet& sites,
                             const LaguerreDiagram& diag, Exec ex) {
    DualHessian H;
    H.n = int(sites.size());
    H.entries.resize(diag.edges.size());
    parallel_for(diag.edges.size(), ex, [&](std::size_t k) {
        const auto& e = diag.edges[k];
        const double dij = dist(sites.positions[e.i], sites.positions[e.j]);
        H.entries[k] = {e.i, e.j, d.edge_density_integral(e.a, e.b) / dij};
    });
    H.diag.assign(sites.size(), 0.0);
    for (const auto& e : H.entries) {
        H.diag[e.i] -= e.w;
        H.diag[e.j] -= e.w;
    }
    return H;
}

DualHessian eval_hessian(const GridDensity& d, const SiteSet& sites, const DualPotential& psi,
                         Exec ex) {
    const LaguerreDiagram diag = compute_diagram(sites, psi, ex);
    return assemble_hessian(d, sites, diag, ex);
}

namespace {

double norm2_vec(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double norm_inf(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s = std::max(s, std::abs(x));
    return s;
}

double dot_vec(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

void project_zero_mean(std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= double(v.size());
    for (double& x : v) x -= m;
}

struct CgResult {
    int iters = 0;
    bool converged = false;
    bool breakdown = false;
};

// Solves (reg I + 0.5 L) x = b with L = -H, by Jacobi-preconditioned CG on
// the zero-mean subspace. reg = 0 gives the bare (singular) Newton system.
CgResult cg_solve(const DualHessian& H, double reg, const std::vector<double>& b,
                  std::vector<double>& x, double abs_tol, int max_iter) {
    const std::size_t n = b.size();
    CgResult res;
    x.assign(n, 0.0);
    std::vector<double> r = b, z(n), p(n), Hp(n), Ap(n);

    auto precond = [&](const std::vector<double>& in, std::vector<double>& out) {
        for (std::size_t i = 0; i < n; ++i) {
            const double m = reg - 0.5 * H.diag[i]; // diag of reg I + L/2
            out[i] = in[i] / (m > 1e-300 ? m : 1e-300);
        }
        project_zero_mean(out);
    };

    precond(r, z);
    p = z;
    double rz = dot_vec(r, z);
    for (res.iters = 0; res.iters < max_iter; ++res.iters) {
        if (norm2_vec(r) <= abs_tol) {
            res.converged = true;
            return res;
        }
        H.apply(p, Hp);
        for (std::size_t i = 0; i < n; ++i) Ap[i] = reg * p[i] - 0.5 * Hp[i];
        const double pAp = dot_vec(p, Ap);
        if (!(pAp > 0.0) || !std::isfinite(pAp)) {
            res.breakdown = true;
            return res;
        }
        const double alpha = rz / pAp;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * Ap[i];
        }
        precond(r, z);
        const double rz_new = dot_vec(r, z);
        const double beta = rz_new / (rz > 0.0 ? rz : 1e-300);
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        rz = rz_new;
    }
    res.converged = norm2_vec(r) <= abs_tol;
    return res;
}

bool has_degenerate_cell(const DualState& st) {
    for (std::size_t i = 0; i < st.masses.size(); ++i) {
        if (!st.diagram.cells[i].poly.empty() && st.masses[i] < 1e-12) return true;
    }
    return false;
}

double min_mass(const DualState& st) {
    double m = 1e300;
    for (double v : st.masses) m = std::min(m, v);
    return m;
}

DualPotential multiscale_init(const GridDensity& d, const SiteSet& sites,
                              const SolveOptions& opt);

const char* mode_name(NewtonMode m, bool fallback) {
    if (fallback) return "grad";
    switch (m) {
        case NewtonMode::regularized: return "reg";
        case NewtonMode::levenberg_marquardt: return "lm";
        case NewtonMode::pure: return "pure";
    }
    return "?";
}

} // namespace

DualState solve_dual(const GridDensity& d, const SiteSet& sites, DualPotential psi0,
                     const SolveOptions& opt, SolveReport* report) {
    sites.validate();
    for (double w : sites.weights)
        if (!(w > 0.0)) throw BadInput("solve_dual: weights must be strictly positive");

    const std::size_t n = sites.size();
    if (psi0.empty()) psi0.assign(n, 0.0);
    if (psi0.size() != n) throw BadInput("solve_dual: psi0 size mismatch");
    regauge(psi0);

    if (opt.multiscale && n >= 64) {
        bool cold = true;
        for (double v : psi0) cold = cold && v == 0.0;
        if (cold) psi0 = multiscale_init(d, sites, opt);
    }

    DualState state = eval_dual(d, sites, psi0, opt.exec);

    // Cells that are empty at the start poison the regularized direction: their
    // Hessian row vanishes, so the step degenerates to a huge gradient component
    // that the backtracking then throttles globally. A zero start (Voronoi cells
    // of distinct sites) never has empty cells, so prefer it over a degenerate
    // warm start.
    double mass_floor = 0.0;
    if (opt.mode != NewtonMode::pure) {
        bool warm = false;
        for (double v : psi0) warm = warm || v != 0.0;
        if (warm && min_mass(state) < 1e-12) {
            // Back off geometrically toward the zero potential, keeping as much
            // of the warm start's smooth content as possible.
            double lam = 0.5;
            for (int k = 0; k < 8 && min_mass(state) < 1e-12; ++k, lam *= 0.5) {
                DualPotential trial = psi0;
                for (double& v : trial) v *= lam;
                regauge(trial);
                state = eval_dual(d, sites, trial, opt.exec);
            }
            if (min_mass(state) < 1e-12) state = eval_dual(d, sites, DualPotential(n, 0.0), opt.exec);
        }
        double wmin = 1e300;
        for (double w : sites.weights) wmin = std::min(wmin, w);
        mass_floor = 0.5 * std::min(min_mass(state), wmin);
    }

    if (opt.trace) *opt.trace << "iter,grad2,gradinf,step,reg,mode,cg\n";

    SolveReport rep;
    const int cg_cap = std::min<int>(int(n) + 8, 600);
    double lm_c = std::max(norm2_vec(state.grad), 1e-6);
    bool prev_full = false, last_full = false;

    std::vector<double> dir;
    int iter = 0;
    for (; iter < opt.max_iter; ++iter) {
        if (!std::isfinite(state.value) || !std::isfinite(norm2_vec(state.grad))) {
            rep.status = SolveStatus::diverged;
            break;
        }
        const double g2 = norm2_vec(state.grad);
        const double gi = norm_inf(state.grad);
        if (gi <= opt.tol_inf || (opt.tol_l2 > 0.0 && g2 <= opt.tol_l2)) {
            rep.status = SolveStatus::converged;
            break;
        }

        const DualHessian H = assemble_hessian(d, sites, state.diagram, opt.exec);
        const bool degenerate = has_degenerate_cell(state);

        bool accepted = false;
        double used_step = 0.0, used_reg = 0.0;
        int used_cg = 0;
        bool fallback = false;

        if (opt.mode == NewtonMode::pure) {
            const CgResult cg = cg_solve(H, 0.0, state.grad, dir, 1e-2 * g2, cg_cap);
            used_cg = cg.iters;
            DualPotential trial = state.psi;
            for (std::size_t i = 0; i < n; ++i) trial[i] += dir[i];
            regauge(trial);
            state = eval_dual(d, sites, trial, opt.exec);
            accepted = true;
            used_step = 1.0;
            prev_full = last_full;
            last_full = true;
        } else if (opt.mode == NewtonMode::levenberg_marquardt) {
            int tries = 0;
            for (; tries < 40 && !accepted; ++tries) {
                const CgResult cg =
                    cg_solve(H, lm_c, state.grad, dir, 1e-2 * g2, cg_cap);
                used_cg += cg.iters;
                if (cg.breakdown) {
                    for (std::size_t i = 0; i < n; ++i) dir[i] = state.grad[i] / lm_c;
                }
                const double slope = dot_vec(state.grad, dir);
                DualPotential trial = state.psi;
                for (std::size_t i = 0; i < n; ++i) trial[i] += dir[i];
                regauge(trial);
                DualState ts = eval_dual(d, sites, trial, opt.exec);
                if (std::isfinite(ts.value) && ts.value >= state.value + 1e-4 * slope &&
                    min_mass(ts) >= mass_floor) {
                    state = std::move(ts);
                    accepted = true;
                    used_step = 1.0;
                    used_reg = lm_c;
                    lm_c = std::max(lm_c / 3.0, 1e-14);
                } else {
                    lm_c = lm_c * 3.0 + 1e-12;
                }
            }
            if (!accepted) {
                rep.status = SolveStatus::line_search_failure;
                break;
            }
            prev_full = last_full;
            last_full = !degenerate;
        } else { // regularized (default)
            const double c = std::max(g2, 1e-14);
            used_reg = c;
            if (degenerate) {
                fallback = true; // Hessian undefined: damped gradient ascent
                dir.resize(n);
                for (std::size_t i = 0; i < n; ++i) dir[i] = state.grad[i] / c;
            } else {
                const CgResult cg = cg_solve(H, c, state.grad, dir, 1e-2 * g2, cg_cap);
                used_cg = cg.iters;
                if (cg.breakdown) {
                    fallback = true;
                    dir.resize(n);
                    for (std::size_t i = 0; i < n; ++i) dir[i] = state.grad[i] / c;
                }
            }
            const double slope = dot_vec(state.grad, dir);
            double t = 1.0;
            for (; t >= 0x1p-30; t *= 0.5) {
                DualPotential trial = state.psi;
                for (std::size_t i = 0; i < n; ++i) trial[i] += t * dir[i];
                regauge(trial);
                DualState ts = eval_dual(d, sites, trial, opt.exec);
                if (std::isfinite(ts.value) && ts.value >= state.value + 1e-4 * t * slope &&
                    min_mass(ts) >= mass_floor) {
                    state = std::move(ts);
                    accepted = true;
                    used_step = t;
                    break;
                }
            }
            if (!accepted) {
                rep.status = SolveStatus::line_search_failure;
                break;
            }
            prev_full = last_full;
            last_full = !fallback && used_step == 1.0;
        }

        if (opt.trace) {
            *opt.trace << iter + 1 << ',' << norm2_vec(state.grad) << ','
                       << norm_inf(state.grad) << ',' << used_step << ',' << used_reg << ','
                       << mode_name(opt.mode, fallback) << ',' << used_cg << '\n';
        }
        rep.iterations = iter + 1;
    }

    if (iter == opt.max_iter) rep.status = SolveStatus::max_iterations;
    rep.quadratic_phase = rep.iterations >= 1 && last_full && (rep.iterations < 2 || prev_full);

    regauge(state.psi);
    if (report) *report = rep;
    return state;
}

DualState solve_dual(const GridDensity& d, const SiteSet& sites, DualPotential psi0, double tol,
                     SolveReport* report) {
    SolveOptions opt;
    opt.tol_inf = tol;
    return solve_dual(d, sites, std::move(psi0), opt, report);
}

namespace {

DualPotential multiscale_init(const GridDensity& d, const SiteSet& sites,
                              const SolveOptions& opt) {
    const std::size_t n = sites.size();
    SiteSet coarse;
    std::vector<std::size_t> pick;
    for (std::size_t i = 0; i < n; i += 4) pick.push_back(i);
    double wsum = 0.0;
    for (std::size_t i : pick) wsum += sites.weights[i];
    for (std::size_t i : pick) {
        coarse.positions.push_back(sites.positions[i]);
        coarse.weights.push_back(sites.weights[i] / wsum);
    }

    SolveOptions copt = opt;
    copt.trace = nullptr;
    copt.tol_inf = std::max(opt.tol_inf * 10.0, 1e-6);
    copt.tol_l2 = 0.0;
    const DualState cs = solve_dual(d, coarse, {}, copt, nullptr);

    // Prolongation: a fine site inside coarse cell k should reproduce that
    // cell's power map near its own location, so psi = Psi_k - |x_i - y_k|^2.
    // Copying Psi_k verbatim would hand each coarse cell to a single fine site
    // and leave the rest empty.
    DualPotential psi(n, 0.0);
    parallel_for(n, opt.exec, [&](std::size_t i) {
        double best = dist2(sites.positions[i], coarse.positions[0]) - cs.psi[0];
        for (std::size_t k = 1; k < coarse.positions.size(); ++k) {
            const double t = dist2(sites.positions[i], coarse.positions[k]) - cs.psi[k];
            best = std::min(best, t);
        }
        psi[i] = -best;
    });
    regauge(psi);
    return psi;
}

} // namespace

} // namespace otsketch
