#include "otsketch/descent.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>

#include "otsketch/errors.hpp"

namespace otsketch {

namespace {

struct Barycenters {
    std::vector<Vec2> b;
    double gradx_inf = 0.0; // max_i w_i |x_i - b_i|
};

Barycenters barycenters_of(const SiteSet& sites, const std::vector<PolyMoments>& mom) {
    Barycenters out;
    const std::size_t n = sites.size();
    out.b.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (mom[i].mass < 1e-14)
            throw EmptyCellEncountered("x_step: cell mass below 1e-14");
        out.b[i] = {mom[i].mx / mom[i].mass, mom[i].my / mom[i].mass};
        const double g = sites.weights[i] * dist(sites.positions[i], out.b[i]);
        out.gradx_inf = std::max(out.gradx_inf, g);
    }
    return out;
}

} // namespace

SiteSet w_step(const GridDensity& d, const SiteSet& sites, WeightMode mode, Exec ex) {
    if (mode == WeightMode::fixed) return sites;
    const LaguerreDiagram voro = compute_diagram(sites, DualPotential(sites.size(), 0.0), ex);
    SiteSet out = sites;
    out.weights = cell_masses(d, voro, ex);
    double sum = 0.0;
    for (double w : out.weights) sum += w;
    if (!(sum > 0.0)) throw ZeroMassDensity("w_step: density vanishes on every cell");
    for (double& w : out.weights) w /= sum;
    for (double w : out.weights)
        if (!(w > 0.0))
            throw EmptyCellEncountered("w_step: a Voronoi cell carries no mass");
    return out;
}

SiteSet x_step(const GridDensity& d, const MeasureState& state, double s, Exec ex) {
    const LaguerreDiagram diag = compute_diagram(state.sites, state.psi, ex);
    const auto mom = diagram_moments(d, diag, ex);
    const Barycenters bc = barycenters_of(state.sites, mom);
    SiteSet out = state.sites;
    for (std::size_t i = 0; i < out.size(); ++i)
        out.positions[i] = clamp01(lerp(state.sites.positions[i], bc.b[i], s));
    return out;
}

namespace {

// Lipschitz estimate of x -> (x - b(x)) (the mass-metric gradient map) by
// power iteration on its central finite-difference action.
double estimate_lipschitz(const GridDensity& d, const SiteSet& sites, const DualPotential& psi,
                          const SolveOptions& dual_opt) {
    const std::size_t n = sites.size();
    auto grad_map = [&](const std::vector<Vec2>& pos) {
        SiteSet s = sites;
        s.positions = pos;
        for (auto& p : s.positions) p = clamp01(p);
        const DualState st = solve_dual(d, s, psi, dual_opt, nullptr);
        const auto mom = diagram_moments(d, st.diagram, dual_opt.exec);
        std::vector<Vec2> g(n);
        for (std::size_t i = 0; i < n; ++i)
            g[i] = s.positions[i] - Vec2{mom[i].mx / mom[i].mass, mom[i].my / mom[i].mass};
        return g;
    };

    std::vector<Vec2> v(n);
    std::uint64_t seed = 0x2545f4914f6cdd1dull;
    for (auto& p : v) {
        seed ^= seed << 13;
        seed ^= seed >> 7;
        seed ^= seed << 17;
        p = {double(seed >> 11) * 0x1.0p-53 - 0.5, double((seed * 0x9e37) >> 11) * 0x1.0p-53 - 0.5};
    }
    const double eps = 1e-5;
    double lambda = 1.0;
    for (int it = 0; it < 8; ++it) {
        double nv = 0.0;
        for (auto& p : v) nv += norm2(p);
        nv = std::sqrt(nv);
        if (!(nv > 0.0)) break;
        for (auto& p : v) p = p / nv;
        std::vector<Vec2> plus(n), minus(n);
        for (std::size_t i = 0; i < n; ++i) {
            plus[i] = sites.positions[i] + v[i] * eps;
            minus[i] = sites.positions[i] - v[i] * eps;
        }
        const auto gp = grad_map(plus), gm = grad_map(minus);
        double nw = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            v[i] = (gp[i] - gm[i]) / (2.0 * eps);
            nw += norm2(v[i]);
        }
        lambda = std::sqrt(nw);
    }
    return std::max(lambda, 1e-6);
}

} // namespace

MeasureState run(const GridDensity& d, const SiteSet& init, const DescentConfig& cfg) {
    init.validate();
    const std::size_t n = init.size();

    MeasureState state;
    state.sites = init;
    state.psi.assign(n, 0.0);

    SolveOptions dual_opt = cfg.dual;
    if (dual_opt.tol_l2 == 0.0) dual_opt.tol_l2 = 1e-7 * std::sqrt(double(n));

    AdmmState admm_warm;
    bool have_warm = false;
    double step = cfg.s;
    bool step_calibrated = !cfg.conservative_step;

    if (cfg.trace) *cfg.trace << "k,F,gradx_inf,dual_iters,snr\n";

    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed_s = [&t0] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    for (int k = 1; k <= cfg.max_outer; ++k) {
        if (cfg.time_limit_s > 0.0 && elapsed_s() > cfg.time_limit_s) {
            state.time_limit = true;
            break;
        }
        if (cfg.weight_mode == WeightMode::simplex) {
            state.sites = w_step(d, state.sites, WeightMode::simplex, dual_opt.exec);
            state.psi.assign(n, 0.0); // the new weights make psi = 0 optimal
        }

        SolveReport rep;
        DualState dual = solve_dual(d, state.sites, state.psi, dual_opt, &rep);
        state.psi = dual.psi;
        state.F = 0.5 * dual.value;
        state.total_dual_iterations += rep.iterations;
        state.last_dual_status = rep.status;
        if (rep.status == SolveStatus::diverged) break;

        const auto mom = diagram_moments(d, dual.diagram, dual_opt.exec);
        const Barycenters bc = barycenters_of(state.sites, mom);
        state.gradx_inf = bc.gradx_inf;
        state.outer_iterations = k;

        if (cfg.stop == StopRule::grad && bc.gradx_inf <= cfg.grad_tol) {
            state.converged = true;
            if (cfg.trace)
                *cfg.trace << k << ',' << state.F << ',' << state.gradx_inf << ','
                           << rep.iterations << ',' << state.last_snr << '\n';
            break;
        }

        if (!step_calibrated) {
            step = 1.0 / estimate_lipschitz(d, state.sites, state.psi, dual_opt);
            step = std::min(step, 1.0);
            step_calibrated = true;
        }

        for (std::size_t i = 0; i < n; ++i)
            state.sites.positions[i] =
                clamp01(lerp(state.sites.positions[i], bc.b[i], step));

        if (cfg.projection) {
            AdmmOptions aopt;
            aopt.beta = cfg.admm_beta;
            aopt.tol = cfg.admm_tol;
            if (have_warm) aopt.warm = &admm_warm;
            admm_warm = admm_project_state(state.sites.positions, *cfg.projection, aopt);
            have_warm = true;
            for (std::size_t i = 0; i < n; ++i)
                state.sites.positions[i] = clamp01(admm_warm.x[i]);
        }

        double snr = state.last_snr;
        if (cfg.snr_eval) {
            snr = cfg.snr_eval(state.sites);
            state.last_snr = snr;
        }
        if (cfg.trace)
            *cfg.trace << k << ',' << state.F << ',' << state.gradx_inf << ','
                       << rep.iterations << ',' << snr << '\n';

        if (cfg.stop == StopRule::snr && cfg.snr_eval && snr >= cfg.snr_threshold_db) {
            state.converged = true;
            break;
        }
    }

    if (cfg.stop == StopRule::iterations && state.outer_iterations == cfg.max_outer)
        state.converged = true;
    // Hand the unclamped (feasible) projected positions back to the caller.
    if (cfg.projection && have_warm) state.sites.positions = admm_warm.x;
    return state;
}

} // namespace otsketch
