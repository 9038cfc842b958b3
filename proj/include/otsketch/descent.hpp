#pragma once

#include <functional>
#include <iosfwd>

#include "otsketch/curve_proj.hpp"
#include "otsketch/grid_density.hpp"
#include "otsketch/ot_dual.hpp"

namespace otsketch {

// Alternating minimization of F(x,w) = 1/2 W2^2(nu(x,w), mu):
// w-step, psi-step (dual solve), x-step toward cell barycenters under the
// mass metric, optional projection onto a curve constraint set.

enum class WeightMode { fixed, simplex };
enum class StopRule { snr, grad, iterations };

struct DescentConfig {
    WeightMode weight_mode = WeightMode::fixed;
    double s = 1.0; // x-step length; 1 moves sites onto barycenters
    int max_outer = 100;
    StopRule stop = StopRule::iterations;
    double snr_threshold_db = 31.0;
    double grad_tol = 1e-9; // on max_i |w_i (x_i - b_i)|
    const ConstraintSystem* projection = nullptr;
    double admm_beta = 5.0;
    double admm_tol = 1e-7;
    // Conservative 1/L step in the mass metric, L from power iteration on the
    // finite-difference action of the x-Hessian; overrides s when set.
    bool conservative_step = false;
    double time_limit_s = 0.0; // 0 disables; checked between outer iterations
    SolveOptions dual; // tol_l2 == 0 picks the 1e-7*sqrt(n) default
    // Optional SNR callback (pipeline wires an SnrMeter here); required for
    // StopRule::snr, otherwise only feeds the trace.
    std::function<double(const SiteSet&)> snr_eval;
    std::ostream* trace = nullptr; // CSV rows: k,F,gradx_inf,dual_iters,snr
};

struct MeasureState {
    SiteSet sites;
    DualPotential psi;
    double F = 0.0;
    double gradx_inf = 0.0;
    double last_snr = 0.0;
    int outer_iterations = 0;
    int total_dual_iterations = 0;
    bool converged = false;  // stop rule met before max_outer ran out
    bool time_limit = false; // bailed out on DescentConfig::time_limit_s
    SolveStatus last_dual_status = SolveStatus::converged;
};

// mode == simplex sets the weights to the Voronoi masses at psi = 0 (the
// closed-form optimum); fixed returns the input unchanged.
SiteSet w_step(const GridDensity& d, const SiteSet& sites, WeightMode mode,
               Exec ex = Exec::parallel);

// x_i <- clamp((1-s) x_i + s b_i) with b_i the barycenter of cell i at
// (sites, psi). Throws EmptyCellEncountered when a cell mass is below 1e-14.
SiteSet x_step(const GridDensity& d, const MeasureState& state, double s,
               Exec ex = Exec::parallel);

MeasureState run(const GridDensity& d, const SiteSet& init, const DescentConfig& cfg);

} // namespace otsketch
