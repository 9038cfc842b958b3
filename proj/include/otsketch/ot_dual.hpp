#pragma once

#include <iosfwd>
#include <vector>

#include "otsketch/grid_density.hpp"
#include "otsketch/laguerre.hpp"
#include "otsketch/parallel.hpp"

namespace otsketch {

// Kantorovich dual g(psi) = sum_i int_{L_i} (|x_i - x|^2 - psi_i) dmu
//                         + sum_i psi_i w_i,   concave in psi.
// grad_i = w_i - mu(L_i).

struct DualState {
    DualPotential psi;
    double value = 0.0;
    std::vector<double> grad;
    std::vector<double> masses;
    LaguerreDiagram diagram;
};

// Edge-weighted graph matrix of the dual problem. Stored convention: H is the
// closure form with off-diagonal entries +int rho ds / |x_i - x_j| over shared
// edges and each diagonal closing its row to zero, which is exactly TWICE the
// second derivative of g (the true Hessian is H/2; see eval_hessian tests).
// H is negative semidefinite; -H is a graph Laplacian.
struct DualHessian {
    int n = 0;
    struct Entry {
        int i, j;
        double w; // >= 0
    };
    std::vector<Entry> entries; // one per shared edge, i < j
    std::vector<double> diag;   // -sum of incident entry weights

    void apply(const std::vector<double>& x, std::vector<double>& y) const;
};

DualState eval_dual(const GridDensity& d, const SiteSet& sites, const DualPotential& psi,
                    Exec ex = Exec::parallel);

DualHessian assemble_hessian(const GridDensity& d, const SiteSet& sites,
                             const LaguerreDiagram& diag, Exec ex = Exec::parallel);

DualHessian eval_hessian(const GridDensity& d, const SiteSet& sites, const DualPotential& psi,
                         Exec ex = Exec::parallel);

enum class NewtonMode {
    regularized,         // (|grad| I - H/2) d = grad, Armijo backtracking
    levenberg_marquardt, // adaptive c_k instead of |grad|
    pure                 // (-H/2) d = grad, t = 1, no safeguards
};

enum class SolveStatus {
    converged,
    max_iterations,
    line_search_failure,
    diverged // non-finite value encountered (pure mode has no safeguards)
};

struct SolveOptions {
    double tol_inf = 1e-7; // on max |grad_i|
    double tol_l2 = 0.0;   // optional extra rule on ||grad||_2; 0 disables
    int max_iter = 500;
    NewtonMode mode = NewtonMode::regularized;
    Exec exec = Exec::parallel;
    bool multiscale = false;       // coarse-to-fine warm start by site decimation
    std::ostream* trace = nullptr; // CSV rows: iter,grad2,gradinf,step,reg,mode,cg
};

struct SolveReport {
    SolveStatus status = SolveStatus::converged;
    int iterations = 0;
    bool quadratic_phase = false;
};

// Maximizes g; returns the state at exit with psi re-gauged to zero mean.
// Requires all weights > 0 (unique maximizer up to constants).
DualState solve_dual(const GridDensity& d, const SiteSet& sites, DualPotential psi0,
                     const SolveOptions& opt, SolveReport* report = nullptr);

// Spec'd short form: tol applies to ||grad||_inf.
DualState solve_dual(const GridDensity& d, const SiteSet& sites, DualPotential psi0,
                     double tol, SolveReport* report = nullptr);

} // namespace otsketch
