#pragma once

#include <cstdint>
#include <vector>

#include "otsketch/geom.hpp"

namespace otsketch {

// Discrete derivative operators acting on n planar points, row-wise 2-vectors.
// `second` is exactly A1' A1 for the matching topology (open endpoints produce
// the natural boundary rows x0-x1 and x_{n-1}-x_{n-2}). `first_pairs` is the
// block-diagonal first difference over disjoint consecutive pairs, used for
// dash segment sets.
enum class DiffKind { first_open, first_circular, second, first_pairs };

struct DiffOperator {
    DiffKind kind = DiffKind::first_open;
    int n = 0;
    bool circular = false; // topology used by `second`

    static DiffOperator first(int n, bool circular);
    static DiffOperator second_order(int n, bool circular);
    static DiffOperator pairs(int n);

    int rows() const;
    void apply(const std::vector<Vec2>& x, std::vector<Vec2>& y) const;
    void apply_transpose_add(const std::vector<Vec2>& y, std::vector<Vec2>& x) const;

    // ||A||_2, closed form (trigonometric singular values of the stencils;
    // circular first difference with even n gives exactly 2). Validated in
    // tests against power iteration and a dense SVD oracle.
    double operator_norm() const;
};

// Generic power iteration on A'A for validation and ad-hoc operators.
double power_iteration_norm(const DiffOperator& op, double tol = 1e-13,
                            int max_iter = 200000);

struct AdmissibleSet {
    enum class Kind { ball, sphere };
    Kind kind = Kind::ball;
    double alpha = 1.0;
    // Rows flagged here pass through the projection unchanged (used to exempt
    // the open-curve endpoint rows of the second-difference operator).
    std::vector<std::uint8_t> exempt;
};

// Project each row of a block onto the set (in place).
void project_admissible(std::vector<Vec2>& block, const AdmissibleSet& set);

struct Constraint {
    DiffOperator A;
    AdmissibleSet Y;
};

// X = { x : A_i x in Y_i rowwise, B x = b }.
struct ConstraintSystem {
    int n = 0;
    std::vector<Constraint> constraints;
    std::vector<std::vector<double>> B; // p dense rows, acting per coordinate
    std::vector<Vec2> b;

    int p() const { return int(B.size()); }
    void add_anchor(int index, Vec2 point);
    void add_mean(Vec2 point);
    void add_closure(); // x_0 = x_{n-1}
};

// Speed bound a1 and acceleration bound a2, both as row-balls.
ConstraintSystem kinematic_set(int n, bool circular, double a1, double a2);
// Fixed segment length a1 (row-sphere) and acceleration ball a2; endpoint
// rows of the second difference are exempt for open curves, where the sphere
// already pins their norm to a1.
ConstraintSystem geometric_set(int n, bool circular, double a1, double a2);

struct AdmmState {
    std::vector<Vec2> x;
    std::vector<std::vector<Vec2>> y;      // one block per constraint
    std::vector<std::vector<Vec2>> lambda; // scaled multipliers
    double beta = 5.0;
    double primal_res = 0.0;
    double dual_res = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct AdmmOptions {
    // Penalty weight, tuned empirically: small values underdamp the splitting
    // and the sphere (fixed-length) systems then stall short of feasibility.
    double beta = 5.0;
    double tol = 1e-6; // relative, on the standard scaled residuals
    int max_iter = 4000;
    const AdmmState* warm = nullptr;
};

// Euclidean projection of z onto the constraint system by ADMM with the
// gamma = ||A_i|| operator scaling. Convex systems converge to the unique
// projection; the nonconvex sphere case returns a feasible critical point.
// Throws SingularKkt when B is rank deficient.
AdmmState admm_project_state(const std::vector<Vec2>& z, const ConstraintSystem& cs,
                             const AdmmOptions& opt);

std::vector<Vec2> admm_project(const std::vector<Vec2>& z, const ConstraintSystem& cs,
                               double beta = 5.0, double tol = 1e-6);

struct Curve {
    std::vector<Vec2> pts;
    std::vector<double> weights;
    bool circular = false;
};

// Insert edge midpoints; every inherited weight is half the old one (midpoints
// average their two parents' halves). Circular curves keep the total exactly;
// open curves lose (w_first + w_last)/4 and are renormalized unless disabled.
Curve upsample_dyadic(const Curve& c, bool renormalize = true);

struct FeasibilityReport {
    double max_violation = 0.0;     // over all ball rows, max(||row|| - alpha)
    double max_sphere_dev = 0.0;    // over sphere rows, max | ||row|| - alpha |
    double max_equality_err = 0.0;  // max_k |B_k x - b_k|_inf
    bool ok(double tol) const {
        return max_violation <= tol && max_sphere_dev <= tol && max_equality_err <= tol;
    }
};

FeasibilityReport check_feasibility(const std::vector<Vec2>& x, const ConstraintSystem& cs);

} // namespace otsketch
