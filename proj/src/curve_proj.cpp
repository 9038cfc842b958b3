#include "otsketch/curve_proj.hpp"

#include <algorithm>
#include <cmath>

#include "otsketch/errors.hpp"

namespace otsketch {

DiffOperator DiffOperator::first(int n, bool circular) {
    if (n < 2) throw BadInput("DiffOperator: need n >= 2");
    return {circular ? DiffKind::first_circular : DiffKind::first_open, n, circular};
}

DiffOperator DiffOperator::second_order(int n, bool circular) {
    if (n < 2) throw BadInput("DiffOperator: need n >= 2");
    return {DiffKind::second, n, circular};
}

DiffOperator DiffOperator::pairs(int n) {
    if (n < 2 || n % 2 != 0) throw BadInput("DiffOperator: pairs needs even n");
    return {DiffKind::first_pairs, n, false};
}

int DiffOperator::rows() const {
    switch (kind) {
        case DiffKind::first_open: return n - 1;
        case DiffKind::first_circular: return n;
        case DiffKind::second: return n;
        case DiffKind::first_pairs: return n / 2;
    }
    return 0;
}

void DiffOperator::apply(const std::vector<Vec2>& x, std::vector<Vec2>& y) const {
    y.assign(std::size_t(rows()), {0.0, 0.0});
    switch (kind) {
        case DiffKind::first_open:
            for (int i = 0; i + 1 < n; ++i) y[i] = x[i + 1] - x[i];
            break;
        case DiffKind::first_circular:
            for (int i = 0; i < n; ++i) y[i] = x[(i + 1) % n] - x[i];
            break;
        case DiffKind::second:
            if (circular) {
                for (int i = 0; i < n; ++i)
                    y[i] = x[i] * 2.0 - x[(i + n - 1) % n] - x[(i + 1) % n];
            } else {
                y[0] = x[0] - x[1];
                for (int i = 1; i + 1 < n; ++i) y[i] = x[i] * 2.0 - x[i - 1] - x[i + 1];
                y[n - 1] = x[n - 1] - x[n - 2];
            }
            break;
        case DiffKind::first_pairs:
            for (int k = 0; 2 * k + 1 < n; ++k) y[k] = x[2 * k + 1] - x[2 * k];
            break;
    }
}

void DiffOperator::apply_transpose_add(const std::vector<Vec2>& y, std::vector<Vec2>& x) const {
    switch (kind) {
        case DiffKind::first_open:
            for (int i = 0; i + 1 < n; ++i) {
                x[i] -= y[i];
                x[i + 1] += y[i];
            }
            break;
        case DiffKind::first_circular:
            for (int i = 0; i < n; ++i) {
                x[i] -= y[i];
                x[(i + 1) % n] += y[i];
            }
            break;
        case DiffKind::second: { // symmetric
            std::vector<Vec2> t;
            apply(y, t);
            for (int i = 0; i < n; ++i) x[i] += t[i];
            break;
        }
        case DiffKind::first_pairs:
            for (int k = 0; 2 * k + 1 < n; ++k) {
                x[2 * k] -= y[k];
                x[2 * k + 1] += y[k];
            }
            break;
    }
}

double DiffOperator::operator_norm() const {
    const double pi = 3.14159265358979323846;
    switch (kind) {
        case DiffKind::first_open: return 2.0 * std::cos(pi / (2.0 * n));
        case DiffKind::first_circular:
            return n % 2 == 0 ? 2.0 : 2.0 * std::cos(pi / (2.0 * n));
        case DiffKind::second: {
            const double f = circular ? DiffOperator::first(n, true).operator_norm()
                                      : DiffOperator::first(n, false).operator_norm();
            return f * f;
        }
        case DiffKind::first_pairs: return std::sqrt(2.0);
    }
    return 0.0;
}

double power_iteration_norm(const DiffOperator& op, double tol, int max_iter) {
    std::vector<Vec2> v(std::size_t(op.n)), Av, w(std::size_t(op.n));
    std::uint64_t s = 0x9e3779b97f4a7c15ull;
    auto next = [&s]() {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        return double(s >> 11) * 0x1.0p-53;
    };
    for (auto& p : v) p = {next() - 0.5, 0.0};

    double lambda = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        double nv = 0.0;
        for (auto& p : v) nv += norm2(p);
        nv = std::sqrt(nv);
        for (auto& p : v) p = p / nv;

        op.apply(v, Av);
        for (auto& p : w) p = {0.0, 0.0};
        op.apply_transpose_add(Av, w);

        double ray = 0.0;
        for (int i = 0; i < op.n; ++i) ray += dot(v[i], w[i]);
        if (it > 0 && std::abs(ray - lambda) <= tol * std::max(ray, 1e-30)) {
            lambda = ray;
            break;
        }
        lambda = ray;
        v = w;
    }
    return std::sqrt(std::max(lambda, 0.0));
}

void project_admissible(std::vector<Vec2>& block, const AdmissibleSet& set) {
    const std::size_t m = block.size();
    for (std::size_t r = 0; r < m; ++r) {
        if (r < set.exempt.size() && set.exempt[r]) continue;
        Vec2& row = block[r];
        const double len = norm(row);
        if (set.kind == AdmissibleSet::Kind::ball) {
            if (len > set.alpha) row = row * (set.alpha / len);
        } else {
            row = len > 0.0 ? row * (set.alpha / len) : Vec2{set.alpha, 0.0};
        }
    }
}

void ConstraintSystem::add_anchor(int index, Vec2 point) {
    std::vector<double> row(std::size_t(n), 0.0);
    row[index] = 1.0;
    B.push_back(std::move(row));
    b.push_back(point);
}

void ConstraintSystem::add_mean(Vec2 point) {
    B.push_back(std::vector<double>(std::size_t(n), 1.0 / n));
    b.push_back(point);
}

void ConstraintSystem::add_closure() {
    std::vector<double> row(std::size_t(n), 0.0);
    row[0] = 1.0;
    row[std::size_t(n) - 1] = -1.0;
    B.push_back(std::move(row));
    b.push_back({0.0, 0.0});
}

ConstraintSystem kinematic_set(int n, bool circular, double a1, double a2) {
    ConstraintSystem cs;
    cs.n = n;
    cs.constraints.push_back({DiffOperator::first(n, circular),
                              {AdmissibleSet::Kind::ball, a1, {}}});
    cs.constraints.push_back({DiffOperator::second_order(n, circular),
                              {AdmissibleSet::Kind::ball, a2, {}}});
    return cs;
}

ConstraintSystem geometric_set(int n, bool circular, double a1, double a2) {
    ConstraintSystem cs;
    cs.n = n;
    cs.constraints.push_back({DiffOperator::first(n, circular),
                              {AdmissibleSet::Kind::sphere, a1, {}}});
    AdmissibleSet acc{AdmissibleSet::Kind::ball, a2, {}};
    if (!circular) {
        acc.exempt.assign(std::size_t(n), 0);
        acc.exempt.front() = 1;
        acc.exempt.back() = 1;
    }
    cs.constraints.push_back({DiffOperator::second_order(n, circular), acc});
    return cs;
}

namespace {

// Dense Cholesky for the small Schur complement; throws on rank deficiency.
struct SmallChol {
    int p = 0;
    std::vector<double> L; // row-major lower triangle

    void factor(const std::vector<std::vector<double>>& S) {
        p = int(S.size());
        L.assign(std::size_t(p) * p, 0.0);
        double scale = 1e-30;
        for (int i = 0; i < p; ++i) scale = std::max(scale, std::abs(S[i][i]));
        for (int i = 0; i < p; ++i) {
            for (int j = 0; j <= i; ++j) {
                double s = S[i][j];
                for (int k = 0; k < j; ++k) s -= L[i * p + k] * L[j * p + k];
                if (i == j) {
                    if (s <= 1e-12 * scale)
                        throw SingularKkt("admm_project: equality rows are rank deficient");
                    L[i * p + i] = std::sqrt(s);
                } else {
                    L[i * p + j] = s / L[j * p + j];
                }
            }
        }
    }

    void solve(std::vector<Vec2>& rhs) const {
        for (int i = 0; i < p; ++i) {
            Vec2 s = rhs[i];
            for (int k = 0; k < i; ++k) s -= rhs[k] * L[i * p + k];
            rhs[i] = s / L[i * p + i];
        }
        for (int i = p; i-- > 0;) {
            Vec2 s = rhs[i];
            for (int k = i + 1; k < p; ++k) s -= rhs[k] * L[k * p + i];
            rhs[i] = s / L[i * p + i];
        }
    }
};

struct XSolver {
    const ConstraintSystem* cs = nullptr;
    double beta = 1.0;
    std::vector<double> inv_gamma2;
    std::vector<std::vector<double>> Z; // M^{-1} B_k, scalar columns
    SmallChol chol;

    // y = (I + beta sum (1/g^2) A'A) x
    void apply_m(const std::vector<Vec2>& x, std::vector<Vec2>& y,
                 std::vector<Vec2>& scratch) const {
        y = x;
        for (std::size_t c = 0; c < cs->constraints.size(); ++c) {
            const DiffOperator& A = cs->constraints[c].A;
            A.apply(x, scratch);
            const double f = beta * inv_gamma2[c];
            for (auto& r : scratch) r *= f;
            A.apply_transpose_add(scratch, y);
        }
    }

    void cg(const std::vector<Vec2>& rhs, std::vector<Vec2>& x, double tol,
            int max_iter) const {
        const std::size_t n = rhs.size();
        std::vector<Vec2> r(n), pvec(n), Ap(n), scratch;
        apply_m(x, Ap, scratch);
        double rr = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            r[i] = rhs[i] - Ap[i];
            rr += norm2(r[i]);
        }
        pvec = r;
        double rhs_norm = 0.0;
        for (const auto& v : rhs) rhs_norm += norm2(v);
        const double stop2 = tol * tol * std::max(rhs_norm, 1e-300);
        for (int it = 0; it < max_iter && rr > stop2; ++it) {
            apply_m(pvec, Ap, scratch);
            double pAp = 0.0;
            for (std::size_t i = 0; i < n; ++i) pAp += dot(pvec[i], Ap[i]);
            if (!(pAp > 0.0)) break; // M is SPD; only a zero direction lands here
            const double alpha = rr / pAp;
            double rr_new = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                x[i] += pvec[i] * alpha;
                r[i] -= Ap[i] * alpha;
                rr_new += norm2(r[i]);
            }
            const double betacg = rr_new / rr;
            for (std::size_t i = 0; i < n; ++i) pvec[i] = r[i] + pvec[i] * betacg;
            rr = rr_new;
        }
    }

    void setup(const ConstraintSystem& sys, double beta_) {
        cs = &sys;
        beta = beta_;
        inv_gamma2.clear();
        for (const auto& c : sys.constraints) {
            const double g = c.A.operator_norm();
            inv_gamma2.push_back(1.0 / (g * g));
        }
        const int p = sys.p();
        Z.assign(std::size_t(p), {});
        if (p == 0) return;
        std::vector<std::vector<double>> S(std::size_t(p),
                                           std::vector<double>(std::size_t(p), 0.0));
        for (int k = 0; k < p; ++k) {
            std::vector<Vec2> rhs(std::size_t(sys.n)), zk(std::size_t(sys.n), {0.0, 0.0});
            for (int j = 0; j < sys.n; ++j) rhs[j] = {sys.B[k][j], 0.0};
            cg(rhs, zk, 1e-13, 4 * sys.n + 100);
            Z[k].resize(std::size_t(sys.n));
            for (int j = 0; j < sys.n; ++j) Z[k][j] = zk[j].x;
        }
        for (int k = 0; k < p; ++k)
            for (int l = 0; l <= k; ++l) {
                double s = 0.0;
                for (int j = 0; j < sys.n; ++j) s += sys.B[l][j] * Z[k][j];
                S[k][l] = S[l][k] = s;
            }
        chol.factor(S);
    }

    // argmin 1/2|x-z|^2 + beta/2 sum |Ahat x - y + l|^2  s.t. Bx = b
    void solve(const std::vector<Vec2>& z, const std::vector<std::vector<Vec2>>& y,
               const std::vector<std::vector<Vec2>>& lambda, std::vector<Vec2>& x) const {
        const std::size_t n = z.size();
        std::vector<Vec2> rhs = z;
        std::vector<Vec2> block;
        for (std::size_t c = 0; c < cs->constraints.size(); ++c) {
            const DiffOperator& A = cs->constraints[c].A;
            const double inv_g = std::sqrt(inv_gamma2[c]);
            block.resize(y[c].size());
            for (std::size_t r = 0; r < block.size(); ++r)
                block[r] = (y[c][r] - lambda[c][r]) * (beta * inv_g);
            A.apply_transpose_add(block, rhs);
        }
        cg(rhs, x, 1e-12, 4 * int(n) + 100);
        const int p = cs->p();
        if (p == 0) return;
        std::vector<Vec2> nu(std::size_t(p), Vec2{});
        for (int k = 0; k < p; ++k) {
            Vec2 s{0.0, 0.0};
            for (std::size_t j = 0; j < n; ++j) s += x[j] * cs->B[k][j];
            nu[k] = s - cs->b[k];
        }
        chol.solve(nu);
        for (int k = 0; k < p; ++k)
            for (std::size_t j = 0; j < n; ++j) x[j] -= nu[k] * Z[k][j];
    }
};

} // namespace

AdmmState admm_project_state(const std::vector<Vec2>& z, const ConstraintSystem& cs,
                             const AdmmOptions& opt) {
    if (int(z.size()) != cs.n) throw BadInput("admm_project: size mismatch");
    const std::size_t nc = cs.constraints.size();

    XSolver xs;
    xs.setup(cs, opt.beta);

    AdmmState st;
    st.beta = opt.beta;
    if (opt.warm && opt.warm->x.size() == z.size() && opt.warm->y.size() == nc) {
        st.x = opt.warm->x;
        st.y = opt.warm->y;
        st.lambda = opt.warm->lambda;
    } else {
        st.x = z;
        st.y.resize(nc);
        st.lambda.resize(nc);
        for (std::size_t c = 0; c < nc; ++c) {
            cs.constraints[c].A.apply(st.x, st.y[c]);
            const double inv_g = 1.0 / cs.constraints[c].A.operator_norm();
            for (auto& r : st.y[c]) r *= inv_g;
            st.lambda[c].assign(st.y[c].size(), {0.0, 0.0});
        }
    }

    std::vector<std::vector<Vec2>> Ax(nc), y_prev;
    std::vector<Vec2> dual_acc(z.size());

    for (st.iterations = 0; st.iterations < opt.max_iter; ++st.iterations) {
        // y-step: project A x_k + lambda_k onto the scaled sets
        y_prev = st.y;
        for (std::size_t c = 0; c < nc; ++c) {
            const DiffOperator& A = cs.constraints[c].A;
            const double g = A.operator_norm();
            A.apply(st.x, Ax[c]);
            for (auto& r : Ax[c]) r *= 1.0 / g;
            st.y[c] = Ax[c];
            for (std::size_t r = 0; r < st.y[c].size(); ++r) st.y[c][r] += st.lambda[c][r];
            AdmissibleSet scaled = cs.constraints[c].Y;
            scaled.alpha /= g;
            project_admissible(st.y[c], scaled);
        }

        // x-step with the fresh y, then multiplier update on the new x
        xs.solve(z, st.y, st.lambda, st.x);

        double r2 = 0.0, ax_norm2 = 0.0, y_norm2 = 0.0;
        for (std::size_t c = 0; c < nc; ++c) {
            const DiffOperator& A = cs.constraints[c].A;
            const double g = A.operator_norm();
            A.apply(st.x, Ax[c]);
            for (auto& r : Ax[c]) r *= 1.0 / g;
            for (std::size_t r = 0; r < Ax[c].size(); ++r) {
                const Vec2 diff = Ax[c][r] - st.y[c][r];
                st.lambda[c][r] += diff;
                r2 += norm2(diff);
                ax_norm2 += norm2(Ax[c][r]);
                y_norm2 += norm2(st.y[c][r]);
            }
        }

        for (auto& v : dual_acc) v = {0.0, 0.0};
        double lam_norm2 = 0.0;
        for (std::size_t c = 0; c < nc; ++c) {
            const DiffOperator& A = cs.constraints[c].A;
            const double g = A.operator_norm();
            std::vector<Vec2> dy(st.y[c].size());
            for (std::size_t r = 0; r < dy.size(); ++r)
                dy[r] = (st.y[c][r] - y_prev[c][r]) * (opt.beta / g);
            A.apply_transpose_add(dy, dual_acc);
            for (const auto& l : st.lambda[c]) lam_norm2 += norm2(l);
        }
        double s2 = 0.0;
        for (const auto& v : dual_acc) s2 += norm2(v);

        st.primal_res = std::sqrt(r2);
        st.dual_res = std::sqrt(s2);
        const double eps_pri =
            opt.tol * std::max({1.0, std::sqrt(ax_norm2), std::sqrt(y_norm2)});
        const double eps_dual = opt.tol * std::max(1.0, opt.beta * std::sqrt(lam_norm2));
        if (st.primal_res <= eps_pri && st.dual_res <= eps_dual) {
            st.converged = true;
            ++st.iterations;
            break;
        }
    }
    return st;
}

std::vector<Vec2> admm_project(const std::vector<Vec2>& z, const ConstraintSystem& cs,
                               double beta, double tol) {
    AdmmOptions opt;
    opt.beta = beta;
    opt.tol = tol;
    return admm_project_state(z, cs, opt).x;
}

Curve upsample_dyadic(const Curve& c, bool renormalize) {
    const std::size_t n = c.pts.size();
    if (n < 2) throw BadInput("upsample_dyadic: need at least 2 points");
    Curve out;
    out.circular = c.circular;
    const std::size_t edges = c.circular ? n : n - 1;
    out.pts.reserve(n + edges);
    out.weights.reserve(n + edges);
    for (std::size_t i = 0; i < n; ++i) {
        out.pts.push_back(c.pts[i]);
        out.weights.push_back(0.5 * c.weights[i]);
        if (i + 1 < n || c.circular) {
            const std::size_t j = (i + 1) % n;
            out.pts.push_back((c.pts[i] + c.pts[j]) * 0.5);
            out.weights.push_back(0.25 * (c.weights[i] + c.weights[j]));
        }
    }
    if (renormalize) {
        double sum = 0.0;
        for (double w : out.weights) sum += w;
        if (sum > 0.0)
            for (double& w : out.weights) w /= sum;
    }
    return out;
}

FeasibilityReport check_feasibility(const std::vector<Vec2>& x, const ConstraintSystem& cs) {
    FeasibilityReport rep;
    std::vector<Vec2> rows;
    for (const auto& c : cs.constraints) {
        c.A.apply(x, rows);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (r < c.Y.exempt.size() && c.Y.exempt[r]) continue;
            const double len = norm(rows[r]);
            if (c.Y.kind == AdmissibleSet::Kind::ball)
                rep.max_violation = std::max(rep.max_violation, len - c.Y.alpha);
            else
                rep.max_sphere_dev = std::max(rep.max_sphere_dev, std::abs(len - c.Y.alpha));
        }
    }
    for (int k = 0; k < cs.p(); ++k) {
        Vec2 s{0.0, 0.0};
        for (int j = 0; j < cs.n; ++j) s += x[j] * cs.B[k][j];
        s -= cs.b[k];
        rep.max_equality_err =
            std::max({rep.max_equality_err, std::abs(s.x), std::abs(s.y)});
    }
    return rep;
}

} // namespace otsketch
