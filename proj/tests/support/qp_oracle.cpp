#include "qp_oracle.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "otsketch/errors.hpp"

namespace otsketch::testsupport {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Dense row matrix of a DiffOperator (identical action per coordinate).
MatrixXd dense_rows(const DiffOperator& op) {
    const int m = op.rows(), n = op.n;
    MatrixXd A = MatrixXd::Zero(m, n);
    std::vector<Vec2> e(std::size_t(n), Vec2{}), y;
    for (int j = 0; j < n; ++j) {
        e[std::size_t(j)] = {1.0, 0.0};
        op.apply(e, y);
        for (int r = 0; r < m; ++r) A(r, j) = y[std::size_t(r)].x;
        e[std::size_t(j)] = {0.0, 0.0};
    }
    return A;
}

} // namespace

QpSolution qp_project(const std::vector<Vec2>& z, const ConstraintSystem& cs,
                      double gap_tol) {
    const int n = cs.n;
    if (int(z.size()) != n) throw BadInput("qp oracle: size mismatch");
    for (const auto& c : cs.constraints)
        if (c.Y.kind != AdmissibleSet::Kind::ball)
            throw BadInput("qp oracle: convex (ball) constraints only");

    // Stack the operators; remember (matrix, alpha, exempt) per constraint.
    struct Block {
        MatrixXd A;
        double alpha;
        std::vector<std::uint8_t> exempt;
    };
    std::vector<Block> blocks;
    int m_total = 0;
    for (const auto& c : cs.constraints) {
        Block b{dense_rows(c.A), c.Y.alpha, c.Y.exempt};
        m_total += int(b.A.rows());
        blocks.push_back(std::move(b));
    }

    const int p = cs.p();
    MatrixXd B = MatrixXd::Zero(p, n);
    MatrixXd bb = MatrixXd::Zero(p, 2);
    for (int k = 0; k < p; ++k) {
        for (int j = 0; j < n; ++j) B(k, j) = cs.B[std::size_t(k)][std::size_t(j)];
        bb(k, 0) = cs.b[std::size_t(k)].x;
        bb(k, 1) = cs.b[std::size_t(k)].y;
    }

    // x stored as an n x 2 matrix (columns: x and y coordinates).
    MatrixXd Z(n, 2);
    for (int j = 0; j < n; ++j) {
        Z(j, 0) = z[std::size_t(j)].x;
        Z(j, 1) = z[std::size_t(j)].y;
    }

    // Strictly feasible start: minimize sum |A_c x|^2 subject to Bx = b.
    MatrixXd X;
    {
        MatrixXd Q = MatrixXd::Identity(n, n) * 1e-9;
        for (const auto& b : blocks) Q += b.A.transpose() * b.A;
        MatrixXd kkt = MatrixXd::Zero(n + p, n + p);
        kkt.topLeftCorner(n, n) = Q;
        if (p) {
            kkt.topRightCorner(n, p) = B.transpose();
            kkt.bottomLeftCorner(p, n) = B;
        }
        MatrixXd rhs = MatrixXd::Zero(n + p, 2);
        if (p) rhs.bottomRows(p) = bb;
        const MatrixXd sol = kkt.partialPivLu().solve(rhs);
        X = sol.topRows(n);
    }

    auto slacks = [&](const MatrixXd& x, std::vector<VectorXd>& s) {
        s.clear();
        for (const auto& b : blocks) {
            const MatrixXd U = b.A * x; // rows x 2
            VectorXd sv(U.rows());
            for (int r = 0; r < U.rows(); ++r) {
                if (!b.exempt.empty() && b.exempt[std::size_t(r)]) {
                    sv(r) = 1.0; // exempt rows contribute no barrier
                    continue;
                }
                sv(r) = b.alpha * b.alpha - U(r, 0) * U(r, 0) - U(r, 1) * U(r, 1);
            }
            s.push_back(std::move(sv));
        }
    };

    std::vector<VectorXd> s0;
    slacks(X, s0);
    for (const auto& sv : s0)
        for (int r = 0; r < sv.size(); ++r)
            if (!(sv(r) > 0.0)) throw BadInput("qp oracle: no strictly feasible start");

    double t = 1.0;
    const double mu = 20.0;
    while (true) {
        // Newton center f_t(x) = t/2 |x-z|^2 + barrier, subject to Bx = b.
        for (int newton = 0; newton < 80; ++newton) {
            std::vector<VectorXd> s;
            slacks(X, s);

            MatrixXd grad = t * (X - Z); // n x 2
            // Hessian acts on the 2n-vector; block structure
            // [Hxx Hxy; Hxy Hyy] with each block n x n.
            MatrixXd Hxx = t * MatrixXd::Identity(n, n);
            MatrixXd Hyy = Hxx, Hxy = MatrixXd::Zero(n, n);
            for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
                const auto& b = blocks[bi];
                const MatrixXd U = b.A * X;
                for (int r = 0; r < U.rows(); ++r) {
                    if (!b.exempt.empty() && b.exempt[std::size_t(r)]) continue;
                    const double sr = s[bi](r), u = U(r, 0), v = U(r, 1);
                    const VectorXd a = b.A.row(r).transpose();
                    grad.col(0) += (2.0 * u / sr) * a;
                    grad.col(1) += (2.0 * v / sr) * a;
                    const MatrixXd aa = a * a.transpose();
                    Hxx += (2.0 / sr + 4.0 * u * u / (sr * sr)) * aa;
                    Hyy += (2.0 / sr + 4.0 * v * v / (sr * sr)) * aa;
                    Hxy += (4.0 * u * v / (sr * sr)) * aa;
                }
            }

            MatrixXd kkt = MatrixXd::Zero(2 * n + 2 * p, 2 * n + 2 * p);
            kkt.block(0, 0, n, n) = Hxx;
            kkt.block(n, n, n, n) = Hyy;
            kkt.block(0, n, n, n) = Hxy;
            kkt.block(n, 0, n, n) = Hxy;
            VectorXd rhs(2 * n + 2 * p);
            rhs.head(n) = -grad.col(0);
            rhs.segment(n, n) = -grad.col(1);
            if (p) {
                kkt.block(2 * n, 0, p, n) = B;
                kkt.block(0, 2 * n, n, p) = B.transpose();
                kkt.block(2 * n + p, n, p, n) = B;
                kkt.block(n, 2 * n + p, n, p) = B.transpose();
                rhs.tail(2 * p).setZero();
            }
            const VectorXd sol = kkt.partialPivLu().solve(rhs);
            MatrixXd dX(n, 2);
            dX.col(0) = sol.head(n);
            dX.col(1) = sol.segment(n, n);

            // Newton decrement^2 = -grad . dx (H dx = -grad on the x slice)
            const double dec2 = grad.col(0).dot(-dX.col(0)) + grad.col(1).dot(-dX.col(1));

            // backtrack to stay strictly feasible and decrease f_t
            double step = 1.0;
            std::vector<VectorXd> strial;
            for (int ls = 0; ls < 60; ++ls) {
                slacks(X + step * dX, strial);
                bool ok = true;
                for (const auto& sv : strial)
                    for (int r = 0; r < sv.size(); ++r)
                        if (!(sv(r) > 0.0)) ok = false;
                if (ok) break;
                step *= 0.5;
            }
            X += step * dX;
            if (dec2 < 1e-18) break;
        }
        if (double(m_total) / t < gap_tol) break;
        t *= mu;
        if (t > 1e16) break;
    }

    QpSolution out;
    out.x.resize(std::size_t(n), Vec2{});
    for (int j = 0; j < n; ++j) out.x[std::size_t(j)] = {X(j, 0), X(j, 1)};
    out.objective = 0.5 * (X - Z).squaredNorm();
    out.gap = double(m_total) / t;
    return out;
}

} // namespace otsketch::testsupport
