#include "otsketch/grid_density.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "otsketch/errors.hpp"

namespace otsketch {

namespace {

// 3-node Gauss-Legendre on [0,1]: exact through degree 5.
constexpr double kGlNode[3] = {0.11270166537925831, 0.5, 0.88729833462074169};
constexpr double kGlWeight[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

inline int cell_index(double coord, int cells, double& frac) {
    double scaled = coord * cells;
    int c = int(std::floor(scaled));
    if (c < 0) c = 0;
    if (c > cells - 1) c = cells - 1;
    frac = scaled - c;
    if (frac < 0.0) frac = 0.0;
    if (frac > 1.0) frac = 1.0;
    return c;
}

// Breakpoints where the segment a->b crosses grid lines i/cells, plus 0 and 1.
void grid_breaks(double a, double b, int cells, std::vector<double>& ts) {
    const double d = b - a;
    if (d == 0.0) return;
    const double lo = std::min(a, b), hi = std::max(a, b);
    const int i0 = int(std::floor(lo * cells)) + 1;
    const int i1 = int(std::ceil(hi * cells)) - 1;
    for (int i = i0; i <= i1; ++i) {
        const double t = (double(i) / cells - a) / d;
        if (t > 0.0 && t < 1.0) ts.push_back(t);
    }
}

} // namespace

GridDensity::GridDensity(int width, int height, std::vector<double> samples)
    : width_(width), height_(height), samples_(std::move(samples)) {
    if (width_ < 1 || height_ < 1)
        throw BadInput("GridDensity: grid must have at least one cell per axis");
    if (samples_.size() != std::size_t(width_ + 1) * (height_ + 1))
        throw BadInput("GridDensity: sample count does not match grid");
    for (double s : samples_) {
        if (!std::isfinite(s) || s < 0.0)
            throw BadInput("GridDensity: samples must be finite and nonnegative");
        max_sample_ = std::max(max_sample_, s);
    }
    build_prefix();
}

GridDensity GridDensity::constant(double value, int width, int height) {
    return GridDensity(width, height,
                       std::vector<double>(std::size_t(width + 1) * (height + 1), value));
}

void GridDensity::build_prefix() {
    const int nx = width_ + 1, ny = height_ + 1;
    const double h = 1.0 / width_;
    pre0_.assign(std::size_t(nx) * ny, 0.0);
    pre1_.assign(std::size_t(nx) * ny, 0.0);
    pre2_.assign(std::size_t(nx) * ny, 0.0);
    for (int j = 0; j < ny; ++j) {
        const std::size_t row = std::size_t(j) * nx;
        for (int i = 0; i < width_; ++i) {
            const double s0 = samples_[row + i], s1 = samples_[row + i + 1];
            const double a = i * h;
            const double i0 = 0.5 * (s0 + s1);
            const double i1 = (s0 + 2.0 * s1) / 6.0;
            const double i2 = (s0 + 3.0 * s1) / 12.0;
            pre0_[row + i + 1] = pre0_[row + i] + h * i0;
            pre1_[row + i + 1] = pre1_[row + i] + h * (a * i0 + h * i1);
            pre2_[row + i + 1] = pre2_[row + i] + h * (a * a * i0 + 2.0 * a * h * i1 + h * h * i2);
        }
    }

    total_mass_ = 0.0;
    const double hy = 1.0 / height_;
    for (int j = 0; j < height_; ++j) {
        const std::size_t r0 = std::size_t(j) * nx, r1 = r0 + nx;
        // integral over the row band of rho = hy * avg of the two row prefixes
        total_mass_ += 0.5 * hy * (pre0_[r0 + width_] + pre0_[r1 + width_]);
    }
}

double GridDensity::value_at(Vec2 p) const {
    double u, v;
    const int cx = cell_index(clamp01(p.x), width_, u);
    const int cy = cell_index(clamp01(p.y), height_, v);
    const std::size_t r0 = std::size_t(cy) * (width_ + 1) + cx;
    const std::size_t r1 = r0 + (width_ + 1);
    const double bot = samples_[r0] * (1.0 - u) + samples_[r0 + 1] * u;
    const double top = samples_[r1] * (1.0 - u) + samples_[r1 + 1] * u;
    return bot * (1.0 - v) + top * v;
}

GridDensity GridDensity::normalized() const {
    if (!(total_mass_ > 0.0))
        throw ZeroMassDensity("normalized: density has zero total mass");
    std::vector<double> s = samples_;
    const double inv = 1.0 / total_mass_;
    for (double& x : s) x *= inv;
    return GridDensity(width_, height_, std::move(s));
}

void GridDensity::accumulate_edge(Vec2 a, Vec2 b, EdgeAccum& acc) const {
    const double dy = b.y - a.y;
    if (dy == 0.0) return;

    static thread_local std::vector<double> ts;
    ts.clear();
    ts.push_back(0.0);
    ts.push_back(1.0);
    grid_breaks(a.x, b.x, width_, ts);
    grid_breaks(a.y, b.y, height_, ts);
    std::sort(ts.begin(), ts.end());

    const int nx = width_ + 1;
    const double hx = 1.0 / width_;

    for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
        const double t0 = ts[k], t1 = ts[k + 1];
        const double dt = t1 - t0;
        if (dt <= 1e-15) continue;
        // One bilinear patch covers the whole piece; pick it at the midpoint.
        const Vec2 pm = lerp(a, b, 0.5 * (t0 + t1));
        double um, vm;
        const int cx = cell_index(clamp01(pm.x), width_, um);
        const int cy = cell_index(clamp01(pm.y), height_, vm);
        const double x0 = cx * hx;
        const std::size_t r0 = std::size_t(cy) * nx;
        const std::size_t r1 = r0 + nx;

        for (int g = 0; g < 3; ++g) {
            const Vec2 p = lerp(a, b, t0 + dt * kGlNode[g]);
            const double x = clamp01(p.x), y = clamp01(p.y);
            double u = x * width_ - cx;
            u = u < 0.0 ? 0.0 : (u > 1.0 ? 1.0 : u);
            double v = y * height_ - cy;
            v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);

            // V_k(x, y) = integral of t^k rho(t, y) dt over [0, x], where rho
            // along row j is linear in each cell: prefix value at the cell's
            // left edge plus the in-cell remainder.
            double V0, V1, V2;
            {
                const double sb0 = samples_[r0 + cx], sb1 = samples_[r0 + cx + 1];
                const double st0 = samples_[r1 + cx], st1 = samples_[r1 + cx + 1];
                const double u2 = u * u, u3 = u2 * u, u4 = u3 * u;

                const double db = sb1 - sb0, dtp = st1 - st0;
                const double b0 = sb0 * u + 0.5 * db * u2;
                const double b1 = 0.5 * sb0 * u2 + db * u3 / 3.0;
                const double b2 = sb0 * u3 / 3.0 + 0.25 * db * u4;
                const double q0 = st0 * u + 0.5 * dtp * u2;
                const double q1 = 0.5 * st0 * u2 + dtp * u3 / 3.0;
                const double q2 = st0 * u3 / 3.0 + 0.25 * dtp * u4;

                const double B0 = pre0_[r0 + cx] + hx * b0;
                const double B1 = pre1_[r0 + cx] + hx * (x0 * b0 + hx * b1);
                const double B2 =
                    pre2_[r0 + cx] + hx * (x0 * x0 * b0 + 2.0 * x0 * hx * b1 + hx * hx * b2);
                const double T0 = pre0_[r1 + cx] + hx * q0;
                const double T1 = pre1_[r1 + cx] + hx * (x0 * q0 + hx * q1);
                const double T2 =
                    pre2_[r1 + cx] + hx * (x0 * x0 * q0 + 2.0 * x0 * hx * q1 + hx * hx * q2);

                V0 = B0 * (1.0 - v) + T0 * v;
                V1 = B1 * (1.0 - v) + T1 * v;
                V2 = B2 * (1.0 - v) + T2 * v;
            }

            const double w = kGlWeight[g] * dt * dy;
            acc.mass += w * V0;
            acc.mx += w * V1;
            acc.my += w * y * V0;
            acc.second += w * (V2 + y * y * V0);
        }
    }
}

PolyMoments GridDensity::polygon_moments(const ConvexPolygon& p) const {
    EdgeAccum acc;
    const auto& v = p.v;
    for (std::size_t i = 0, n = v.size(); i < n; ++i)
        accumulate_edge(v[i], v[(i + 1) % n], acc);
    return {acc.mass, acc.mx, acc.my, acc.second};
}

double GridDensity::polygon_mass(const ConvexPolygon& p) const {
    return polygon_moments(p).mass;
}

Vec2 GridDensity::polygon_barycenter(const ConvexPolygon& p) const {
    const PolyMoments m = polygon_moments(p);
    if (!(m.mass > 0.0))
        throw EmptyCellEncountered("polygon_barycenter: cell carries no mass");
    return {m.mx / m.mass, m.my / m.mass};
}

double GridDensity::polygon_cost(const ConvexPolygon& p, Vec2 site) const {
    const PolyMoments m = polygon_moments(p);
    return m.second - 2.0 * (site.x * m.mx + site.y * m.my) + norm2(site) * m.mass;
}

double GridDensity::edge_density_integral(Vec2 a, Vec2 b) const {
    const double len = dist(a, b);
    if (len == 0.0) return 0.0;

    static thread_local std::vector<double> ts;
    ts.clear();
    ts.push_back(0.0);
    ts.push_back(1.0);
    grid_breaks(a.x, b.x, width_, ts);
    grid_breaks(a.y, b.y, height_, ts);
    std::sort(ts.begin(), ts.end());

    double total = 0.0;
    for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
        const double dt = ts[k + 1] - ts[k];
        if (dt <= 1e-15) continue;
        double piece = 0.0;
        for (int g = 0; g < 3; ++g)
            piece += kGlWeight[g] * value_at(lerp(a, b, ts[k] + dt * kGlNode[g]));
        total += dt * piece;
    }
    return len * total;
}

} // namespace otsketch
