#include "quadrature_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace otsketch::testsupport {

namespace {

constexpr double kGl3Node[3] = {0.11270166537925831, 0.5, 0.88729833462074169};
constexpr double kGl3Weight[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

// Dunavant 7-point rule, exact through degree 5, barycentric form.
struct TriNode {
    double a, b, w;
};
constexpr TriNode kTri7[7] = {
    {1.0 / 3.0, 1.0 / 3.0, 0.225},
    {0.059715871789770, 0.470142064105115, 0.132394152788506},
    {0.470142064105115, 0.059715871789770, 0.132394152788506},
    {0.470142064105115, 0.470142064105115, 0.132394152788506},
    {0.797426985353087, 0.101286507323456, 0.125939180544827},
    {0.101286507323456, 0.797426985353087, 0.125939180544827},
    {0.101286507323456, 0.101286507323456, 0.125939180544827},
};

double bilinear(const GridDensity& d, double x, double y) {
    x = clamp01(x);
    y = clamp01(y);
    int cx = std::min(int(std::floor(x * d.width())), d.width() - 1);
    int cy = std::min(int(std::floor(y * d.height())), d.height() - 1);
    if (cx < 0) cx = 0;
    if (cy < 0) cy = 0;
    const double u = x * d.width() - cx, v = y * d.height() - cy;
    return (1.0 - u) * (1.0 - v) * d.sample(cx, cy) + u * (1.0 - v) * d.sample(cx + 1, cy) +
           (1.0 - u) * v * d.sample(cx, cy + 1) + u * v * d.sample(cx + 1, cy + 1);
}

// Local Sutherland-Hodgman against one halfplane keep-side n.p <= c.
void clip(std::vector<Vec2>& poly, Vec2 n, double c) {
    std::vector<Vec2> out;
    const std::size_t m = poly.size();
    for (std::size_t i = 0; i < m; ++i) {
        const Vec2 a = poly[i], b = poly[(i + 1) % m];
        const double da = c - dot(n, a), db = c - dot(n, b);
        if (da >= 0.0) {
            out.push_back(a);
            if (db < 0.0) out.push_back(lerp(a, b, da / (da - db)));
        } else if (db >= 0.0) {
            out.push_back(lerp(a, b, da / (da - db)));
        }
    }
    poly = std::move(out);
    if (poly.size() < 3) poly.clear();
}

void clip_rect(std::vector<Vec2>& poly, double xa, double xb, double ya, double yb) {
    clip(poly, {1.0, 0.0}, xb);
    if (poly.empty()) return;
    clip(poly, {-1.0, 0.0}, -xa);
    if (poly.empty()) return;
    clip(poly, {0.0, 1.0}, yb);
    if (poly.empty()) return;
    clip(poly, {0.0, -1.0}, -ya);
}

bool point_in_convex(const std::vector<Vec2>& poly, Vec2 q) {
    const std::size_t m = poly.size();
    for (std::size_t i = 0; i < m; ++i) {
        const Vec2 a = poly[i], b = poly[(i + 1) % m];
        if (cross(b - a, q - a) < 1e-14) return false; // strict: boundary rejected
    }
    return true;
}

void accumulate_triangle(const GridDensity& d, Vec2 p0, Vec2 p1, Vec2 p2, OracleMoments& m) {
    const double area = 0.5 * cross(p1 - p0, p2 - p0);
    if (area == 0.0) return;
    for (const TriNode& n : kTri7) {
        const double c = 1.0 - n.a - n.b;
        const Vec2 p = p0 * n.a + p1 * n.b + p2 * c;
        const double rho = bilinear(d, p.x, p.y) * n.w * area;
        m.mass += rho;
        m.mx += rho * p.x;
        m.my += rho * p.y;
        m.second += rho * (p.x * p.x + p.y * p.y);
    }
}

void accumulate_polygon_by_cells(const GridDensity& d, const std::vector<Vec2>& piece,
                                 OracleMoments& m) {
    if (piece.empty()) return;
    double xlo = piece[0].x, xhi = xlo, ylo = piece[0].y, yhi = ylo;
    for (Vec2 q : piece) {
        xlo = std::min(xlo, q.x);
        xhi = std::max(xhi, q.x);
        ylo = std::min(ylo, q.y);
        yhi = std::max(yhi, q.y);
    }
    const int cx0 = std::max(0, int(std::floor(xlo * d.width() - 1e-12)));
    const int cx1 = std::min(d.width() - 1, int(std::floor(xhi * d.width() + 1e-12)));
    const int cy0 = std::max(0, int(std::floor(ylo * d.height() - 1e-12)));
    const int cy1 = std::min(d.height() - 1, int(std::floor(yhi * d.height() + 1e-12)));
    for (int cy = cy0; cy <= cy1; ++cy) {
        for (int cx = cx0; cx <= cx1; ++cx) {
            std::vector<Vec2> part = piece;
            clip_rect(part, double(cx) / d.width(), double(cx + 1) / d.width(),
                      double(cy) / d.height(), double(cy + 1) / d.height());
            for (std::size_t k = 2; k < part.size(); ++k)
                accumulate_triangle(d, part[0], part[k - 1], part[k], m);
        }
    }
}

// Closed-form moments of one bilinear patch over a rectangle that lies inside
// a single density cell: separable 1-D Gauss products (degree <= 3 per axis).
void accumulate_rect_in_cell(const GridDensity& d, int cx, int cy, double xa, double xb,
                             double ya, double yb, OracleMoments& m) {
    double ix[2][3]; // ix[corner u-side][power p] = integral x^p * phi(u(x)) dx
    double iy[2][3];
    const double wx = xb - xa, wy = yb - ya;
    for (int p = 0; p < 3; ++p) {
        ix[0][p] = ix[1][p] = iy[0][p] = iy[1][p] = 0.0;
    }
    for (int g = 0; g < 3; ++g) {
        const double x = xa + wx * kGl3Node[g];
        const double u = x * d.width() - cx;
        const double y = ya + wy * kGl3Node[g];
        const double v = y * d.height() - cy;
        double xp = 1.0, yp = 1.0;
        for (int p = 0; p < 3; ++p) {
            ix[0][p] += kGl3Weight[g] * wx * xp * (1.0 - u);
            ix[1][p] += kGl3Weight[g] * wx * xp * u;
            iy[0][p] += kGl3Weight[g] * wy * yp * (1.0 - v);
            iy[1][p] += kGl3Weight[g] * wy * yp * v;
            xp *= x;
            yp *= y;
        }
    }
    const double s[2][2] = {{d.sample(cx, cy), d.sample(cx, cy + 1)},
                            {d.sample(cx + 1, cy), d.sample(cx + 1, cy + 1)}};
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            const double sc = s[a][b];
            m.mass += sc * ix[a][0] * iy[b][0];
            m.mx += sc * ix[a][1] * iy[b][0];
            m.my += sc * ix[a][0] * iy[b][1];
            m.second += sc * (ix[a][2] * iy[b][0] + ix[a][0] * iy[b][2]);
        }
    }
}

} // namespace

OracleMoments oracle_polygon_moments(const GridDensity& d, const ConvexPolygon& p, int subdiv) {
    OracleMoments m;
    if (p.empty()) return m;
    Vec2 lo, hi;
    polygon_bbox(p, lo, hi);
    lo = clamp01(lo);
    hi = clamp01(hi);
    if (hi.x <= lo.x || hi.y <= lo.y) return m;

    const double sx = (hi.x - lo.x) / subdiv, sy = (hi.y - lo.y) / subdiv;
    for (int j = 0; j < subdiv; ++j) {
        const double ya = lo.y + j * sy, yb = j + 1 == subdiv ? hi.y : ya + sy;
        for (int i = 0; i < subdiv; ++i) {
            const double xa = lo.x + i * sx, xb = i + 1 == subdiv ? hi.x : xa + sx;

            const int cx = std::min(int(std::floor(0.5 * (xa + xb) * d.width())), d.width() - 1);
            const int cy =
                std::min(int(std::floor(0.5 * (ya + yb) * d.height())), d.height() - 1);
            const bool one_cell = xa >= double(cx) / d.width() - 1e-13 &&
                                  xb <= double(cx + 1) / d.width() + 1e-13 &&
                                  ya >= double(cy) / d.height() - 1e-13 &&
                                  yb <= double(cy + 1) / d.height() + 1e-13;
            if (one_cell && point_in_convex(p.v, {xa, ya}) && point_in_convex(p.v, {xb, ya}) &&
                point_in_convex(p.v, {xa, yb}) && point_in_convex(p.v, {xb, yb})) {
                accumulate_rect_in_cell(d, cx, cy, xa, xb, ya, yb, m);
            } else {
                std::vector<Vec2> piece = p.v;
                clip_rect(piece, xa, xb, ya, yb);
                accumulate_polygon_by_cells(d, piece, m);
            }
        }
    }
    return m;
}

double oracle_polygon_mass(const GridDensity& d, const ConvexPolygon& p, int subdiv) {
    return oracle_polygon_moments(d, p, subdiv).mass;
}

Vec2 oracle_barycenter(const GridDensity& d, const ConvexPolygon& p, int subdiv) {
    const OracleMoments m = oracle_polygon_moments(d, p, subdiv);
    return {m.mx / m.mass, m.my / m.mass};
}

double oracle_cost(const GridDensity& d, const ConvexPolygon& p, Vec2 site, int subdiv) {
    const OracleMoments m = oracle_polygon_moments(d, p, subdiv);
    return m.second - 2.0 * (site.x * m.mx + site.y * m.my) + norm2(site) * m.mass;
}

double oracle_edge_integral(const GridDensity& d, Vec2 a, Vec2 b, int pieces) {
    const double len = dist(a, b);
    if (len == 0.0) return 0.0;
    double total = 0.0;
    for (int k = 0; k < pieces; ++k) {
        const double t0 = double(k) / pieces, dt = 1.0 / pieces;
        for (int g = 0; g < 3; ++g) {
            const Vec2 p = lerp(a, b, t0 + dt * kGl3Node[g]);
            total += dt * kGl3Weight[g] * bilinear(d, p.x, p.y);
        }
    }
    return len * total;
}

} // namespace otsketch::testsupport
