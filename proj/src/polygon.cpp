#include "otsketch/polygon.hpp"

#include <algorithm>
#include <limits>

namespace otsketch {

ConvexPolygon make_rect(Vec2 lo, Vec2 hi) {
    ConvexPolygon p;
    p.v = {lo, {hi.x, lo.y}, hi, {lo.x, hi.y}};
    return p;
}

ConvexPolygon unit_square() { return make_rect({0.0, 0.0}, {1.0, 1.0}); }

double polygon_area(const ConvexPolygon& p) {
    if (p.empty()) return 0.0;
    double a = 0.0;
    const auto& v = p.v;
    for (std::size_t i = 0, n = v.size(); i < n; ++i)
        a += cross(v[i], v[(i + 1) % n]);
    return 0.5 * a;
}

Vec2 polygon_centroid(const ConvexPolygon& p) {
    const auto& v = p.v;
    double a = 0.0;
    Vec2 c{0.0, 0.0};
    for (std::size_t i = 0, n = v.size(); i < n; ++i) {
        const Vec2 q = v[i], r = v[(i + 1) % n];
        const double w = cross(q, r);
        a += w;
        c += (q + r) * w;
    }
    if (a == 0.0) {
        // Degenerate sliver: fall back to the vertex mean.
        Vec2 m{0.0, 0.0};
        for (Vec2 q : v) m += q;
        return v.empty() ? m : m / double(v.size());
    }
    return c / (3.0 * a);
}

void polygon_bbox(const ConvexPolygon& p, Vec2& lo, Vec2& hi) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    lo = {inf, inf};
    hi = {-inf, -inf};
    for (Vec2 q : p.v) {
        lo.x = std::min(lo.x, q.x);
        lo.y = std::min(lo.y, q.y);
        hi.x = std::max(hi.x, q.x);
        hi.y = std::max(hi.y, q.y);
    }
}

bool polygon_contains(const ConvexPolygon& p, Vec2 q, double eps) {
    if (p.empty()) return false;
    const auto& v = p.v;
    for (std::size_t i = 0, n = v.size(); i < n; ++i) {
        const Vec2 a = v[i], b = v[(i + 1) % n];
        if (cross(b - a, q - a) < -eps * norm(b - a)) return false;
    }
    return true;
}

void clip_halfplane_labeled(std::vector<Vec2>& v, std::vector<int>& labels,
                            Vec2 n, double c, int new_label) {
    const std::size_t m = v.size();
    if (m == 0) return;

    static thread_local std::vector<Vec2> ov;
    static thread_local std::vector<int> ol;
    ov.clear();
    ol.clear();

    for (std::size_t i = 0; i < m; ++i) {
        const Vec2 a = v[i], b = v[(i + 1) % m];
        const int la = labels[i];
        const double da = c - dot(n, a);
        const double db = c - dot(n, b);
        if (da >= 0.0) {
            ov.push_back(a);
            ol.push_back(la);
            if (db < 0.0) {
                const double t = da / (da - db);
                ov.push_back(lerp(a, b, t));
                ol.push_back(new_label);
            }
        } else if (db >= 0.0) {
            const double t = da / (da - db);
            ov.push_back(lerp(a, b, t));
            ol.push_back(la);
        }
    }

    // Drop zero-length edges produced when the line passes through a vertex.
    v.clear();
    labels.clear();
    const std::size_t k = ov.size();
    for (std::size_t i = 0; i < k; ++i) {
        const Vec2 a = ov[i], b = ov[(i + 1) % k];
        if (dist2(a, b) <= 1e-30) continue;
        v.push_back(a);
        labels.push_back(ol[i]);
    }
    if (v.size() < 3) {
        v.clear();
        labels.clear();
    }
}

ConvexPolygon clip_halfplane(const ConvexPolygon& p, Vec2 n, double c) {
    std::vector<Vec2> v = p.v;
    std::vector<int> labels(v.size(), 0);
    clip_halfplane_labeled(v, labels, n, c, 0);
    return ConvexPolygon{std::move(v)};
}

ConvexPolygon clip_to_rect(const ConvexPolygon& p, Vec2 lo, Vec2 hi) {
    ConvexPolygon q = clip_halfplane(p, {1.0, 0.0}, hi.x);
    q = clip_halfplane(q, {-1.0, 0.0}, -lo.x);
    q = clip_halfplane(q, {0.0, 1.0}, hi.y);
    q = clip_halfplane(q, {0.0, -1.0}, -lo.y);
    return q;
}

double polygon_circumradius(const ConvexPolygon& p, Vec2 q) {
    double r2 = 0.0;
    for (Vec2 a : p.v) r2 = std::max(r2, dist2(a, q));
    return std::sqrt(r2);
}

} // namespace otsketch
