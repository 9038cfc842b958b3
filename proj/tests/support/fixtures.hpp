#pragma once

#include <algorithm>
#include <random>
#include <vector>

#include "otsketch/grid_density.hpp"
#include "otsketch/polygon.hpp"

namespace otsketch::testsupport {

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64{seed}; }

inline GridDensity random_density(std::mt19937_64& g, int w, int h, double lo = 0.05,
                                  double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> s(std::size_t(w + 1) * (h + 1));
    for (double& x : s) x = u(g);
    return GridDensity(w, h, std::move(s));
}

// Andrew's monotone chain; returns CCW hull.
inline std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
    std::sort(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    const std::size_t n = pts.size();
    if (n < 3) return pts;
    std::vector<Vec2> h(2 * n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (k >= 2 && cross(h[k - 1] - h[k - 2], pts[i] - h[k - 2]) <= 0.0) --k;
        h[k++] = pts[i];
    }
    const std::size_t lower = k + 1;
    for (std::size_t i = n - 1; i-- > 0;) {
        while (k >= lower && cross(h[k - 1] - h[k - 2], pts[i] - h[k - 2]) <= 0.0) --k;
        h[k++] = pts[i];
    }
    h.resize(k - 1);
    return h;
}

// Convex hull of a handful of random points inside a random sub-box of the
// unit square; retries until a proper polygon comes out.
inline ConvexPolygon random_convex_polygon(std::mt19937_64& g) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::uniform_int_distribution<int> nk(4, 12);
    for (;;) {
        const double cx = 0.2 + 0.6 * u01(g), cy = 0.2 + 0.6 * u01(g);
        const double rx = 0.02 + 0.28 * u01(g), ry = 0.02 + 0.28 * u01(g);
        const int k = nk(g);
        std::vector<Vec2> pts;
        pts.reserve(k);
        for (int i = 0; i < k; ++i)
            pts.push_back(clamp01(Vec2{cx + rx * (2.0 * u01(g) - 1.0),
                                       cy + ry * (2.0 * u01(g) - 1.0)}));
        std::vector<Vec2> hull = convex_hull(std::move(pts));
        if (hull.size() >= 3) return ConvexPolygon{std::move(hull)};
    }
}

} // namespace otsketch::testsupport
