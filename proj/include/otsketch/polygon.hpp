#pragma once

#include <vector>

#include "otsketch/geom.hpp"

namespace otsketch {

// Convex polygon, vertices in CCW order. An empty vertex list is the empty set.
struct ConvexPolygon {
    std::vector<Vec2> v;

    bool empty() const { return v.size() < 3; }
    std::size_t size() const { return v.size(); }
};

ConvexPolygon make_rect(Vec2 lo, Vec2 hi);
ConvexPolygon unit_square();

double polygon_area(const ConvexPolygon& p);
Vec2 polygon_centroid(const ConvexPolygon& p); // area centroid; undefined on empty input
void polygon_bbox(const ConvexPolygon& p, Vec2& lo, Vec2& hi);

// Signed slack of the containment test: min over edges of the inward distance.
// Nonnegative means inside (within eps of the boundary counts as inside).
bool polygon_contains(const ConvexPolygon& p, Vec2 q, double eps = 0.0);

// Keep the side n.x <= c.
ConvexPolygon clip_halfplane(const ConvexPolygon& p, Vec2 n, double c);

// Same clip but with per-edge labels carried through; edges created on the
// cutting line get new_label. labels[k] describes the edge v[k] -> v[k+1].
void clip_halfplane_labeled(std::vector<Vec2>& v, std::vector<int>& labels,
                            Vec2 n, double c, int new_label);

ConvexPolygon clip_to_rect(const ConvexPolygon& p, Vec2 lo, Vec2 hi);

// Max distance from q to a vertex (radius of the enclosing circle about q).
double polygon_circumradius(const ConvexPolygon& p, Vec2 q);

} // namespace otsketch
