#pragma once

#include <vector>

#include "otsketch/geom.hpp"
#include "otsketch/polygon.hpp"

namespace otsketch {

// Moments of a density over a polygon: integrals of 1, x, y and x^2+y^2.
struct PolyMoments {
    double mass = 0.0;
    double mx = 0.0;
    double my = 0.0;
    double second = 0.0;
};

// Piecewise-bilinear density on a regular grid over [0,1]^2.
//
// width x height counts cells; samples live on the (width+1) x (height+1)
// nodes, row-major with x fastest. All polygon integrals are evaluated in
// closed form: with V_k(x,y) = integral of t^k rho(t,y) for t in [0,x],
// Green's formula turns each area integral into a boundary integral of V_k
// (plus y powers) over the polygon edges. Edges are split at grid lines so
// each piece sees one bilinear patch; there the integrand is a polynomial of
// degree <= 5 in the edge parameter and a 3-node Gauss-Legendre rule is exact.
class GridDensity {
public:
    GridDensity(int width, int height, std::vector<double> samples);

    static GridDensity constant(double value = 1.0, int width = 1, int height = 1);

    int width() const { return width_; }
    int height() const { return height_; }
    double sample(int i, int j) const { return samples_[std::size_t(j) * (width_ + 1) + i]; }
    const std::vector<double>& samples() const { return samples_; }
    double max_sample() const { return max_sample_; }

    // Bilinear interpolation; coordinates are clamped to [0,1].
    double value_at(Vec2 p) const;

    double total_mass() const { return total_mass_; }

    // Scaled copy with unit total mass; throws ZeroMassDensity if the density
    // vanishes identically.
    GridDensity normalized() const;

    // Exact moments over a convex polygon clipped to nothing (the caller is
    // expected to pass polygons inside [0,1]^2; coordinates are clamped).
    PolyMoments polygon_moments(const ConvexPolygon& p) const;
    double polygon_mass(const ConvexPolygon& p) const;
    // Throws EmptyCellEncountered when the polygon carries no mass.
    Vec2 polygon_barycenter(const ConvexPolygon& p) const;
    // integral over p of |x - site|^2 rho(x) dx
    double polygon_cost(const ConvexPolygon& p, Vec2 site) const;

    // Line integral of rho along segment [a,b] (arc-length measure).
    double edge_density_integral(Vec2 a, Vec2 b) const;

private:
    int width_;
    int height_;
    std::vector<double> samples_;
    double total_mass_ = 0.0;
    double max_sample_ = 0.0;

    // Per node row j and cell boundary i: prefix integrals of t^k rho_j(t),
    // where rho_j is the piecewise-linear interpolant of row j.
    std::vector<double> pre0_, pre1_, pre2_;

    void build_prefix();

    struct EdgeAccum {
        double mass = 0.0, mx = 0.0, my = 0.0, second = 0.0;
    };
    void accumulate_edge(Vec2 a, Vec2 b, EdgeAccum& acc) const;
};

} // namespace otsketch
