#pragma once

#include "otsketch/grid_density.hpp"
#include "otsketch/polygon.hpp"

// Reference quadrature, kept deliberately independent of the library's
// Green's-formula path: the polygon bbox is subdivided into a dense tensor
// grid of sub-rectangles; each sub-rectangle is either integrated in closed
// form (when it sits inside the polygon and a single density cell) or clipped
// with a local Sutherland-Hodgman pass and integrated by a degree-5 triangle
// rule. Both branches are exact for bilinear densities, so the only error is
// floating-point roundoff.

namespace otsketch::testsupport {

struct OracleMoments {
    double mass = 0.0;
    double mx = 0.0;
    double my = 0.0;
    double second = 0.0;
};

OracleMoments oracle_polygon_moments(const GridDensity& d, const ConvexPolygon& p,
                                     int subdiv = 256);

double oracle_polygon_mass(const GridDensity& d, const ConvexPolygon& p, int subdiv = 256);
Vec2 oracle_barycenter(const GridDensity& d, const ConvexPolygon& p, int subdiv = 256);
double oracle_cost(const GridDensity& d, const ConvexPolygon& p, Vec2 site, int subdiv = 256);

// Arc-length integral of rho over [a,b] by uniform subdivision with a 3-node
// Gauss rule per piece; pieces are small enough that cell-boundary kinks are
// below 1e-9.
double oracle_edge_integral(const GridDensity& d, Vec2 a, Vec2 b, int pieces = 16384);

} // namespace otsketch::testsupport
