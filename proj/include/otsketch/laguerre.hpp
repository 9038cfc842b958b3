#pragma once

#include <vector>

#include "otsketch/geom.hpp"
#include "otsketch/grid_density.hpp"
#include "otsketch/parallel.hpp"
#include "otsketch/polygon.hpp"

namespace otsketch {

struct Box {
    Vec2 lo{0.0, 0.0};
    Vec2 hi{1.0, 1.0};
};

// Weighted point cloud: positions in [0,1]^2 plus simplex weights.
struct SiteSet {
    std::vector<Vec2> positions;
    std::vector<double> weights;

    std::size_t size() const { return positions.size(); }
    // Throws BadInput when the simplex/containment invariants fail; pairwise
    // separation is checked inside compute_diagram where a bucket grid exists.
    void validate() const;
};

SiteSet uniform_weights(std::vector<Vec2> positions);

using DualPotential = std::vector<double>;

// Subtract the mean so the potential lives on the zero-sum gauge slice.
void regauge(DualPotential& psi);

// Power diagram of the sites clipped to the domain box.
//
// cells[i].labels[k] tags the edge v[k] -> v[k+1]: a neighbour index >= 0, or
// a wall code -1 (bottom), -2 (right), -3 (top), -4 (left). Shared boundaries
// are listed once in `edges` with i < j; empty cells keep an empty polygon.
struct LaguerreDiagram {
    struct Cell {
        ConvexPolygon poly;
        std::vector<int> labels;
    };
    struct SharedEdge {
        int i, j;
        Vec2 a, b;
    };
    std::vector<Cell> cells;
    std::vector<SharedEdge> edges;
    Box domain;
};

// Builds each cell independently: candidates are visited in increasing
// distance through a bucket grid and clipping stops once no farther site can
// cut the current polygon (security-radius bound using max psi). O(n) buckets,
// near-linear total work for well-spread sites, and trivially parallel.
LaguerreDiagram compute_diagram(const SiteSet& sites, const DualPotential& psi,
                                Exec ex = Exec::parallel, Box domain = {});

std::vector<double> cell_masses(const GridDensity& d, const LaguerreDiagram& diag,
                                Exec ex = Exec::parallel);

std::vector<PolyMoments> diagram_moments(const GridDensity& d, const LaguerreDiagram& diag,
                                         Exec ex = Exec::parallel);

} // namespace otsketch
