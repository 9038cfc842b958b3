#include "otsketch/laguerre.hpp"

#include <algorithm>
#include <cmath>

#include "otsketch/errors.hpp"

namespace otsketch {

void SiteSet::validate() const {
    if (positions.empty()) throw BadInput("SiteSet: empty");
    if (weights.size() != positions.size())
        throw BadInput("SiteSet: weight count does not match positions");
    double sum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw BadInput("SiteSet: negative weight");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw BadInput("SiteSet: weights must sum to 1");
    for (Vec2 p : positions) {
        if (!(p.x >= -1e-9 && p.x <= 1.0 + 1e-9 && p.y >= -1e-9 && p.y <= 1.0 + 1e-9))
            throw BadInput("SiteSet: position outside [0,1]^2");
    }
}

SiteSet uniform_weights(std::vector<Vec2> positions) {
    SiteSet s;
    const double w = 1.0 / double(positions.size());
    s.weights.assign(positions.size(), w);
    s.positions = std::move(positions);
    return s;
}

void regauge(DualPotential& psi) {
    if (psi.empty()) return;
    double mean = 0.0;
    for (double v : psi) mean += v;
    mean /= double(psi.size());
    for (double& v : psi) v -= mean;
}

namespace {

struct BucketGrid {
    int g = 1;
    Box box;
    double inv_w = 0.0, inv_h = 0.0;
    std::vector<std::vector<int>> buckets;

    BucketGrid(const std::vector<Vec2>& pts, Box b) : box(b) {
        const int n = int(pts.size());
        g = std::max(1, int(std::ceil(std::sqrt(double(n)))));
        inv_w = g / (box.hi.x - box.lo.x);
        inv_h = g / (box.hi.y - box.lo.y);
        buckets.assign(std::size_t(g) * g, {});
        for (int i = 0; i < n; ++i) buckets[index_of(pts[i])].push_back(i);
    }

    int clampi(int v) const { return v < 0 ? 0 : (v >= g ? g - 1 : v); }
    int bx(Vec2 p) const { return clampi(int((p.x - box.lo.x) * inv_w)); }
    int by(Vec2 p) const { return clampi(int((p.y - box.lo.y) * inv_h)); }
    std::size_t index_of(Vec2 p) const { return std::size_t(by(p)) * g + bx(p); }

    double min_cell() const { return std::min(1.0 / inv_w, 1.0 / inv_h); }
};

void check_duplicates(const std::vector<Vec2>& pts, const BucketGrid& grid, double sep) {
    const double sep2 = sep * sep;
    for (int bj = 0; bj < grid.g; ++bj) {
        for (int bi = 0; bi < grid.g; ++bi) {
            const auto& here = grid.buckets[std::size_t(bj) * grid.g + bi];
            if (here.empty()) continue;
            for (int nj = std::max(0, bj - 1); nj <= std::min(grid.g - 1, bj + 1); ++nj) {
                for (int ni = std::max(0, bi - 1); ni <= std::min(grid.g - 1, bi + 1); ++ni) {
                    const auto& there = grid.buckets[std::size_t(nj) * grid.g + ni];
                    for (int a : here) {
                        for (int b : there) {
                            if (b <= a) continue;
                            if (dist2(pts[a], pts[b]) <= sep2)
                                throw DuplicateSites("compute_diagram: sites closer than 1e-12");
                        }
                    }
                }
            }
        }
    }
}

// Bisector halfplane kept by cell i against j: |p-xi|^2 - psi_i <= |p-xj|^2 - psi_j.
// Evaluated once per unordered pair orientation so both cells see the exact
// same line (the (j,i) form is the bitwise negation of the (i,j) form).
inline void bisector(const std::vector<Vec2>& x, const DualPotential& psi, int i, int j,
                     Vec2& n, double& c) {
    const int a = std::min(i, j), b = std::max(i, j);
    n = 2.0 * (x[b] - x[a]);
    c = norm2(x[b]) - norm2(x[a]) + psi[a] - psi[b];
    if (i > j) {
        n = {-n.x, -n.y};
        c = -c;
    }
}

} // namespace

LaguerreDiagram compute_diagram(const SiteSet& sites, const DualPotential& psi, Exec ex,
                                Box domain) {
    const std::vector<Vec2>& x = sites.positions;
    const int n = int(x.size());
    if (n < 1) throw BadInput("compute_diagram: need at least one site");
    if (psi.size() != x.size()) throw BadInput("compute_diagram: psi size mismatch");
    for (Vec2 p : x) {
        if (!(p.x >= domain.lo.x - 1e-9 && p.x <= domain.hi.x + 1e-9 &&
              p.y >= domain.lo.y - 1e-9 && p.y <= domain.hi.y + 1e-9))
            throw BadInput("compute_diagram: site outside the domain box");
    }

    const BucketGrid grid(x, domain);
    check_duplicates(x, grid, 1e-12);

    double psi_max = psi[0];
    for (double v : psi) psi_max = std::max(psi_max, v);

    LaguerreDiagram diag;
    diag.domain = domain;
    diag.cells.resize(n);

    const double min_cell = grid.min_cell();

    parallel_for(std::size_t(n), ex, [&](std::size_t ci) {
        const int i = int(ci);
        auto& cell = diag.cells[i];
        std::vector<Vec2>& v = cell.poly.v;
        std::vector<int>& labels = cell.labels;
        v = {domain.lo,
             {domain.hi.x, domain.lo.y},
             domain.hi,
             {domain.lo.x, domain.hi.y}};
        labels = {-1, -2, -3, -4};

        const Vec2 xi = x[i];
        double R = polygon_circumradius(cell.poly, xi);

        const int bi = grid.bx(xi), bj = grid.by(xi);
        for (int r = 0;; ++r) {
            // Everything not yet visited lies at distance >= (r-1)*min_cell;
            // no such site can cut the cell once that clears the safety radius.
            if (r > 0) {
                const double safe = R + std::sqrt(std::max(0.0, R * R + psi_max - psi[i]));
                if (double(r - 1) * min_cell >= safe) break;
            }
            const int lo_i = bi - r, hi_i = bi + r, lo_j = bj - r, hi_j = bj + r;
            if (lo_i < 0 && hi_i >= grid.g && lo_j < 0 && hi_j >= grid.g && r > 0) break;

            for (int qj = std::max(0, lo_j); qj <= std::min(grid.g - 1, hi_j); ++qj) {
                const bool j_rim = qj == lo_j || qj == hi_j;
                for (int qi = std::max(0, lo_i); qi <= std::min(grid.g - 1, hi_i); ++qi) {
                    if (!j_rim && qi != lo_i && qi != hi_i) continue; // interior of ring
                    for (int j : grid.buckets[std::size_t(qj) * grid.g + qi]) {
                        if (j == i) continue;
                        Vec2 nrm;
                        double c;
                        bisector(x, psi, i, j, nrm, c);
                        clip_halfplane_labeled(v, labels, nrm, c, j);
                        if (v.empty()) break;
                    }
                    if (v.empty()) break;
                }
                if (v.empty()) break;
            }
            if (v.empty()) break;
            R = polygon_circumradius(cell.poly, xi);
        }

        for (Vec2& p : v) {
            p.x = std::min(std::max(p.x, domain.lo.x), domain.hi.x);
            p.y = std::min(std::max(p.y, domain.lo.y), domain.hi.y);
        }
    });

    for (int i = 0; i < n; ++i) {
        const auto& cell = diag.cells[i];
        for (std::size_t k = 0; k < cell.labels.size(); ++k) {
            const int j = cell.labels[k];
            if (j > i)
                diag.edges.push_back(
                    {i, j, cell.poly.v[k], cell.poly.v[(k + 1) % cell.poly.v.size()]});
        }
    }
    return diag;
}

std::vector<double> cell_masses(const GridDensity& d, const LaguerreDiagram& diag, Exec ex) {
    std::vector<double> m(diag.cells.size(), 0.0);
    parallel_for(diag.cells.size(), ex, [&](std::size_t i) {
        if (!diag.cells[i].poly.empty()) m[i] = d.polygon_mass(diag.cells[i].poly);
    });
    return m;
}

std::vector<PolyMoments> diagram_moments(const GridDensity& d, const LaguerreDiagram& diag,
                                         Exec ex) {
    std::vector<PolyMoments> m(diag.cells.size());
    parallel_for(diag.cells.size(), ex, [&](std::size_t i) {
        if (!diag.cells[i].poly.empty()) m[i] = d.polygon_moments(diag.cells[i].poly);
    });
    return m;
}

} // namespace otsketch
