#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "otsketch/errors.hpp"
#include "otsketch/laguerre.hpp"

using namespace otsketch;
namespace ts = otsketch::testsupport;

namespace {

SiteSet random_sites(std::mt19937_64& g, int n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Vec2> pts(std::size_t(n), Vec2{});
    for (auto& p : pts) p = {u(g), u(g)};
    return uniform_weights(std::move(pts));
}

DualPotential random_psi(std::mt19937_64& g, int n, double amp) {
    std::uniform_real_distribution<double> u(-amp, amp);
    DualPotential psi(std::size_t(n), 0.0);
    for (double& v : psi) v = u(g);
    regauge(psi);
    return psi;
}

double total_area(const LaguerreDiagram& d) {
    double a = 0.0;
    for (const auto& c : d.cells) a += polygon_area(c.poly);
    return a;
}

// Distance from p to the bisector of sites i and j (psi = 0).
double bisector_distance(Vec2 p, Vec2 xi, Vec2 xj) {
    return std::fabs(dist2(p, xi) - dist2(p, xj)) / (2.0 * dist(xi, xj));
}

} // namespace

TEST_CASE("single site owns the whole square") {
    SiteSet s = uniform_weights({{0.37, 0.81}});
    for (double psi0 : {0.0, -3.0, 7.5}) {
        const LaguerreDiagram d = compute_diagram(s, {psi0});
        REQUIRE(d.cells.size() == 1);
        CHECK(polygon_area(d.cells[0].poly) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(d.edges.empty());
    }
}

TEST_CASE("two symmetric sites split at x = 0.5, shifted psi at x = 0.6") {
    SiteSet s;
    s.positions = {{0.25, 0.5}, {0.75, 0.5}};
    s.weights = {0.5, 0.5};

    const LaguerreDiagram d0 = compute_diagram(s, {0.0, 0.0});
    for (const Vec2& v : d0.cells[0].poly.v) CHECK(v.x <= 0.5 + 1e-12);
    CHECK(polygon_area(d0.cells[0].poly) == doctest::Approx(0.5).epsilon(1e-12));
    REQUIRE(d0.edges.size() == 1);
    CHECK(d0.edges[0].a.x == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(d0.edges[0].b.x == doctest::Approx(0.5).epsilon(1e-12));

    // bisector x = 0.5 + (psi1 - psi2) / (2 (bx - ax)) = 0.5 + 0.1/1 = 0.6
    const LaguerreDiagram d1 = compute_diagram(s, {0.05, -0.05});
    CHECK(polygon_area(d1.cells[0].poly) == doctest::Approx(0.6).epsilon(1e-12));
    REQUIRE(d1.edges.size() == 1);
    CHECK(d1.edges[0].a.x == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(d1.edges[0].b.x == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("duplicate sites are rejected") {
    SiteSet s;
    s.positions = {{0.5, 0.5}, {0.5, 0.5}, {0.1, 0.1}};
    s.weights = {0.4, 0.3, 0.3};
    CHECK_THROWS_AS(compute_diagram(s, DualPotential(3, 0.0)), DuplicateSites);
}

TEST_CASE("partition of unity over random draws") {
    auto g = ts::rng(101);
    std::uniform_int_distribution<int> nn(1, 60);
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
        const int n = nn(g);
        const SiteSet s = random_sites(g, n);
        const DualPotential psi = random_psi(g, n, 0.02);
        LaguerreDiagram d;
        try {
            d = compute_diagram(s, psi, t % 2 ? Exec::serial : Exec::parallel);
        } catch (const DuplicateSites&) {
            continue; // astronomically unlikely, but allowed by the draw
        }
        worst = std::max(worst, std::fabs(total_area(d) - 1.0));
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("cell masses: symmetric pair, single site, partition") {
    const GridDensity uni = GridDensity::constant();
    SiteSet pair;
    pair.positions = {{0.25, 0.5}, {0.75, 0.5}};
    pair.weights = {0.5, 0.5};
    const auto m2 = cell_masses(uni, compute_diagram(pair, {0.0, 0.0}));
    CHECK(m2[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(m2[1] == doctest::Approx(0.5).epsilon(1e-12));

    const auto m1 = cell_masses(uni, compute_diagram(uniform_weights({{0.6, 0.6}}), {0.0}));
    CHECK(m1[0] == doctest::Approx(1.0).epsilon(1e-12));

    auto g = ts::rng(7);
    const SiteSet s = random_sites(g, 40);
    const auto m = cell_masses(uni, compute_diagram(s, random_psi(g, 40, 0.01)));
    double sum = 0.0;
    for (double v : m) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("psi = 0 reduces to the Voronoi diagram (probe grid)") {
    auto g = ts::rng(211);
    const int P = 128;
    int probes = 0, mismatches = 0;
    for (int t = 0; t < 5; ++t) {
        const int n = 24;
        const SiteSet s = random_sites(g, n);
        const LaguerreDiagram d = compute_diagram(s, DualPotential(n, 0.0));
        for (int pj = 0; pj < P; ++pj) {
            for (int pi = 0; pi < P; ++pi) {
                const Vec2 p{(pi + 0.5) / P, (pj + 0.5) / P};
                int win = 0;
                double best = dist2(p, s.positions[0]);
                for (int i = 1; i < n; ++i) {
                    const double di = dist2(p, s.positions[i]);
                    if (di < best) {
                        best = di;
                        win = i;
                    }
                }
                ++probes;
                if (polygon_contains(d.cells[std::size_t(win)].poly, p, 1e-9)) continue;
                // mismatching probe: must lie on (within 1e-6 of) some bisector
                double db = 1e300;
                for (int i = 0; i < n; ++i)
                    if (i != win)
                        db = std::min(db, bisector_distance(p, s.positions[std::size_t(win)],
                                                            s.positions[std::size_t(i)]));
                ++mismatches;
                CHECK(db <= 1e-6);
            }
        }
    }
    CHECK(double(mismatches) <= 0.001 * double(probes));
}

TEST_CASE("raising psi[i] never shrinks cell i") {
    auto g = ts::rng(313);
    std::uniform_int_distribution<int> pick(0, 19);
    for (int t = 0; t < 25; ++t) {
        const SiteSet s = random_sites(g, 20);
        DualPotential psi = random_psi(g, 20, 0.01);
        const int i = pick(g);
        const double before = polygon_area(compute_diagram(s, psi).cells[i].poly);
        psi[i] += 0.05; // regauging only shifts all cells' psi equally
        regauge(psi);
        const double after = polygon_area(compute_diagram(s, psi).cells[i].poly);
        CHECK(after >= before - 1e-12);
    }
}

TEST_CASE("translation equivariance with a translated domain box") {
    auto g = ts::rng(401);
    const SiteSet s = random_sites(g, 15);
    const DualPotential psi = random_psi(g, 15, 0.02);
    const LaguerreDiagram base = compute_diagram(s, psi);

    const Vec2 t{3.25, -1.5};
    SiteSet moved = s;
    for (auto& p : moved.positions) p += t;
    const Box dom{t, Vec2{1.0, 1.0} + t};
    const LaguerreDiagram shifted = compute_diagram(moved, psi, Exec::parallel, dom);

    for (std::size_t i = 0; i < base.cells.size(); ++i) {
        REQUIRE(shifted.cells[i].poly.size() == base.cells[i].poly.size());
        for (std::size_t k = 0; k < base.cells[i].poly.size(); ++k) {
            const Vec2 want = base.cells[i].poly.v[k] + t;
            const Vec2 got = shifted.cells[i].poly.v[k];
            CHECK(std::fabs(got.x - want.x) < 1e-9);
            CHECK(std::fabs(got.y - want.y) < 1e-9);
        }
    }
}

TEST_CASE("shared edges are reported once per pair and lie on the power bisector") {
    auto g = ts::rng(509);
    const int n = 30;
    const SiteSet s = random_sites(g, n);
    const DualPotential psi = random_psi(g, n, 0.01);
    const LaguerreDiagram d = compute_diagram(s, psi);

    std::vector<std::pair<int, int>> seen;
    for (const auto& e : d.edges) {
        CHECK(e.i < e.j);
        seen.emplace_back(e.i, e.j);
        const Vec2 xi = s.positions[std::size_t(e.i)], xj = s.positions[std::size_t(e.j)];
        for (const Vec2 p : {e.a, e.b}) {
            // power bisector: |p-xi|^2 - psi_i = |p-xj|^2 - psi_j
            const double r = (dist2(p, xi) - psi[std::size_t(e.i)]) -
                             (dist2(p, xj) - psi[std::size_t(e.j)]);
            CHECK(std::fabs(r) / (2.0 * dist(xi, xj)) < 1e-9);
        }
        // the edge must appear in cell i's labels as neighbour j
        bool found = false;
        for (std::size_t k = 0; k < d.cells[std::size_t(e.i)].labels.size(); ++k)
            if (d.cells[std::size_t(e.i)].labels[k] == e.j) found = true;
        CHECK(found);
    }
    std::sort(seen.begin(), seen.end());
    CHECK(std::adjacent_find(seen.begin(), seen.end()) == seen.end());
}

TEST_CASE("serial and parallel construction agree bitwise") {
    auto g = ts::rng(613);
    const int n = 100;
    const SiteSet s = random_sites(g, n);
    const DualPotential psi = random_psi(g, n, 0.02);
    const LaguerreDiagram a = compute_diagram(s, psi, Exec::serial);
    const LaguerreDiagram b = compute_diagram(s, psi, Exec::parallel);
    REQUIRE(a.cells.size() == b.cells.size());
    for (std::size_t i = 0; i < a.cells.size(); ++i) {
        REQUIRE(a.cells[i].poly.size() == b.cells[i].poly.size());
        for (std::size_t k = 0; k < a.cells[i].poly.size(); ++k) {
            CHECK(a.cells[i].poly.v[k].x == b.cells[i].poly.v[k].x);
            CHECK(a.cells[i].poly.v[k].y == b.cells[i].poly.v[k].y);
        }
    }
}
