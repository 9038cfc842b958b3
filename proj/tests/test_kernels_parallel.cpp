#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>
#include <vector>

#include "fixtures.hpp"
#include "otsketch/ot_dual.hpp"
#include "otsketch/sampling.hpp"
#include "otsketch/snr.hpp"

using namespace otsketch;
namespace ts = otsketch::testsupport;

// The parallel kernels are plain data-parallel maps over cells, edges or rows,
// so their output must match the serial twin bit for bit, independent of the
// thread count or schedule.

TEST_CASE("diagram, moments and masses match bitwise") {
    auto g = ts::rng(81);
    GridDensity d = ts::random_density(g, 3, 3, 0.1, 1.0).normalized();
    SiteSet s = init_sites(512, 13, nullptr);
    DualPotential psi(512, 0.0);
    std::normal_distribution<double> noise(0.0, 0.001);
    for (double& v : psi) v = noise(g);
    regauge(psi);

    const LaguerreDiagram ser = compute_diagram(s, psi, Exec::serial);
    const LaguerreDiagram par = compute_diagram(s, psi, Exec::parallel);
    REQUIRE(ser.cells.size() == par.cells.size());
    REQUIRE(ser.edges.size() == par.edges.size());
    for (std::size_t i = 0; i < ser.cells.size(); ++i) {
        REQUIRE(ser.cells[i].poly.v.size() == par.cells[i].poly.v.size());
        for (std::size_t k = 0; k < ser.cells[i].poly.v.size(); ++k)
            CHECK(ser.cells[i].poly.v[k] == par.cells[i].poly.v[k]);
        CHECK(ser.cells[i].labels == par.cells[i].labels);
    }
    for (std::size_t e = 0; e < ser.edges.size(); ++e) {
        CHECK(ser.edges[e].i == par.edges[e].i);
        CHECK(ser.edges[e].j == par.edges[e].j);
        CHECK(ser.edges[e].a == par.edges[e].a);
        CHECK(ser.edges[e].b == par.edges[e].b);
    }

    const auto ms = diagram_moments(d, ser, Exec::serial);
    const auto mp = diagram_moments(d, ser, Exec::parallel);
    for (std::size_t i = 0; i < ms.size(); ++i) {
        CHECK(ms[i].mass == mp[i].mass);
        CHECK(ms[i].mx == mp[i].mx);
        CHECK(ms[i].my == mp[i].my);
        CHECK(ms[i].second == mp[i].second);
    }
    CHECK(cell_masses(d, ser, Exec::serial) == cell_masses(d, ser, Exec::parallel));
}

TEST_CASE("dual evaluation and Hessian match bitwise") {
    auto g = ts::rng(82);
    GridDensity d = ts::random_density(g, 2, 2, 0.2, 1.0).normalized();
    SiteSet s = init_sites(256, 17, nullptr);
    DualPotential psi(256, 0.0);

    const DualState a = eval_dual(d, s, psi, Exec::serial);
    const DualState b = eval_dual(d, s, psi, Exec::parallel);
    CHECK(a.value == b.value);
    CHECK(a.grad == b.grad);
    CHECK(a.masses == b.masses);

    const DualHessian Hs = eval_hessian(d, s, psi, Exec::serial);
    const DualHessian Hp = eval_hessian(d, s, psi, Exec::parallel);
    REQUIRE(Hs.entries.size() == Hp.entries.size());
    for (std::size_t k = 0; k < Hs.entries.size(); ++k) {
        CHECK(Hs.entries[k].i == Hp.entries[k].i);
        CHECK(Hs.entries[k].j == Hp.entries[k].j);
        CHECK(Hs.entries[k].w == Hp.entries[k].w);
    }
    CHECK(Hs.diag == Hp.diag);
}

TEST_CASE("whole dual solve matches bitwise") {
    auto g = ts::rng(83);
    GridDensity d = ts::random_density(g, 2, 3, 0.2, 1.0).normalized();
    SiteSet s = init_sites(200, 23, nullptr);

    SolveOptions ser;
    ser.exec = Exec::serial;
    SolveOptions par;
    par.exec = Exec::parallel;
    SolveReport rs, rp;
    const DualState a = solve_dual(d, s, {}, ser, &rs);
    const DualState b = solve_dual(d, s, {}, par, &rp);
    CHECK(rs.iterations == rp.iterations);
    CHECK(a.value == b.value);
    CHECK(a.psi == b.psi);
    CHECK(a.masses == b.masses);
}

TEST_CASE("gaussian blur matches bitwise") {
    auto g = ts::rng(84);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> img(96 * 64);
    for (double& v : img) v = u(g);
    std::vector<double> a = img, b = img;
    gaussian_blur(a, 96, 64, 2.25, Exec::serial);
    gaussian_blur(b, 96, 64, 2.25, Exec::parallel);
    CHECK(a == b);
}

TEST_CASE("snr meter matches bitwise") {
    GridDensity d = GridDensity::constant();
    SiteSet s = init_sites(300, 29, nullptr);
    SnrMeter ms = SnrMeter::for_density(d, 128, 300, Exec::serial);
    SnrMeter mp = SnrMeter::for_density(d, 128, 300, Exec::parallel);
    CHECK(ms.evaluate(s) == mp.evaluate(s));
}
