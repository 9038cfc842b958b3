#include "otsketch/sampling.hpp"

#include <random>

#include "otsketch/errors.hpp"

namespace otsketch {

std::vector<Vec2> poisson_uniform(int n, std::uint64_t seed) {
    if (n < 1) throw BadInput("sampling: need at least one point");
    std::mt19937_64 g(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Vec2> pts(std::size_t(n), Vec2{});
    for (auto& p : pts) p = {u(g), u(g)};
    return pts;
}

std::vector<Vec2> poisson_density(const GridDensity& d, int n, std::uint64_t seed) {
    if (n < 1) throw BadInput("sampling: need at least one point");
    const double top = d.max_sample();
    if (!(top > 0.0)) throw ZeroMassDensity("sampling: density has no mass");
    std::mt19937_64 g(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Vec2> pts;
    pts.reserve(std::size_t(n));
    // Acceptance rate is mean/max of the density; the cap only trips on
    // densities that are zero almost everywhere.
    long attempts = 0;
    const long cap = 4096L * n + 1000000L;
    while (int(pts.size()) < n) {
        if (++attempts > cap) throw BadInput("sampling: rejection cap exceeded");
        const Vec2 p{u(g), u(g)};
        if (u(g) * top <= d.value_at(p)) pts.push_back(p);
    }
    return pts;
}

SiteSet init_sites(int n, std::uint64_t seed, const GridDensity* d) {
    return uniform_weights(d ? poisson_density(*d, n, seed) : poisson_uniform(n, seed));
}

} // namespace otsketch
