#pragma once

#include <cstdint>
#include <vector>

#include "otsketch/geom.hpp"
#include "otsketch/grid_density.hpp"
#include "otsketch/laguerre.hpp"

namespace otsketch {

// Uniform iid points in the unit square (a Poisson point process realization
// conditioned on the count).
std::vector<Vec2> poisson_uniform(int n, std::uint64_t seed);

// Rejection sampling from a density: propose uniform, accept with probability
// value / max_sample.
std::vector<Vec2> poisson_density(const GridDensity& d, int n, std::uint64_t seed);

// Initial sites with uniform weights 1/n; uniform proposal when d is null.
SiteSet init_sites(int n, std::uint64_t seed, const GridDensity* d = nullptr);

} // namespace otsketch
