#pragma once

#include <string>
#include <vector>

#include "otsketch/geom.hpp"
#include "otsketch/grid_density.hpp"

namespace otsketch {

// Raster image with values in [0,1], row 0 at the top (file order).
struct Image {
    int width = 0;
    int height = 0;
    int channels = 1; // 1 (gray) or 3 (rgb)
    std::vector<double> data;

    double at(int x, int y, int c = 0) const {
        return data[(std::size_t(y) * width + x) * channels + c];
    }
    // Bilinear sample in density coordinates (y up), per channel.
    double sample(Vec2 p, int c) const;
    double luminance(Vec2 p) const; // channel mean
};

// 8-bit binary PGM (P5) / PPM (P6).
Image read_pnm(const std::string& path);
void write_pgm(const std::string& path, const Image& img);

// Gray map (channel mean), optional inversion (dark is dense) and gamma,
// then normalization. Pixels become grid nodes: (W-1)x(H-1) cells.
GridDensity build_density(const Image& img, bool invert = true, double gamma = 1.0);

struct Rgb {
    double r = 0.0, g = 0.0, b = 0.0;
};

// Per-site color rho/rho_bar clamped to [0,1]; sites where the luminance
// vanishes fall back to the raw channel values.
std::vector<Rgb> assign_colors(const Image& img, const std::vector<Vec2>& sites);

// Plain text grid fixture: "W H" header then W*H node samples, row-major
// from the bottom row up (matches GridDensity storage; W,H are node counts).
GridDensity read_grid_text(const std::string& path);
void write_grid_text(const std::string& path, const GridDensity& d);

// Curves as CSV "x,y" lines; a leading non-numeric header line is skipped.
std::vector<Vec2> read_curve_csv(const std::string& path);
void write_curve_csv(const std::string& path, const std::vector<Vec2>& pts);

} // namespace otsketch
