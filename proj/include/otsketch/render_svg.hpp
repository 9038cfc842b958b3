#pragma once

#include <string>
#include <vector>

#include "otsketch/curve_proj.hpp"
#include "otsketch/geom.hpp"
#include "otsketch/image.hpp"
#include "otsketch/laguerre.hpp"

namespace otsketch {

// How to draw a measure. Coordinates map from the unit square to a square
// canvas with the y axis flipped so (0,0) lands bottom-left, as on paper.
enum class RenderMode { stipple, curvle, dash };
enum class ColorMode { mono, color };

struct RenderSpec {
    RenderMode mode = RenderMode::stipple;
    double dot_radius = 2.0;   // px, stipple dots
    double stroke_width = 1.5; // px, curve / dash strokes
    int canvas = 1024;         // px, square canvas
    ColorMode color = ColorMode::mono;

    void validate() const; // dot radius > 0, canvas >= 16
};

// Dots as circles. `colors` may be empty (mono) or one entry per site.
void write_svg_points(const std::string& path, const std::vector<Vec2>& positions,
                      const RenderSpec& spec, const std::vector<Rgb>& colors = {});

// One open or closed curve as a polyline/polygon with round joins.
void write_svg_curve(const std::string& path, const Curve& curve, const RenderSpec& spec);

// Consecutive point pairs as independent segments with round caps.
void write_svg_dashes(const std::string& path, const std::vector<Vec2>& points,
                      const RenderSpec& spec);

// Debug dump: cell outlines plus site dots.
void write_svg_diagram(const std::string& path, const LaguerreDiagram& diagram,
                       const std::vector<Vec2>& sites, int canvas = 1024);

// Reads back circle centers from an SVG produced by write_svg_points,
// in unit-square coordinates. Used by round-trip tests.
std::vector<Vec2> parse_svg_circles(const std::string& path, int canvas);

} // namespace otsketch
