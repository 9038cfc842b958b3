#include "otsketch/render_svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "otsketch/errors.hpp"

namespace otsketch {
namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

Vec2 to_px(Vec2 p, int canvas) { return {p.x * canvas, (1.0 - p.y) * canvas}; }

std::string hex_color(const Rgb& c) {
    auto ch = [](double v) {
        int b = int(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
        return b;
    };
    char buf[16];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", ch(c.r), ch(c.g), ch(c.b));
    return buf;
}

std::ofstream open_svg(const std::string& path, int canvas) {
    std::ofstream out(path);
    if (!out) throw BadInput("cannot open output file: " + path);
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << canvas
        << "\" height=\"" << canvas << "\" viewBox=\"0 0 " << canvas << " " << canvas
        << "\">\n";
    return out;
}

std::string polyline_points(const std::vector<Vec2>& pts, int canvas) {
    std::ostringstream os;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const Vec2 q = to_px(pts[i], canvas);
        if (i) os << ' ';
        os << fmt(q.x) << ',' << fmt(q.y);
    }
    return os.str();
}

} // namespace

void RenderSpec::validate() const {
    if (!(dot_radius > 0.0)) throw BadInput("render: dot radius must be positive");
    if (canvas < 16) throw BadInput("render: canvas must be at least 16 px");
}

void write_svg_points(const std::string& path, const std::vector<Vec2>& positions,
                      const RenderSpec& spec, const std::vector<Rgb>& colors) {
    spec.validate();
    if (!colors.empty() && colors.size() != positions.size())
        throw BadInput("render: color count does not match point count");
    auto out = open_svg(path, spec.canvas);
    for (std::size_t i = 0; i < positions.size(); ++i) {
        const Vec2 q = to_px(positions[i], spec.canvas);
        const std::string fill = colors.empty() ? std::string("black")
                                                : hex_color(colors[i]);
        out << "<circle cx=\"" << fmt(q.x) << "\" cy=\"" << fmt(q.y) << "\" r=\""
            << fmt(spec.dot_radius) << "\" fill=\"" << fill << "\"/>\n";
    }
    out << "</svg>\n";
}

void write_svg_curve(const std::string& path, const Curve& curve, const RenderSpec& spec) {
    spec.validate();
    auto out = open_svg(path, spec.canvas);
    const char* tag = curve.circular ? "polygon" : "polyline";
    out << '<' << tag << " points=\"" << polyline_points(curve.pts, spec.canvas)
        << "\" fill=\"none\" stroke=\"black\" stroke-width=\"" << fmt(spec.stroke_width)
        << "\" stroke-linejoin=\"round\" stroke-linecap=\"round\"/>\n";
    out << "</svg>\n";
}

void write_svg_dashes(const std::string& path, const std::vector<Vec2>& points,
                      const RenderSpec& spec) {
    spec.validate();
    if (points.size() % 2 != 0) throw BadInput("render: dashes need an even point count");
    auto out = open_svg(path, spec.canvas);
    for (std::size_t i = 0; i + 1 < points.size(); i += 2) {
        const Vec2 a = to_px(points[i], spec.canvas);
        const Vec2 b = to_px(points[i + 1], spec.canvas);
        out << "<line x1=\"" << fmt(a.x) << "\" y1=\"" << fmt(a.y) << "\" x2=\""
            << fmt(b.x) << "\" y2=\"" << fmt(b.y) << "\" stroke=\"black\" stroke-width=\""
            << fmt(spec.stroke_width) << "\" stroke-linecap=\"round\"/>\n";
    }
    out << "</svg>\n";
}

void write_svg_diagram(const std::string& path, const LaguerreDiagram& diagram,
                       const std::vector<Vec2>& sites, int canvas) {
    auto out = open_svg(path, canvas);
    for (const auto& cell : diagram.cells) {
        if (cell.poly.empty()) continue;
        out << "<polygon points=\"" << polyline_points(cell.poly.v, canvas)
            << "\" fill=\"none\" stroke=\"#777777\" stroke-width=\"1\"/>\n";
    }
    for (const Vec2& s : sites) {
        const Vec2 q = to_px(s, canvas);
        out << "<circle cx=\"" << fmt(q.x) << "\" cy=\"" << fmt(q.y)
            << "\" r=\"2\" fill=\"#cc3333\"/>\n";
    }
    out << "</svg>\n";
}

std::vector<Vec2> parse_svg_circles(const std::string& path, int canvas) {
    std::ifstream in(path);
    if (!in) throw BadInput("cannot open SVG file: " + path);
    std::vector<Vec2> pts;
    std::string line;
    auto attr = [](const std::string& s, const char* key, double& out) {
        const auto pos = s.find(key);
        if (pos == std::string::npos) return false;
        const auto q0 = s.find('"', pos);
        if (q0 == std::string::npos) return false;
        out = std::strtod(s.c_str() + q0 + 1, nullptr);
        return true;
    };
    while (std::getline(in, line)) {
        if (line.find("<circle") == std::string::npos) continue;
        double cx = 0.0, cy = 0.0;
        if (!attr(line, "cx=", cx) || !attr(line, "cy=", cy)) continue;
        pts.push_back({cx / canvas, 1.0 - cy / canvas});
    }
    return pts;
}

} // namespace otsketch
