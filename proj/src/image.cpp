#include "otsketch/image.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "otsketch/errors.hpp"

namespace otsketch {

double Image::sample(Vec2 p, int c) const {
    // Density coordinates: y up; pixels sit on grid nodes.
    const double fx = clamp01(p.x) * (width - 1);
    const double fy = (1.0 - clamp01(p.y)) * (height - 1);
    const int x0 = std::min(int(fx), width - 2 < 0 ? 0 : width - 2);
    const int y0 = std::min(int(fy), height - 2 < 0 ? 0 : height - 2);
    const double u = width > 1 ? fx - x0 : 0.0;
    const double v = height > 1 ? fy - y0 : 0.0;
    const int x1 = std::min(x0 + 1, width - 1), y1 = std::min(y0 + 1, height - 1);
    return (1.0 - u) * (1.0 - v) * at(x0, y0, c) + u * (1.0 - v) * at(x1, y0, c) +
           (1.0 - u) * v * at(x0, y1, c) + u * v * at(x1, y1, c);
}

double Image::luminance(Vec2 p) const {
    double s = 0.0;
    for (int c = 0; c < channels; ++c) s += sample(p, c);
    return s / channels;
}

namespace {

int next_pnm_token(std::istream& in) {
    // Skips whitespace and '#' comments, returns the next integer.
    for (;;) {
        int ch = in.peek();
        if (ch == '#') {
            std::string line;
            std::getline(in, line);
        } else if (std::isspace(ch)) {
            in.get();
        } else {
            break;
        }
    }
    int value = -1;
    in >> value;
    if (!in) throw UnsupportedFormat("read_pnm: malformed header");
    return value;
}

} // namespace

Image read_pnm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw BadInput("read_pnm: cannot open " + path);
    char m0 = 0, m1 = 0;
    in.get(m0);
    in.get(m1);
    if (m0 != 'P' || (m1 != '5' && m1 != '6'))
        throw UnsupportedFormat("read_pnm: only binary PGM (P5) and PPM (P6) are supported");
    Image img;
    img.channels = m1 == '5' ? 1 : 3;
    img.width = next_pnm_token(in);
    img.height = next_pnm_token(in);
    const int maxval = next_pnm_token(in);
    if (img.width <= 0 || img.height <= 0)
        throw UnsupportedFormat("read_pnm: bad dimensions");
    if (maxval <= 0 || maxval > 255)
        throw UnsupportedFormat("read_pnm: only 8-bit images are supported");
    in.get(); // single whitespace after maxval

    const std::size_t count = std::size_t(img.width) * img.height * img.channels;
    std::vector<unsigned char> raw(count);
    in.read(reinterpret_cast<char*>(raw.data()), std::streamsize(count));
    if (std::size_t(in.gcount()) != count) throw UnsupportedFormat("read_pnm: truncated pixel data");
    img.data.resize(count);
    for (std::size_t i = 0; i < count; ++i) img.data[i] = double(raw[i]) / maxval;
    return img;
}

void write_pgm(const std::string& path, const Image& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw BadInput("write_pgm: cannot open " + path);
    out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double v = img.channels == 1 ? img.at(x, y)
                                         : (img.at(x, y, 0) + img.at(x, y, 1) + img.at(x, y, 2)) / 3.0;
            out.put(char(int(clamp01(v) * 255.0 + 0.5)));
        }
    }
}

GridDensity build_density(const Image& img, bool invert, double gamma) {
    if (img.width < 2 || img.height < 2)
        throw BadInput("build_density: image must be at least 2x2");
    std::vector<double> samples(std::size_t(img.width) * img.height);
    for (int j = 0; j < img.height; ++j) {
        const int row = img.height - 1 - j; // node row j (bottom-up) = image row from the bottom
        for (int i = 0; i < img.width; ++i) {
            double g = 0.0;
            for (int c = 0; c < img.channels; ++c) g += img.at(i, row, c);
            g /= img.channels;
            double v = invert ? 1.0 - g : g;
            if (gamma != 1.0) v = std::pow(std::max(v, 0.0), gamma);
            samples[std::size_t(j) * img.width + i] = v;
        }
    }
    return GridDensity(img.width - 1, img.height - 1, std::move(samples)).normalized();
}

std::vector<Rgb> assign_colors(const Image& img, const std::vector<Vec2>& sites) {
    std::vector<Rgb> colors(sites.size());
    for (std::size_t k = 0; k < sites.size(); ++k) {
        double ch[3] = {0.0, 0.0, 0.0};
        for (int c = 0; c < 3; ++c)
            ch[c] = img.sample(sites[k], img.channels == 3 ? c : 0);
        const double lum = (ch[0] + ch[1] + ch[2]) / 3.0;
        if (lum > 1e-12)
            colors[k] = {clamp01(ch[0] / lum), clamp01(ch[1] / lum), clamp01(ch[2] / lum)};
        else
            colors[k] = {clamp01(ch[0]), clamp01(ch[1]), clamp01(ch[2])};
    }
    return colors;
}

GridDensity read_grid_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw BadInput("read_grid_text: cannot open " + path);
    int w = 0, h = 0;
    in >> w >> h;
    if (!in || w < 2 || h < 2) throw UnsupportedFormat("read_grid_text: bad header");
    std::vector<double> samples(std::size_t(w) * h);
    for (double& v : samples) {
        in >> v;
        if (!in) throw UnsupportedFormat("read_grid_text: truncated samples");
    }
    return GridDensity(w - 1, h - 1, std::move(samples));
}

void write_grid_text(const std::string& path, const GridDensity& d) {
    std::ofstream out(path);
    if (!out) throw BadInput("write_grid_text: cannot open " + path);
    out.precision(12);
    const int w = d.width() + 1, h = d.height() + 1;
    out << w << ' ' << h << '\n';
    for (int j = 0; j < h; ++j) {
        for (int i = 0; i < w; ++i) out << (i ? " " : "") << d.sample(i, j);
        out << '\n';
    }
}

std::vector<Vec2> read_curve_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw BadInput("read_curve_csv: cannot open " + path);
    std::vector<Vec2> pts;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        double x = 0.0, y = 0.0;
        char comma = 0;
        std::istringstream ls(line);
        if (ls >> x >> comma >> y && comma == ',') {
            pts.push_back({x, y});
        } else if (!pts.empty()) {
            throw UnsupportedFormat("read_curve_csv: malformed line: " + line);
        }
        // a failed first line is treated as the header
    }
    if (pts.empty()) throw UnsupportedFormat("read_curve_csv: no points in " + path);
    return pts;
}

void write_curve_csv(const std::string& path, const std::vector<Vec2>& pts) {
    std::ofstream out(path);
    if (!out) throw BadInput("write_curve_csv: cannot open " + path);
    char buf[64];
    for (Vec2 p : pts) {
        std::snprintf(buf, sizeof buf, "%.9f,%.9f\n", p.x, p.y);
        out << buf;
    }
}

} // namespace otsketch
