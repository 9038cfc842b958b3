#pragma once

#include <vector>

#include "otsketch/grid_density.hpp"
#include "otsketch/image.hpp"
#include "otsketch/laguerre.hpp"
#include "otsketch/parallel.hpp"

namespace otsketch {

// Separable truncated Gaussian (4 sigma, zero padding outside the image).
void gaussian_blur(std::vector<double>& img, int w, int h, double sigma,
                   Exec ex = Exec::parallel);

// Mass-preserving bilinear splat of the weighted sites onto a w x h grid
// (pixel centers at ((i+0.5)/w, (j+0.5)/h), y up, row-major bottom-up).
std::vector<double> splat_bilinear(const std::vector<Vec2>& positions,
                                   const std::vector<double>& weights, int w, int h);

// SNR of a discrete measure against a fixed target density, both convolved
// with a Gaussian matched to the typical point spacing 1/sqrt(n rho). Returns
// -inf for an empty or massless site set.
class SnrMeter {
public:
    SnrMeter(std::vector<double> target, int w, int h, int n_sites,
             Exec ex = Exec::parallel);

    static SnrMeter for_density(const GridDensity& d, int grid, int n_sites,
                                Exec ex = Exec::parallel);
    // Target straight from image pixels (inversion/gamma as in build_density).
    static SnrMeter for_image(const Image& img, bool invert, double gamma, int n_sites,
                              Exec ex = Exec::parallel);

    double evaluate(const SiteSet& sites) const;
    double sigma_px() const { return sigma_px_; }
    int width() const { return w_; }
    int height() const { return h_; }

private:
    int w_, h_, n_;
    double sigma_px_;
    Exec ex_;
    std::vector<double> blurred_target_;
    double signal_energy_ = 0.0;
};

} // namespace otsketch
