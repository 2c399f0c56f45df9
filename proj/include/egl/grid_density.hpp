#pragma once

#include <filesystem>
#include <vector>

namespace egl {

// Probability density sampled on a uniform 1-D grid (cell midpoints).
struct GridDensity {
    double origin = 0.0; // left edge of the first cell
    double step = 0.0;   // cell width
    std::vector<double> values;

    int size() const { return static_cast<int>(values.size()); }
    double x(int i) const { return origin + (i + 0.5) * step; }
    double mass() const;
    double mean() const;
    double variance() const;
    double interpolate(double x) const; // linear, 0 outside
    void renormalize();
    void validate() const; // mass 1 within 1e-9, M >= 8, finite non-negative

    static GridDensity gaussian(double mean, double sigma, double step,
                                double halfwidth_sigmas = 8.0);
    static GridDensity uniform(double lo, double hi, double step);
};

// Boltzmann entropy -int f log f, with 0 log 0 = 0.
double entropy(const GridDensity& f);

struct FisherResult {
    double value = 0.0;
    bool floored = false; // true when the 1e-300 floor fired
};

// int f'^2 / f by centered differences on the grid interior.
FisherResult fisher_information(const GridDensity& f);

// Discrete convolution on the product grid, renormalized. Requires equal steps.
GridDensity convolve(const GridDensity& f, const GridDensity& g);

// dil_alpha(f)(x) = f(x/alpha)/alpha, resampled onto f's grid and renormalized.
GridDensity dilate(const GridDensity& f, double alpha);

// One CLT doubling: dil_{1/sqrt2}(f * f). Requires mean(f) ~ 0.
GridDensity clt_step(const GridDensity& f);

// Convolution with the centered Gaussian of variance t.
GridDensity heat_evolve(const GridDensity& f, double t);

// | dS/dt (centered difference, half-step h) - F/2 | at time t along the heat flow.
double de_bruijn_residual(const GridDensity& f, double t, double h);

// CSV with header "x,f".
void save_density_csv(const GridDensity& f, const std::filesystem::path& path);
GridDensity load_density_csv(const std::filesystem::path& path);

} // namespace egl
