#pragma once

#include <cstdint>
#include <vector>

namespace egl {

// Exact Catalan number C_m = binom(2m, m)/(m+1); m <= 30 for 64-bit exactness.
std::uint64_t catalan(int m);

// Exact central binomial coefficient binom(2m, m); m <= 30.
std::uint64_t central_binomial(int m);

struct MomentFamily {
    enum class Tag { Semicircle, Arcsine, KestenMcKay };
    Tag tag = Tag::Semicircle;
    int d = 0; // Kesten-McKay tree degree, >= 3

    double support_radius() const; // 2 for semicircle/arcsine, 2 sqrt(d-1) otherwise

    static MomentFamily semicircle();
    static MomentFamily arcsine();
    static MomentFamily kesten_mckay(int d); // UsageError if d < 3
};

// k-th moment of the family: exact combinatorial value for semicircle/arcsine,
// Gauss-Legendre quadrature of the density for Kesten-McKay. Odd k -> 0.
double reference_moment(const MomentFamily& family, int k);

// Closed walks of the given length from the root of the infinite d-regular tree.
// Exact dynamic programming over distance from the root; length <= 40.
std::uint64_t tree_walk_count(int d, int length);

// tree_walk_count(d, 2m) / (d-1)^m; tends to catalan(m) as d grows.
double free_clt_scaled_moment(int d, int m);

// Probability weights on a uniform planar lattice of cell centers.
struct PlanarDensity {
    double x0 = 0.0, y0 = 0.0; // center of cell (0, 0)
    double step = 0.0;
    int nx = 0, ny = 0;
    std::vector<double> weights; // row-major (iy * nx + ix), sum 1

    double cx(int ix) const { return x0 + ix * step; }
    double cy(int iy) const { return y0 + iy * step; }
    double second_moment() const; // mean squared distance to the origin
    void renormalize();
    void validate() const;

    // Uniform probability on the disc of the given radius, cells_across cells
    // spanning the diameter.
    static PlanarDensity uniform_disc(double radius, int cells_across);
    static PlanarDensity uniform_annulus(double r_inner, double r_outer, int cells_across);
    static PlanarDensity uniform_square(double half_side, int cells_across);
    static PlanarDensity gaussian(double sigma, int cells_across, double halfwidth_sigmas = 4.0);
    // Rescales positions by the factor needed to hit the target second moment.
    PlanarDensity scaled_to_second_moment(double target) const;
};

struct LogEnergyResult {
    double off_diagonal = 0.0;         // sum over distinct cell pairs
    double diagonal_correction = 0.0;  // self cells at log(half cell diagonal)
    bool degenerate = false;           // single massive cell; off_diagonal meaningless
    double total() const { return off_diagonal + diagonal_correction; }
};

// chi(mu) = iint log|x-y| dmu dmu over the cell lattice.
LogEnergyResult log_energy(const PlanarDensity& mu);

// U_mu(z) = -int log|z - lambda| dmu(lambda); the cell containing z uses the
// half-cell-diagonal convention.
double log_potential(const PlanarDensity& mu, double zx, double zy);

} // namespace egl
