#include "egl/free_moments.hpp"

#include <cmath>
#include <limits>

#include "egl/errors.hpp"
#include "egl/pair_kernels.hpp"

namespace egl {

namespace {

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.resize(n);
    weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
}

// Kesten-McKay density d sqrt(4(d-1) - x^2) / (2 pi (d^2 - x^2)).
double kesten_mckay_moment(int d, int k) {
    // Substitution x = 2 sqrt(d-1) sin(theta) removes the edge square root.
    static thread_local std::vector<double> nodes, weights;
    if (nodes.empty()) gauss_legendre(400, nodes, weights);
    const double a = 2.0 * std::sqrt(static_cast<double>(d - 1));
    double acc = 0.0;
    for (std::size_t q = 0; q < nodes.size(); ++q) {
        const double theta = 0.5 * M_PI * nodes[q];
        const double x = a * std::sin(theta);
        const double cos_t = std::cos(theta);
        const double dens = d * a * a * cos_t * cos_t /
                            (2.0 * M_PI * (static_cast<double>(d) * d - x * x));
        acc += weights[q] * (0.5 * M_PI) * dens * std::pow(x, k);
    }
    return acc;
}

} // namespace

std::uint64_t catalan(int m) {
    if (m < 0) throw UsageError("catalan: m must be non-negative");
    if (m > 30) throw NumericError("catalan: m > 30 overflows 64-bit exact arithmetic");
    // C_0 = 1, C_{m+1} = C_m * 2(2m+1)/(m+2), integer at every step
    std::uint64_t c = 1;
    for (int k = 0; k < m; ++k) c = c * 2 * (2 * static_cast<std::uint64_t>(k) + 1) / (k + 2);
    return c;
}

std::uint64_t central_binomial(int m) {
    if (m < 0) throw UsageError("central_binomial: m must be non-negative");
    if (m > 30) throw NumericError("central_binomial: m > 30 overflows 64-bit");
    return catalan(m) * static_cast<std::uint64_t>(m + 1);
}

double MomentFamily::support_radius() const {
    return tag == Tag::KestenMcKay ? 2.0 * std::sqrt(static_cast<double>(d - 1)) : 2.0;
}

MomentFamily MomentFamily::semicircle() { return {Tag::Semicircle, 0}; }
MomentFamily MomentFamily::arcsine() { return {Tag::Arcsine, 2}; }

MomentFamily MomentFamily::kesten_mckay(int d) {
    if (d < 3) throw UsageError("kesten_mckay: requires d >= 3 (d = 2 is the arcsine family)");
    return {Tag::KestenMcKay, d};
}

double reference_moment(const MomentFamily& family, int k) {
    if (k < 0) throw UsageError("reference_moment: negative order");
    if (k % 2 == 1) return 0.0;
    const int m = k / 2;
    switch (family.tag) {
        case MomentFamily::Tag::Semicircle:
            return static_cast<double>(catalan(m));
        case MomentFamily::Tag::Arcsine:
            return static_cast<double>(central_binomial(m));
        case MomentFamily::Tag::KestenMcKay:
            return kesten_mckay_moment(family.d, k);
    }
    return 0.0;
}

std::uint64_t tree_walk_count(int d, int length) {
    if (d < 2) throw UsageError("tree_walk_count: degree must be >= 2");
    if (length < 0) throw UsageError("tree_walk_count: negative length");
    if (length > 40) throw NumericError("tree_walk_count: length > 40 overflows");
    if (length % 2 == 1) return 0;

    // ways[k]: walks of the current length ending at distance k from the root.
    // From the root there are d edges out; from distance k >= 1 there is one
    // edge back and d-1 edges deeper.
    const int maxdist = length / 2 + 1;
    std::vector<unsigned __int128> ways(maxdist + 2, 0), next(maxdist + 2, 0);
    ways[0] = 1;
    for (int step = 0; step < length; ++step) {
        std::fill(next.begin(), next.end(), 0);
        next[1] += ways[0] * static_cast<unsigned>(d);
        for (int k = 1; k <= maxdist; ++k) {
            if (ways[k] == 0) continue;
            next[k - 1] += ways[k];
            if (k + 1 <= maxdist + 1) next[k + 1] += ways[k] * static_cast<unsigned>(d - 1);
        }
        std::swap(ways, next);
    }
    if (ways[0] > std::numeric_limits<std::uint64_t>::max())
        throw NumericError("tree_walk_count: count exceeds 64 bits");
    return static_cast<std::uint64_t>(ways[0]);
}

double free_clt_scaled_moment(int d, int m) {
    if (d < 3) throw UsageError("free_clt_scaled_moment: requires d >= 3");
    if (m < 0) throw UsageError("free_clt_scaled_moment: negative order");
    const double count = static_cast<double>(tree_walk_count(d, 2 * m));
    return count / std::pow(static_cast<double>(d - 1), m);
}

double PlanarDensity::second_moment() const {
    double acc = 0.0;
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix) {
            const double w = weights[static_cast<std::size_t>(iy) * nx + ix];
            if (w == 0.0) continue;
            const double x = cx(ix), y = cy(iy);
            acc += w * (x * x + y * y);
        }
    return acc;
}

void PlanarDensity::renormalize() {
    double sum = 0.0;
    for (double w : weights) sum += w;
    if (!(sum > 0.0)) throw NumericError("planar density: zero total mass");
    for (double& w : weights) w /= sum;
}

void PlanarDensity::validate() const {
    if (!(step > 0.0) || nx < 1 || ny < 1 ||
        weights.size() != static_cast<std::size_t>(nx) * ny)
        throw UsageError("planar density: inconsistent grid");
    double sum = 0.0;
    for (double w : weights) {
        if (!std::isfinite(w) || w < 0.0)
            throw UsageError("planar density: weights must be finite and non-negative");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw UsageError("planar density: mass != 1");
}

namespace {

template <typename Inside>
PlanarDensity fill_grid(double half_extent, int cells_across, Inside inside) {
    PlanarDensity mu;
    mu.nx = mu.ny = cells_across;
    mu.step = 2.0 * half_extent / cells_across;
    mu.x0 = -half_extent + 0.5 * mu.step;
    mu.y0 = mu.x0;
    mu.weights.assign(static_cast<std::size_t>(cells_across) * cells_across, 0.0);
    for (int iy = 0; iy < cells_across; ++iy)
        for (int ix = 0; ix < cells_across; ++ix) {
            const double w = inside(mu.cx(ix), mu.cy(iy));
            mu.weights[static_cast<std::size_t>(iy) * cells_across + ix] = w;
        }
    mu.renormalize();
    return mu;
}

} // namespace

PlanarDensity PlanarDensity::uniform_disc(double radius, int cells_across) {
    if (!(radius > 0.0) || cells_across < 4) throw UsageError("uniform_disc: bad parameters");
    return fill_grid(radius, cells_across, [radius](double x, double y) {
        return x * x + y * y <= radius * radius ? 1.0 : 0.0;
    });
}

PlanarDensity PlanarDensity::uniform_annulus(double r_inner, double r_outer, int cells_across) {
    if (!(0.0 <= r_inner && r_inner < r_outer)) throw UsageError("uniform_annulus: bad radii");
    return fill_grid(r_outer, cells_across, [r_inner, r_outer](double x, double y) {
        const double r2 = x * x + y * y;
        return r2 >= r_inner * r_inner && r2 <= r_outer * r_outer ? 1.0 : 0.0;
    });
}

PlanarDensity PlanarDensity::uniform_square(double half_side, int cells_across) {
    if (!(half_side > 0.0)) throw UsageError("uniform_square: bad half side");
    return fill_grid(half_side, cells_across, [](double, double) { return 1.0; });
}

PlanarDensity PlanarDensity::gaussian(double sigma, int cells_across, double halfwidth_sigmas) {
    if (!(sigma > 0.0)) throw UsageError("planar gaussian: bad sigma");
    return fill_grid(halfwidth_sigmas * sigma, cells_across, [sigma](double x, double y) {
        return std::exp(-0.5 * (x * x + y * y) / (sigma * sigma));
    });
}

PlanarDensity PlanarDensity::scaled_to_second_moment(double target) const {
    validate();
    const double current = second_moment();
    if (!(current > 0.0)) throw NumericError("scaled_to_second_moment: degenerate density");
    const double factor = std::sqrt(target / current);
    PlanarDensity out = *this;
    out.x0 *= factor;
    out.y0 *= factor;
    out.step *= factor;
    return out;
}

LogEnergyResult log_energy(const PlanarDensity& mu) {
    mu.validate();
    // Compact the support into position/weight arrays for the pair sum.
    std::vector<double> xs, ys, ws;
    for (int iy = 0; iy < mu.ny; ++iy)
        for (int ix = 0; ix < mu.nx; ++ix) {
            const double w = mu.weights[static_cast<std::size_t>(iy) * mu.nx + ix];
            if (w == 0.0) continue;
            xs.push_back(mu.cx(ix));
            ys.push_back(mu.cy(iy));
            ws.push_back(w);
        }
    LogEnergyResult out;
    const int n = static_cast<int>(xs.size());
    if (n <= 1) {
        out.degenerate = true;
        out.off_diagonal = -std::numeric_limits<double>::infinity();
        return out;
    }
    out.off_diagonal = 2.0 * simd::weighted_log_sum(n, xs.data(), ys.data(), ws.data());
    const double self_log = std::log(0.5 * mu.step * std::sqrt(2.0));
    for (double w : ws) out.diagonal_correction += w * w * self_log;
    return out;
}

double log_potential(const PlanarDensity& mu, double zx, double zy) {
    mu.validate();
    const double self_dist = 0.5 * mu.step * std::sqrt(2.0);
    double acc = 0.0;
    for (int iy = 0; iy < mu.ny; ++iy)
        for (int ix = 0; ix < mu.nx; ++ix) {
            const double w = mu.weights[static_cast<std::size_t>(iy) * mu.nx + ix];
            if (w == 0.0) continue;
            const double dx = zx - mu.cx(ix);
            const double dy = zy - mu.cy(iy);
            const double r = std::max(std::sqrt(dx * dx + dy * dy), self_dist);
            acc -= w * std::log(r);
        }
    return acc;
}

} // namespace egl
