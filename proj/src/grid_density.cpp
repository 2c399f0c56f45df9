#include "egl/grid_density.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "egl/errors.hpp"

namespace egl {

namespace {
constexpr double kMassTol = 1e-9;
constexpr double kFloor = 1e-300;
} // namespace

double GridDensity::mass() const {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc * step;
}

double GridDensity::mean() const {
    double acc = 0.0;
    for (int i = 0; i < size(); ++i) acc += x(i) * values[i];
    return acc * step;
}

double GridDensity::variance() const {
    const double m = mean();
    double acc = 0.0;
    for (int i = 0; i < size(); ++i) {
        const double d = x(i) - m;
        acc += d * d * values[i];
    }
    return acc * step;
}

double GridDensity::interpolate(double xq) const {
    const double u = (xq - origin) / step - 0.5; // fractional cell-center index
    if (u <= -1.0 || u >= static_cast<double>(size())) return 0.0;
    const int i0 = static_cast<int>(std::floor(u));
    const double frac = u - i0;
    const double lo = (i0 >= 0 && i0 < size()) ? values[i0] : 0.0;
    const double hi = (i0 + 1 >= 0 && i0 + 1 < size()) ? values[i0 + 1] : 0.0;
    return lo + frac * (hi - lo);
}

void GridDensity::renormalize() {
    const double m = mass();
    if (!(m > 0.0)) throw NumericError("grid density: zero total mass");
    for (double& v : values) v /= m;
}

void GridDensity::validate() const {
    if (!(step > 0.0)) throw UsageError("grid density: step must be positive");
    if (size() < 8) throw UsageError("grid density: needs at least 8 cells");
    for (double v : values)
        if (!std::isfinite(v) || v < 0.0)
            throw UsageError("grid density: values must be finite and non-negative");
    if (std::abs(mass() - 1.0) > kMassTol)
        throw UsageError("grid density: mass deviates from 1 beyond 1e-9");
}

GridDensity GridDensity::gaussian(double mean, double sigma, double step,
                                  double halfwidth_sigmas) {
    if (!(sigma > 0.0) || !(step > 0.0)) throw UsageError("gaussian density: bad parameters");
    const double half = halfwidth_sigmas * sigma;
    const int m = std::max(8, static_cast<int>(std::ceil(2.0 * half / step)));
    GridDensity f;
    f.origin = mean - 0.5 * m * step;
    f.step = step;
    f.values.resize(m);
    const double inv = 1.0 / (sigma * std::sqrt(2.0 * M_PI));
    for (int i = 0; i < m; ++i) {
        const double z = (f.x(i) - mean) / sigma;
        f.values[i] = inv * std::exp(-0.5 * z * z);
    }
    f.renormalize();
    return f;
}

GridDensity GridDensity::uniform(double lo, double hi, double step) {
    if (!(lo < hi) || !(step > 0.0)) throw UsageError("uniform density: bad parameters");
    const int m = std::max(8, static_cast<int>(std::round((hi - lo) / step)));
    GridDensity f;
    f.origin = lo;
    f.step = (hi - lo) / m;
    f.values.assign(m, 1.0 / (hi - lo));
    return f;
}

double entropy(const GridDensity& f) {
    f.validate();
    double acc = 0.0;
    for (double v : f.values)
        if (v > 0.0) acc -= v * std::log(v);
    return acc * f.step;
}

FisherResult fisher_information(const GridDensity& f) {
    f.validate();
    FisherResult out;
    for (int i = 1; i + 1 < f.size(); ++i) {
        double fi = f.values[i];
        if (fi < kFloor) {
            fi = kFloor;
            out.floored = true;
        }
        const double d = (f.values[i + 1] - f.values[i - 1]) / (2.0 * f.step);
        out.value += d * d / fi;
    }
    out.value *= f.step;
    return out;
}

GridDensity convolve(const GridDensity& f, const GridDensity& g) {
    f.validate();
    g.validate();
    if (std::abs(f.step - g.step) > 1e-12 * f.step)
        throw UsageError("convolve: grids must share the same step");
    const int mf = f.size(), mg = g.size();
    GridDensity h;
    h.step = f.step;
    h.origin = f.origin + g.origin + 0.5 * f.step;
    h.values.assign(mf + mg - 1, 0.0);
    for (int i = 0; i < mf; ++i) {
        const double fi = f.values[i];
        if (fi == 0.0) continue;
        for (int j = 0; j < mg; ++j) h.values[i + j] += fi * g.values[j];
    }
    for (double& v : h.values) v *= h.step;
    h.renormalize();
    return h;
}

GridDensity dilate(const GridDensity& f, double alpha) {
    if (!(alpha > 0.0)) throw UsageError("dilate: alpha must be positive");
    GridDensity out = f;
    for (int i = 0; i < out.size(); ++i)
        out.values[i] = f.interpolate(out.x(i) / alpha) / alpha;
    out.renormalize();
    return out;
}

GridDensity clt_step(const GridDensity& f) {
    f.validate();
    if (std::abs(f.mean()) > 1e-6)
        throw UsageError("clt_step: input must be centered (|mean| <= 1e-6)");
    const GridDensity doubled = convolve(f, f);
    // Resample dil_{1/sqrt2}(f*f) onto a grid wide enough for the scaled support.
    const double inv_alpha = std::sqrt(2.0);
    GridDensity out;
    out.step = f.step;
    out.origin = doubled.origin / inv_alpha;
    const double width = doubled.size() * doubled.step / inv_alpha;
    out.values.assign(static_cast<std::size_t>(std::ceil(width / out.step)), 0.0);
    for (int i = 0; i < out.size(); ++i)
        out.values[i] = doubled.interpolate(out.x(i) * inv_alpha) * inv_alpha;
    out.renormalize();
    return out;
}

GridDensity heat_evolve(const GridDensity& f, double t) {
    if (!(t > 0.0)) throw UsageError("heat_evolve: t must be positive");
    f.validate();
    const GridDensity kernel = GridDensity::gaussian(0.0, std::sqrt(t), f.step);
    return convolve(f, kernel);
}

double de_bruijn_residual(const GridDensity& f, double t, double h) {
    if (!(h > 0.0) || !(h < t / 2.0)) throw UsageError("de_bruijn_residual: requires 0 < h < t/2");
    const double s_plus = entropy(heat_evolve(f, t + h));
    const double s_minus = entropy(heat_evolve(f, t - h));
    const double fisher = fisher_information(heat_evolve(f, t)).value;
    return std::abs((s_plus - s_minus) / (2.0 * h) - 0.5 * fisher);
}

void save_density_csv(const GridDensity& f, const std::filesystem::path& path) {
    f.validate();
    std::FILE* out = std::fopen(path.string().c_str(), "w");
    if (!out) throw NumericError("save_density_csv: cannot open " + path.string());
    std::fprintf(out, "x,f\n");
    for (int i = 0; i < f.size(); ++i) std::fprintf(out, "%.17g,%.17g\n", f.x(i), f.values[i]);
    std::fclose(out);
}

GridDensity load_density_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("load_density_csv: cannot open " + path.string());
    std::string line;
    std::getline(in, line);
    if (line != "x,f") throw UsageError("load_density_csv: expected header 'x,f'");
    std::vector<double> xs, vs;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        double xv, fv;
        char comma;
        if (!(ls >> xv >> comma >> fv) || comma != ',')
            throw UsageError("load_density_csv: malformed row '" + line + "'");
        xs.push_back(xv);
        vs.push_back(fv);
    }
    if (xs.size() < 8) throw UsageError("load_density_csv: needs at least 8 rows");
    GridDensity f;
    f.step = xs[1] - xs[0];
    f.origin = xs[0] - 0.5 * f.step;
    f.values = std::move(vs);
    f.validate();
    return f;
}

} // namespace egl
