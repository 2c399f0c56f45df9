#include "egl/particles.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "egl/errors.hpp"

namespace egl {

double ParticleConfiguration::radius(int i) const {
    double r2 = 0.0;
    for (int k = 0; k < dimension; ++k) {
        const double c = coord(i, k);
        r2 += c * c;
    }
    return std::sqrt(r2);
}

void ParticleConfiguration::validate() const {
    if (dimension < 1) throw UsageError("particle configuration: dimension must be >= 1");
    if (points.empty() || points.size() % static_cast<std::size_t>(dimension) != 0)
        throw UsageError("particle configuration: point list size is not a multiple of d");
    for (double v : points)
        if (!std::isfinite(v)) throw UsageError("particle configuration: non-finite coordinate");
}

RadialCdf RadialCdf::uniform_ball(int d, double radius) {
    RadialCdf cdf;
    cdf.radius_support = radius;
    cdf.evaluator = [d, radius](double r) {
        if (r <= 0.0) return 0.0;
        if (r >= radius) return 1.0;
        return std::pow(r / radius, d);
    };
    return cdf;
}

RadialCdf RadialCdf::semicircle(double radius) {
    RadialCdf cdf;
    cdf.radius_support = radius;
    cdf.evaluator = [radius](double r) {
        if (r <= 0.0) return 0.0;
        if (r >= radius) return 1.0;
        const double u = r / radius;
        return (2.0 / M_PI) * (u * std::sqrt(1.0 - u * u) + std::asin(u));
    };
    return cdf;
}

double MomentSequence::value_at(int order) const {
    for (std::size_t i = 0; i < orders.size(); ++i)
        if (orders[i] == order) return values[i];
    throw UsageError("moment sequence: order not present");
}

MomentSequence empirical_moments(const ParticleConfiguration& config,
                                 const std::vector<int>& orders, MomentKind kind) {
    if (orders.empty()) throw UsageError("empirical_moments: empty orders list");
    config.validate();
    const int n = config.size();

    std::vector<double> s(n);
    for (int i = 0; i < n; ++i)
        s[i] = kind == MomentKind::Radial ? config.radius(i) : config.coord(i, 0);

    MomentSequence out;
    out.orders = orders;
    out.values.reserve(orders.size());
    for (int k : orders) {
        if (k < 0) throw UsageError("empirical_moments: negative order");
        if (k == 0) {
            out.values.push_back(1.0);
            continue;
        }
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += std::pow(s[i], k);
        out.values.push_back(acc / n);
    }
    return out;
}

double radial_ks_distance(const ParticleConfiguration& config, const RadialCdf& target) {
    config.validate();
    const int n = config.size();
    std::vector<double> radii(n);
    for (int i = 0; i < n; ++i) radii[i] = config.radius(i);
    std::sort(radii.begin(), radii.end());

    // Right-continuous empirical CDF: jumps at sorted radii.
    double dist = 0.0;
    for (int i = 0; i < n; ++i) {
        const double ft = target(radii[i]);
        dist = std::max(dist, std::abs(static_cast<double>(i + 1) / n - ft));
        dist = std::max(dist, std::abs(static_cast<double>(i) / n - ft));
    }
    return dist;
}

std::vector<HistogramBin> build_histogram(const ParticleConfiguration& config,
                                          const HistogramAxis& axis, int bins, double lo,
                                          double hi) {
    if (bins < 1) throw UsageError("build_histogram: bins must be >= 1");
    if (!(lo < hi)) throw UsageError("build_histogram: requires lo < hi");
    config.validate();

    const double width = (hi - lo) / bins;
    std::vector<HistogramBin> out(bins);
    for (int b = 0; b < bins; ++b) out[b].center = lo + (b + 0.5) * width;

    const int n = config.size();
    for (int i = 0; i < n; ++i) {
        const double v = axis.kind == HistogramAxis::Kind::Radial
                             ? config.radius(i)
                             : config.coord(i, axis.coordinate_index);
        if (v < lo || v > hi) continue;
        int b = static_cast<int>((v - lo) / width);
        if (b >= bins) b = bins - 1; // v == hi lands in the closed last bin
        ++out[b].count;
    }
    return out;
}

void save_snapshot(const ParticleConfiguration& config, const std::filesystem::path& path) {
    config.validate();
    std::FILE* f = std::fopen(path.string().c_str(), "w");
    if (!f) throw NumericError("save_snapshot: cannot open " + path.string());
    std::fprintf(f, "# d=%d N=%d seed=%" PRIu64 " step=%" PRIu64 "\n", config.dimension,
                 config.size(), config.seed, config.step_index);
    const int n = config.size();
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < config.dimension; ++k)
            std::fprintf(f, "%s%.17g", k ? " " : "", config.coord(i, k));
        std::fputc('\n', f);
    }
    std::fclose(f);
}

ParticleConfiguration load_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("load_snapshot: cannot open " + path.string());
    std::string header;
    std::getline(in, header);
    ParticleConfiguration config;
    int n = 0;
    if (std::sscanf(header.c_str(), "# d=%d N=%d seed=%" SCNu64 " step=%" SCNu64,
                    &config.dimension, &n, &config.seed, &config.step_index) != 4)
        throw UsageError("load_snapshot: malformed header in " + path.string());
    if (config.dimension < 1 || n < 1)
        throw UsageError("load_snapshot: invalid d or N in " + path.string());
    config.points.reserve(static_cast<std::size_t>(n) * config.dimension);
    for (int i = 0; i < n; ++i) {
        std::string line;
        if (!std::getline(in, line))
            throw UsageError("load_snapshot: truncated snapshot " + path.string());
        std::istringstream ls(line);
        for (int k = 0; k < config.dimension; ++k) {
            double v;
            if (!(ls >> v)) throw UsageError("load_snapshot: malformed point line");
            config.points.push_back(v);
        }
    }
    config.validate();
    return config;
}

} // namespace egl
