#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

namespace egl {

// N points in R^d, point-major flat storage, plus sampling metadata.
struct ParticleConfiguration {
    int dimension = 0;
    std::vector<double> points; // size N*d
    std::uint64_t seed = 0;
    std::uint64_t step_index = 0;

    int size() const { return dimension > 0 ? static_cast<int>(points.size()) / dimension : 0; }
    double coord(int i, int k) const { return points[static_cast<std::size_t>(i) * dimension + k]; }
    double& coord(int i, int k) { return points[static_cast<std::size_t>(i) * dimension + k]; }
    double radius(int i) const;

    // Throws UsageError if the invariants fail (d >= 1, N >= 1, finite coords).
    void validate() const;
};

// Analytic radial CDF on [0, radius_support].
struct RadialCdf {
    double radius_support = 1.0;
    std::function<double(double)> evaluator; // F(r) in [0,1]

    double operator()(double r) const { return evaluator(r); }

    // F(r) = (r/R)^d, the radial law of the uniform measure on a d-ball.
    static RadialCdf uniform_ball(int d, double radius);
    // Radial CDF of the semicircle distribution on [-R, R] (|x| law).
    static RadialCdf semicircle(double radius);
};

struct MomentSequence {
    std::vector<int> orders;    // strictly increasing, non-negative
    std::vector<double> values; // same length

    double value_at(int order) const; // UsageError if order absent
};

enum class MomentKind { CoordinateFirstAxis, Radial };

MomentSequence empirical_moments(const ParticleConfiguration& config,
                                 const std::vector<int>& orders, MomentKind kind);

// sup_r |F_emp(r) - F_target(r)| over the sample radii, in [0,1].
double radial_ks_distance(const ParticleConfiguration& config, const RadialCdf& target);

struct HistogramBin {
    double center = 0.0;
    long count = 0;
};

struct HistogramAxis {
    enum class Kind { Radial, Coordinate };
    Kind kind = Kind::Radial;
    int coordinate_index = 0;
};

// Equal-width bins on [lo, hi); the last bin is closed at hi.
std::vector<HistogramBin> build_histogram(const ParticleConfiguration& config,
                                          const HistogramAxis& axis, int bins, double lo,
                                          double hi);

// Snapshot file format:
//   # d=<d> N=<N> seed=<seed> step=<step>
//   <d space-separated coords, 17 significant digits>  (N lines)
void save_snapshot(const ParticleConfiguration& config, const std::filesystem::path& path);
ParticleConfiguration load_snapshot(const std::filesystem::path& path);

} // namespace egl
