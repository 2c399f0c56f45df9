#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "egl/errors.hpp"
#include "egl/particles.hpp"

using namespace egl;

namespace {

ParticleConfiguration make_config(int d, std::vector<double> pts) {
    ParticleConfiguration c;
    c.dimension = d;
    c.points = std::move(pts);
    return c;
}

// Exact radial quantiles of the uniform d-ball: deterministic "sample".
ParticleConfiguration ball_quantile_sample(int d, double radius, int n) {
    ParticleConfiguration c;
    c.dimension = d;
    std::mt19937_64 rng(7);
    std::normal_distribution<double> normal;
    for (int i = 0; i < n; ++i) {
        const double u = (i + 0.5) / n;
        const double r = radius * std::pow(u, 1.0 / d);
        std::vector<double> dir(d);
        double norm = 0.0;
        for (double& v : dir) {
            v = normal(rng);
            norm += v * v;
        }
        norm = std::sqrt(norm);
        for (double v : dir) c.points.push_back(v / norm * r);
    }
    return c;
}

} // namespace

TEST_CASE("empirical moments: degenerate and symmetric examples") {
    auto origin = make_config(3, {0.0, 0.0, 0.0});
    const MomentSequence m = empirical_moments(origin, {0, 1, 2}, MomentKind::Radial);
    CHECK(m.value_at(0) == 1.0);
    CHECK(m.value_at(1) == 0.0);
    CHECK(m.value_at(2) == 0.0);

    auto pair = make_config(1, {-1.0, 1.0});
    const MomentSequence mc = empirical_moments(pair, {1, 2}, MomentKind::CoordinateFirstAxis);
    CHECK(mc.value_at(1) == doctest::Approx(0.0));
    CHECK(mc.value_at(2) == doctest::Approx(1.0));

    CHECK_THROWS_AS(empirical_moments(pair, {}, MomentKind::Radial), UsageError);
}

TEST_CASE("empirical moments: uniform disc second radial moment is 1/2") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    ParticleConfiguration c;
    c.dimension = 2;
    for (int i = 0; i < 100000; ++i) {
        const double r = std::sqrt(unif(rng));
        const double a = 2.0 * M_PI * unif(rng);
        c.points.push_back(r * std::cos(a));
        c.points.push_back(r * std::sin(a));
    }
    const MomentSequence m = empirical_moments(c, {0, 2}, MomentKind::Radial);
    CHECK(m.value_at(0) == 1.0); // exactly, for every configuration
    CHECK(m.value_at(2) == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("radial KS distance: quantiles, mismatch, inverse-CDF draws") {
    const RadialCdf ball3 = RadialCdf::uniform_ball(3, 1.0);

    // radii at the k/N quantiles -> distance <= 1/N
    ParticleConfiguration q;
    q.dimension = 1;
    const int n = 100;
    for (int k = 1; k <= n; ++k) q.points.push_back(std::pow(k / double(n), 1.0 / 3.0));
    CHECK(radial_ks_distance(q, ball3) <= 1.0 / n + 1e-12);

    ParticleConfiguration far = make_config(2, {2.0, 0.0, 0.0, 2.0, -2.0, 0.0});
    CHECK(radial_ks_distance(far, RadialCdf::uniform_ball(2, 1.0)) == doctest::Approx(1.0));

    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    ParticleConfiguration draws;
    draws.dimension = 1;
    for (int i = 0; i < 10000; ++i) draws.points.push_back(std::cbrt(unif(rng)));
    CHECK(radial_ks_distance(draws, ball3) < 0.02);
}

TEST_CASE("radial KS distance is rotation invariant") {
    ParticleConfiguration c = ball_quantile_sample(2, 1.0, 500);
    const RadialCdf target = RadialCdf::uniform_ball(2, 1.0);
    const double before = radial_ks_distance(c, target);
    const double a = 0.7321;
    for (int i = 0; i < c.size(); ++i) {
        const double x = c.coord(i, 0), y = c.coord(i, 1);
        c.coord(i, 0) = std::cos(a) * x - std::sin(a) * y;
        c.coord(i, 1) = std::sin(a) * x + std::cos(a) * y;
    }
    CHECK(radial_ks_distance(c, target) == doctest::Approx(before).epsilon(1e-12));
}

TEST_CASE("radial KS distance decreases with N for exact target samples") {
    const RadialCdf target = RadialCdf::uniform_ball(3, 1.0);
    double prev = 1.0;
    for (int n : {100, 1000, 10000}) {
        const double d = radial_ks_distance(ball_quantile_sample(3, 1.0, n), target);
        CHECK(d < prev);
        prev = d;
    }
}

TEST_CASE("semicircle radial cdf endpoints") {
    const RadialCdf sc = RadialCdf::semicircle(2.0);
    CHECK(sc(0.0) == doctest::Approx(0.0));
    CHECK(sc(2.0) == doctest::Approx(1.0));
    CHECK(sc(5.0) == doctest::Approx(1.0));
    // |X| law of the semicircle: F(r) = (2/pi)(u sqrt(1-u^2) + asin u), u = r/R
    const double u = 0.5;
    CHECK(sc(1.0) ==
          doctest::Approx(2.0 / M_PI * (u * std::sqrt(1 - u * u) + std::asin(u))).epsilon(1e-12));
}

TEST_CASE("histograms: placement, emptiness, disc radial profile") {
    auto single = make_config(1, {0.5});
    HistogramAxis radial;
    auto bins = build_histogram(single, radial, 2, 0.0, 1.0);
    REQUIRE(bins.size() == 2);
    CHECK(bins[0].center == doctest::Approx(0.25));
    CHECK(bins[0].count == 0);
    CHECK(bins[1].center == doctest::Approx(0.75));
    CHECK(bins[1].count == 1);

    auto outside = make_config(1, {5.0, -7.0});
    for (const auto& b : build_histogram(outside, radial, 4, 0.0, 1.0)) CHECK(b.count == 0);

    CHECK_THROWS_AS(build_histogram(single, radial, 2, 1.0, 1.0), UsageError);

    // quantile-exact disc sample: counts ~ N * (r_hi^2 - r_lo^2) within 5% per bin
    const int n = 10000;
    ParticleConfiguration disc = ball_quantile_sample(2, 1.0, n);
    auto rbins = build_histogram(disc, radial, 20, 0.0, 1.0);
    long total = 0;
    for (int k = 0; k < 20; ++k) {
        const double lo = k / 20.0, hi = (k + 1) / 20.0;
        const double expected = n * (hi * hi - lo * lo);
        CHECK(std::abs(rbins[k].count - expected) <= 0.05 * expected + 1.0);
        total += rbins[k].count;
    }
    CHECK(total == n);
}

TEST_CASE("histogram counts are permutation invariant") {
    ParticleConfiguration c = ball_quantile_sample(2, 1.0, 64);
    HistogramAxis radial;
    auto base = build_histogram(c, radial, 8, 0.0, 1.0);
    // reverse the point order
    ParticleConfiguration rev;
    rev.dimension = 2;
    for (int i = c.size() - 1; i >= 0; --i) {
        rev.points.push_back(c.coord(i, 0));
        rev.points.push_back(c.coord(i, 1));
    }
    auto perm = build_histogram(rev, radial, 8, 0.0, 1.0);
    for (std::size_t k = 0; k < base.size(); ++k) CHECK(base[k].count == perm[k].count);
}

TEST_CASE("snapshot files round-trip") {
    ParticleConfiguration c = ball_quantile_sample(3, 0.79, 17);
    c.seed = 123456789012345ULL;
    c.step_index = 42;
    const auto path = std::filesystem::temp_directory_path() / "egl_snapshot_test.txt";
    save_snapshot(c, path);
    const ParticleConfiguration back = load_snapshot(path);
    CHECK(back.dimension == c.dimension);
    CHECK(back.seed == c.seed);
    CHECK(back.step_index == c.step_index);
    REQUIRE(back.points.size() == c.points.size());
    for (std::size_t i = 0; i < c.points.size(); ++i) CHECK(back.points[i] == c.points[i]);
    std::filesystem::remove(path);
}

TEST_CASE("configuration validation rejects bad inputs") {
    ParticleConfiguration c;
    CHECK_THROWS_AS(c.validate(), UsageError); // d = 0, no points
    c.dimension = 2;
    c.points = {1.0, std::numeric_limits<double>::infinity()};
    CHECK_THROWS_AS(c.validate(), UsageError);
    c.points = {1.0};
    CHECK_THROWS_AS(c.validate(), UsageError); // not a multiple of d
}
