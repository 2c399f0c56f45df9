#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "egl/errors.hpp"
#include "egl/gas.hpp"
#include "egl/particles.hpp"

using namespace egl;

namespace {

GasModel ginibre_model(int n) {
    GasModel m;
    m.dimension = 2;
    m.particle_count = n;
    m.beta = static_cast<double>(n) * n;
    m.confinement = ConfinementPotential::quadratic(1.0);
    m.interaction = InteractionKernel::log2d(2.0);
    return m;
}

ParticleConfiguration random_config(int d, int n, std::uint64_t seed, double spread = 1.0) {
    ParticleConfiguration c;
    c.dimension = d;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, spread);
    for (int i = 0; i < n * d; ++i) c.points.push_back(normal(rng));
    return c;
}

} // namespace

TEST_CASE("configuration energy: hand value, coincidence sentinel, permutation") {
    const GasModel m = ginibre_model(2);
    ParticleConfiguration c;
    c.dimension = 2;
    c.points = {0.0, 0.0, 1.0, 0.0};
    const EnergyResult e = configuration_energy(m, c);
    CHECK(!e.coincident());
    CHECK(e.value == doctest::Approx(0.5).epsilon(1e-14));

    ParticleConfiguration swapped;
    swapped.dimension = 2;
    swapped.points = {1.0, 0.0, 0.0, 0.0};
    CHECK(configuration_energy(m, swapped).value == doctest::Approx(e.value).epsilon(1e-15));

    ParticleConfiguration dup;
    dup.dimension = 2;
    dup.points = {0.3, 0.4, 0.3, 0.4, 1.0, 1.0};
    GasModel m3 = ginibre_model(3);
    const EnergyResult bad = configuration_energy(m3, dup);
    CHECK(bad.coincident());
    CHECK(std::isinf(bad.value));
    CHECK(bad.coincident_i == 0);
    CHECK(bad.coincident_j == 1);
    CHECK_THROWS_AS(energy_gradient(m3, dup), NumericError);
}

TEST_CASE("configuration energy is rotation invariant") {
    GasModel m = ginibre_model(20);
    ParticleConfiguration c = random_config(2, 20, 5);
    const double before = configuration_energy(m, c).value;
    const double a = 1.234;
    for (int i = 0; i < c.size(); ++i) {
        const double x = c.coord(i, 0), y = c.coord(i, 1);
        c.coord(i, 0) = std::cos(a) * x - std::sin(a) * y;
        c.coord(i, 1) = std::sin(a) * x + std::cos(a) * y;
    }
    CHECK(configuration_energy(m, c).value == doctest::Approx(before).epsilon(1e-12));
}

TEST_CASE("energy gradient matches finite differences for every kernel") {
    std::mt19937_64 rng(2718);
    struct Setup {
        int d;
        InteractionKernel kernel;
    };
    const std::vector<Setup> setups = {
        {1, InteractionKernel::coulomb(1)},    {2, InteractionKernel::coulomb(2)},
        {3, InteractionKernel::coulomb(3)},    {2, InteractionKernel::log2d(2.0)},
        {1, InteractionKernel::log2d(2.0)},    {3, InteractionKernel::riesz(3, 1.5)},
        {2, InteractionKernel::riesz(2, 0.5)},
    };
    int checked = 0;
    for (const auto& setup : setups) {
        for (int rep = 0; rep < 3; ++rep) {
            GasModel m;
            m.dimension = setup.d;
            m.particle_count = 6;
            m.beta = 100.0;
            m.confinement = ConfinementPotential::quadratic(0.7);
            m.interaction = setup.kernel;
            const ParticleConfiguration c = random_config(setup.d, 6, rng(), 1.2);
            const std::vector<double> grad = energy_gradient(m, c);
            const double h = 1e-6;
            for (std::size_t k = 0; k < c.points.size(); ++k) {
                ParticleConfiguration up = c, dn = c;
                up.points[k] += h;
                dn.points[k] -= h;
                const double fd = (configuration_energy(m, up).value -
                                   configuration_energy(m, dn).value) /
                                  (2.0 * h);
                const double scale = std::max(1.0, std::abs(fd));
                CHECK(std::abs(grad[k] - fd) < 1e-5 * scale);
            }
            ++checked;
        }
    }
    CHECK(checked >= 20);
}

TEST_CASE("mirror-symmetric pair has mirrored gradients") {
    GasModel m;
    m.dimension = 3;
    m.particle_count = 2;
    m.beta = 4.0;
    m.confinement = ConfinementPotential::quadratic(1.0);
    m.interaction = InteractionKernel::coulomb(3);
    ParticleConfiguration c;
    c.dimension = 3;
    c.points = {0.4, -0.2, 0.7, -0.4, 0.2, -0.7};
    const std::vector<double> g = energy_gradient(m, c);
    for (int k = 0; k < 3; ++k) CHECK(g[k] == doctest::Approx(-g[3 + k]).epsilon(1e-13));

    // single-pair d=3 Coulomb gradient closed form on particle 1
    const double dx = c.coord(0, 0) - c.coord(1, 0);
    const double dy = c.coord(0, 1) - c.coord(1, 1);
    const double dz = c.coord(0, 2) - c.coord(1, 2);
    const double r = std::sqrt(dx * dx + dy * dy + dz * dz);
    const double n2 = 4.0; // N^2
    CHECK(g[0] - 2.0 * c.coord(0, 0) / 2.0 ==
          doctest::Approx(-(1.0 / n2) * dx / (r * r * r)).epsilon(1e-12));
}

TEST_CASE("equilibrium predictions: Ginibre, Coulomb balls, semicircle, riesz unknown") {
    const EquilibriumPrediction gin = equilibrium_prediction(ginibre_model(100));
    CHECK(gin.kind == EquilibriumPrediction::Kind::UniformBall);
    CHECK(gin.radius == doctest::Approx(1.0));
    REQUIRE(gin.modified_robin_constant.has_value());
    CHECK(*gin.modified_robin_constant == doctest::Approx(1.0));

    GasModel c3;
    c3.dimension = 3;
    c3.particle_count = 100;
    c3.beta = 1e4;
    c3.confinement = ConfinementPotential::quadratic(1.0);
    c3.interaction = InteractionKernel::coulomb(3);
    const EquilibriumPrediction b3 = equilibrium_prediction(c3);
    CHECK(b3.kind == EquilibriumPrediction::Kind::UniformBall);
    CHECK(b3.radius == doctest::Approx(std::pow(2.0, -1.0 / 3.0)).epsilon(1e-12));
    CHECK(*b3.modified_robin_constant == doctest::Approx(1.5 * std::pow(2.0, 1.0 / 3.0)));

    GasModel c4 = c3;
    c4.dimension = 4;
    c4.interaction = InteractionKernel::coulomb(4);
    CHECK(equilibrium_prediction(c4).radius == doctest::Approx(1.0));

    GasModel gue;
    gue.dimension = 1;
    gue.particle_count = 50;
    gue.beta = 2500.0;
    gue.confinement = ConfinementPotential::quadratic(0.5);
    gue.interaction = InteractionKernel::log2d(2.0);
    const EquilibriumPrediction sc = equilibrium_prediction(gue);
    CHECK(sc.kind == EquilibriumPrediction::Kind::Semicircle);
    CHECK(sc.radius == doctest::Approx(2.0));

    GasModel rz = c3;
    rz.interaction = InteractionKernel::riesz(3, 1.0);
    CHECK(equilibrium_prediction(rz).kind == EquilibriumPrediction::Kind::Unknown);
}

TEST_CASE("rate function: particle identity and disc quadrature") {
    const GasModel m = ginibre_model(30);
    const ParticleConfiguration c = random_config(2, 30, 99);
    CHECK(rate_function(c, m) == doctest::Approx(configuration_energy(m, c).value));

    const PlanarDensity disc = PlanarDensity::uniform_disc(1.0, 128);
    CHECK(std::abs(rate_function(disc, m) - 0.75) < 0.01);
}

TEST_CASE("rate function convexity along mixtures (weak positivity)") {
    const GasModel m = ginibre_model(10);
    std::mt19937_64 rng(404);
    std::uniform_real_distribution<double> unif(0.3, 1.2);
    for (int trial = 0; trial < 5; ++trial) {
        // both densities resampled onto one shared 96x96 grid, then mixed
        const PlanarDensity mu_src = PlanarDensity::gaussian(unif(rng), 64, 3.0);
        const PlanarDensity nu_src = PlanarDensity::uniform_disc(unif(rng), 64);
        PlanarDensity mu_g = PlanarDensity::uniform_square(3.0, 96);
        PlanarDensity nu_g = mu_g;
        auto resample = [&](const PlanarDensity& src, PlanarDensity& dst) {
            for (int iy = 0; iy < dst.ny; ++iy)
                for (int ix = 0; ix < dst.nx; ++ix) {
                    const double x = dst.cx(ix), y = dst.cy(iy);
                    const int jx = static_cast<int>(std::lround((x - src.x0) / src.step));
                    const int jy = static_cast<int>(std::lround((y - src.y0) / src.step));
                    dst.weights[static_cast<std::size_t>(iy) * dst.nx + ix] =
                        (jx < 0 || jx >= src.nx || jy < 0 || jy >= src.ny)
                            ? 0.0
                            : src.weights[static_cast<std::size_t>(jy) * src.nx + jx];
                }
            dst.renormalize();
        };
        resample(mu_src, mu_g);
        resample(nu_src, nu_g);
        for (double t : {0.25, 0.5, 0.75}) {
            PlanarDensity mix = mu_g;
            for (std::size_t i = 0; i < mix.weights.size(); ++i)
                mix.weights[i] = t * mu_g.weights[i] + (1.0 - t) * nu_g.weights[i];
            const double lhs = rate_function(mix, m);
            const double rhs = t * rate_function(mu_g, m) + (1.0 - t) * rate_function(nu_g, m);
            CHECK(lhs <= rhs + 1e-9);
        }
    }
}

TEST_CASE("sampler: snapshot count, determinism, trace finiteness") {
    GasModel m = ginibre_model(20);
    SamplerOptions opt;
    opt.steps = 300;
    opt.burn_in = 200;
    opt.thin = 100;
    opt.seed = 7;
    const SamplerRun one = run_sampler(m, opt);
    CHECK(one.snapshots.size() == 1); // steps = burn_in + thin

    opt.steps = 700;
    const SamplerRun a = run_sampler(m, opt);
    const SamplerRun b = run_sampler(m, opt);
    REQUIRE(a.snapshots.size() == b.snapshots.size());
    CHECK(a.snapshots.size() == 5);
    for (std::size_t s = 0; s < a.snapshots.size(); ++s)
        for (std::size_t i = 0; i < a.snapshots[s].points.size(); ++i)
            CHECK(a.snapshots[s].points[i] == b.snapshots[s].points[i]);
    for (const EnergyTracePoint& p : a.energy_trace) CHECK(std::isfinite(p.energy));
    CHECK_THROWS_AS(([&] {
                        SamplerOptions badopt = opt;
                        badopt.burn_in = badopt.steps;
                        run_sampler(m, badopt);
                    }()),
                    UsageError);
}

TEST_CASE("descent mode never increases energy; minimizer independent of beta") {
    GasModel m = ginibre_model(12);
    const ParticleConfiguration start = random_config(2, 12, 55, 0.8);

    auto descend = [&](double beta) {
        GasModel mb = m;
        mb.beta = beta;
        MalaChain chain(mb, start, 1, 0.05, true);
        double prev = chain.energy();
        for (int i = 0; i < 400; ++i) {
            chain.step();
            CHECK(chain.energy() <= prev + 1e-14);
            prev = chain.energy();
        }
        return chain.state();
    };
    const ParticleConfiguration low = descend(144.0);
    const ParticleConfiguration high = descend(1440.0);
    for (std::size_t i = 0; i < low.points.size(); ++i)
        CHECK(std::abs(low.points[i] - high.points[i]) < 1e-8);
}

TEST_CASE("auto-tuned acceptance lands in the 0.3..0.8 band (Ginibre N=100)") {
    GasModel m = ginibre_model(100);
    SamplerOptions opt;
    opt.steps = 4000;
    opt.burn_in = 3000;
    opt.thin = 100;
    opt.seed = 3;
    opt.record_trace = false;
    const SamplerRun run = run_sampler(m, opt);
    CHECK(run.acceptance_rate > 0.3);
    CHECK(run.acceptance_rate < 0.8);
    CHECK(run.dt_final > 0.0);
}

TEST_CASE("MH detailed balance smoke test: 2-particle energy-bin fluxes") {
    GasModel m;
    m.dimension = 1;
    m.particle_count = 2;
    m.beta = 6.0;
    m.confinement = ConfinementPotential::quadratic(1.0);
    m.interaction = InteractionKernel::log2d(1.0);

    ParticleConfiguration init;
    init.dimension = 1;
    init.points = {-0.5, 0.5};
    MalaChain chain(m, init, 99, 0.05);
    for (int i = 0; i < 5000; ++i) chain.step(); // equilibrate

    const int bins = 6;
    const double e_lo = -0.2, e_hi = 1.6;
    auto bin_of = [&](double e) {
        int b = static_cast<int>((e - e_lo) / (e_hi - e_lo) * bins);
        return std::min(std::max(b, 0), bins - 1);
    };
    std::vector<long> flux(static_cast<std::size_t>(bins) * bins, 0);
    int prev = bin_of(chain.energy());
    const long steps = 200000;
    for (long i = 0; i < steps; ++i) {
        chain.step();
        const int cur = bin_of(chain.energy());
        ++flux[static_cast<std::size_t>(prev) * bins + cur];
        prev = cur;
    }
    for (int a = 0; a < bins; ++a)
        for (int b = a + 1; b < bins; ++b) {
            const double fab = static_cast<double>(flux[static_cast<std::size_t>(a) * bins + b]);
            const double fba = static_cast<double>(flux[static_cast<std::size_t>(b) * bins + a]);
            if (fab + fba < 50) continue; // too rare to test
            CHECK(std::abs(fab - fba) <= 6.0 * std::sqrt(fab + fba));
        }
}

TEST_CASE("lagrange quadrature: flat inside, rising outside, plateau value") {
    GasModel c3;
    c3.dimension = 3;
    c3.particle_count = 500;
    c3.beta = 2.5e5;
    c3.confinement = ConfinementPotential::quadratic(1.0);
    c3.interaction = InteractionKernel::coulomb(3);
    const EquilibriumPrediction pred = equilibrium_prediction(c3);
    std::vector<double> radii;
    for (int i = 1; i <= 9; ++i) radii.push_back(0.1 * i * pred.radius);
    for (int i = 0; i < 5; ++i) radii.push_back((1.1 + 0.2 * i) * pred.radius);
    const LagrangeReport rep = lagrange_ball_quadrature(c3, pred, radii);
    CHECK(rep.inside_variation < 1e-3);
    CHECK(rep.outside_violation < 1e-3);
    CHECK(rep.inside_mean == doctest::Approx(1.88988).epsilon(1e-3));

    // Ginibre disc: plateau at the modified Robin constant 1
    const GasModel gin = ginibre_model(100);
    const EquilibriumPrediction gp = equilibrium_prediction(gin);
    const LagrangeReport grep = lagrange_ball_quadrature(gin, gp, radii);
    CHECK(grep.inside_variation < 1e-3);
    CHECK(grep.outside_violation < 1e-3);
    CHECK(grep.inside_mean == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("lagrange residual on an exact quantile sample of the ball") {
    GasModel c3;
    c3.dimension = 3;
    c3.particle_count = 5000;
    c3.beta = 1e6;
    c3.confinement = ConfinementPotential::quadratic(1.0);
    c3.interaction = InteractionKernel::coulomb(3);
    const EquilibriumPrediction pred = equilibrium_prediction(c3);

    // deterministic low-discrepancy-ish ball sample: radial quantiles, rotating dirs
    ParticleConfiguration sample;
    sample.dimension = 3;
    std::mt19937_64 rng(12);
    std::normal_distribution<double> normal;
    for (int i = 0; i < 5000; ++i) {
        const double r = pred.radius * std::cbrt((i + 0.5) / 5000.0);
        double v[3], nrm = 0.0;
        for (double& x : v) {
            x = normal(rng);
            nrm += x * x;
        }
        nrm = std::sqrt(nrm);
        for (double x : v) sample.points.push_back(x / nrm * r);
    }
    const LagrangeReport rep =
        lagrange_residual(sample, c3, pred, default_probes(3, pred.radius, 64, 5));
    CHECK(rep.inside_variation < 0.1);
    CHECK(rep.outside_violation < 0.05);
    CHECK(rep.skipped_probes == 0);
}

TEST_CASE("model validation and warnings") {
    GasModel m = ginibre_model(100);
    CHECK(m.cooling_scheme_satisfied()); // beta = N^2 >= N log N
    CHECK(m.confinement_beats_repulsion());
    m.beta = 1.0;
    CHECK(!m.cooling_scheme_satisfied());

    GasModel bad = ginibre_model(100);
    bad.dimension = 3; // log2d in d=3 is rejected
    CHECK_THROWS_AS(bad.validate(), UsageError);
    CHECK_THROWS_AS(InteractionKernel::riesz(3, 3.0), UsageError);
    CHECK_THROWS_AS(ConfinementPotential::quadratic(-1.0), UsageError);

    GasModel d1 = ginibre_model(50);
    d1.dimension = 1;
    d1.interaction = InteractionKernel::coulomb(1);
    d1.particle_count = 50;
    CHECK(d1.confinement_beats_repulsion()); // quadratic beats -|x-y|
}
