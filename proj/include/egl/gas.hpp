#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "egl/free_moments.hpp"
#include "egl/grid_density.hpp"
#include "egl/pair_kernels.hpp"
#include "egl/particles.hpp"

namespace egl {

// Symmetric translation-invariant pair interaction W(x, y) = w(|x - y|).
struct InteractionKernel {
    enum class Tag { Coulomb, Riesz, Log2D, None };
    Tag tag = Tag::None;
    int d = 1;          // ambient dimension the kernel is defined for
    double alpha = 0.0; // riesz: W = 1/r^(d - alpha), 0 < alpha < d
    double s = 1.0;     // log2d: W = s log(1/r)

    double value(double r) const;
    bool singular_at_zero() const;
    simd::PairSpec pair_spec() const;

    static InteractionKernel coulomb(int d);
    static InteractionKernel riesz(int d, double alpha);
    static InteractionKernel log2d(double s);
    static InteractionKernel none();
};

struct ConfinementPotential {
    enum class Tag { Quadratic, RadialPower };
    Tag tag = Tag::Quadratic;
    double c = 1.0; // coefficient
    double p = 2.0; // radial power exponent

    double value(const double* x, int d) const;
    void gradient(const double* x, int d, double* out) const;
    double value_radial(double r) const;

    static ConfinementPotential quadratic(double c);
    static ConfinementPotential radial_power(double p, double c);
};

struct GasModel {
    int dimension = 2;
    int particle_count = 2;
    double beta = 1.0;
    ConfinementPotential confinement;
    InteractionKernel interaction;

    void validate() const;
    // beta_N >= N log N, the cooling-scheme assumption; violation is a warning.
    bool cooling_scheme_satisfied() const;
    // Coarse-grid check of W >= c - (V(x)+V(y))/2 near infinity; false is a warning.
    bool confinement_beats_repulsion() const;
};

struct EnergyResult {
    double value = 0.0;
    int coincident_i = -1, coincident_j = -1; // set when value is +infinity

    bool coincident() const { return coincident_i >= 0; }
};

// I_N = (1/N) sum V(x_i) + (1/N^2) sum_{i<j} W(x_i, x_j).
EnergyResult configuration_energy(const GasModel& model, const ParticleConfiguration& config);

// Per-particle analytic gradient of I_N, flat N*d layout.
std::vector<double> energy_gradient(const GasModel& model, const ParticleConfiguration& config);

struct EquilibriumPrediction {
    enum class Kind { UniformBall, Semicircle, Unknown };
    Kind kind = Kind::Unknown;
    int dimension = 0;
    double radius = 0.0; // ball radius, or semicircle support half-width
    std::optional<double> modified_robin_constant;

    RadialCdf radial_cdf() const; // UniformBall / Semicircle kinds only
};

// Quadratic confinement with Coulomb or log interaction: explicit ball (or
// semicircle, d=1 log-gas) radius from the Lagrange condition. Unknown otherwise.
EquilibriumPrediction equilibrium_prediction(const GasModel& model);

// Limiting rate functional I(mu) = int V dmu + 1/2 iint W dmu dmu.
double rate_function(const ParticleConfiguration& config, const GasModel& model);
double rate_function(const PlanarDensity& mu, const GasModel& model);
double rate_function(const GridDensity& mu, const GasModel& model);

struct SamplerOptions {
    long steps = 100000;
    long burn_in = 20000;
    long thin = 100;
    std::uint64_t seed = 0;
    double dt = 0.0;            // 0 = auto-tune during burn-in
    double init_sigma = 0.5;    // gaussian cloud scale
    std::optional<ParticleConfiguration> init_snapshot;
    bool descent_mode = false;  // no noise, accept only energy decreases
    bool record_trace = true;
};

struct EnergyTracePoint {
    long step = 0;
    double energy = 0.0;
    bool accepted = false;
};

struct SamplerRun {
    std::vector<ParticleConfiguration> snapshots;
    std::vector<EnergyTracePoint> energy_trace;
    double acceptance_rate = 0.0;
    double dt_final = 0.0;
    double final_energy = 0.0;
};

// Metropolis-adjusted Langevin chain targeting exp(-beta I_N). One-shot runner;
// deterministic for fixed options.
SamplerRun run_sampler(const GasModel& model, const SamplerOptions& options);

// Incremental sampler, used by run_sampler and the detailed-balance tests.
class MalaChain {
  public:
    MalaChain(const GasModel& model, ParticleConfiguration init, std::uint64_t seed, double dt,
              bool descent_mode = false);

    bool step(); // returns acceptance
    void set_dt(double dt) { dt_ = dt; }
    double dt() const { return dt_; }
    double energy() const { return energy_; }
    const ParticleConfiguration& state() const { return state_; }

  private:
    double full_energy_grad(const std::vector<double>& flat, std::vector<double>& grad,
                            bool& coincident);

    GasModel model_;
    ParticleConfiguration state_;
    std::mt19937_64 rng_;
    std::normal_distribution<double> normal_;
    double dt_ = 1e-3;
    bool descent_ = false;
    double energy_ = 0.0;
    std::vector<double> grad_;            // gradient at the current state
    std::vector<double> proposal_, prop_grad_;
    std::vector<std::vector<double>> soa_, grad_soa_; // scratch, SoA layout
};

struct LagrangeReport {
    double inside_variation = 0.0;
    double outside_violation = 0.0;
    double inside_mean = 0.0;
    int skipped_probes = 0;
};

// Empirical check of U_mu + V = C on the support, >= C outside, with
// U_mu(z) ~ (1/N) sum_i W(z, x_i). Probes are flat points in R^d.
LagrangeReport lagrange_residual(const ParticleConfiguration& samples, const GasModel& model,
                                 const EquilibriumPrediction& prediction,
                                 const std::vector<double>& probes);

// Same check against the exact uniform-ball measure: the angular average of the
// kernel over a sphere is taken in closed form, the radial integral by
// Gauss-Legendre. Supports coulomb(3) and the 2-D log kernel.
LagrangeReport lagrange_ball_quadrature(const GasModel& model,
                                        const EquilibriumPrediction& prediction,
                                        const std::vector<double>& probe_radii);

// Deterministic inside/outside radial probe set for a ball prediction.
std::vector<double> default_probes(int dimension, double radius, int count,
                                   std::uint64_t seed);

} // namespace egl
