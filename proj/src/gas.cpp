#include "egl/gas.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "egl/errors.hpp"

namespace egl {

namespace {
constexpr double kCoincidenceR2 = 1e-24;
constexpr double kInf = std::numeric_limits<double>::infinity();
} // namespace

// ---------------------------------------------------------------------------
// Kernels and potentials

double InteractionKernel::value(double r) const {
    switch (tag) {
        case Tag::Coulomb:
            if (d == 1) return -r;
            if (d == 2) return -std::log(r);
            return std::pow(r, 2.0 - d);
        case Tag::Riesz:
            return std::pow(r, alpha - d);
        case Tag::Log2D:
            return -s * std::log(r);
        case Tag::None:
            return 0.0;
    }
    return 0.0;
}

bool InteractionKernel::singular_at_zero() const {
    return tag == Tag::Riesz || tag == Tag::Log2D || (tag == Tag::Coulomb && d >= 2);
}

simd::PairSpec InteractionKernel::pair_spec() const {
    simd::PairSpec spec;
    spec.d = d;
    spec.s = s;
    spec.alpha = alpha;
    spec.coincidence_r2 = kCoincidenceR2;
    switch (tag) {
        case Tag::Coulomb: spec.tag = simd::PairSpec::Tag::Coulomb; break;
        case Tag::Riesz: spec.tag = simd::PairSpec::Tag::Riesz; break;
        case Tag::Log2D: spec.tag = simd::PairSpec::Tag::Log2D; break;
        case Tag::None: spec.tag = simd::PairSpec::Tag::None; break;
    }
    return spec;
}

InteractionKernel InteractionKernel::coulomb(int d) {
    if (d < 1) throw UsageError("coulomb kernel: dimension must be >= 1");
    InteractionKernel k;
    k.tag = Tag::Coulomb;
    k.d = d;
    return k;
}

InteractionKernel InteractionKernel::riesz(int d, double alpha) {
    if (!(alpha > 0.0 && alpha < d))
        throw UsageError("riesz kernel: requires 0 < alpha < d");
    InteractionKernel k;
    k.tag = Tag::Riesz;
    k.d = d;
    k.alpha = alpha;
    return k;
}

InteractionKernel InteractionKernel::log2d(double s) {
    if (!(s > 0.0)) throw UsageError("log2d kernel: scale must be positive");
    InteractionKernel k;
    k.tag = Tag::Log2D;
    k.s = s;
    k.d = 2;
    return k;
}

InteractionKernel InteractionKernel::none() { return InteractionKernel{}; }

double ConfinementPotential::value_radial(double r) const {
    return tag == Tag::Quadratic ? c * r * r : c * std::pow(r, p);
}

double ConfinementPotential::value(const double* x, int d) const {
    double r2 = 0.0;
    for (int k = 0; k < d; ++k) r2 += x[k] * x[k];
    if (tag == Tag::Quadratic) return c * r2;
    return c * std::pow(r2, 0.5 * p);
}

void ConfinementPotential::gradient(const double* x, int d, double* out) const {
    if (tag == Tag::Quadratic) {
        for (int k = 0; k < d; ++k) out[k] = 2.0 * c * x[k];
        return;
    }
    double r2 = 0.0;
    for (int k = 0; k < d; ++k) r2 += x[k] * x[k];
    const double f = r2 > 0.0 ? c * p * std::pow(r2, 0.5 * p - 1.0) : 0.0;
    for (int k = 0; k < d; ++k) out[k] = f * x[k];
}

ConfinementPotential ConfinementPotential::quadratic(double c) {
    if (!(c > 0.0)) throw UsageError("quadratic potential: coefficient must be positive");
    return {Tag::Quadratic, c, 2.0};
}

ConfinementPotential ConfinementPotential::radial_power(double p, double c) {
    if (!(c > 0.0) || !(p >= 1.0)) throw UsageError("radial_power potential: need c > 0, p >= 1");
    return {Tag::RadialPower, c, p};
}

void GasModel::validate() const {
    if (dimension < 1) throw UsageError("gas model: dimension must be >= 1");
    if (particle_count < 2) throw UsageError("gas model: needs at least 2 particles");
    if (!(beta > 0.0)) throw UsageError("gas model: beta must be positive");
    if (interaction.tag == InteractionKernel::Tag::Coulomb && interaction.d != dimension)
        throw UsageError("gas model: coulomb kernel dimension tag does not match d");
    if (interaction.tag == InteractionKernel::Tag::Riesz && interaction.d != dimension)
        throw UsageError("gas model: riesz kernel dimension tag does not match d");
    if (interaction.tag == InteractionKernel::Tag::Log2D && dimension > 2)
        throw UsageError("gas model: log2d kernel applies to d <= 2 only");
}

bool GasModel::cooling_scheme_satisfied() const {
    const double n = particle_count;
    return beta >= n * std::log(n);
}

bool GasModel::confinement_beats_repulsion() const {
    // Coarse check along x = t e1, y = -t e1: W + (V(x)+V(y))/2 must stop
    // decreasing once t is large.
    std::vector<double> x(dimension, 0.0), y(dimension, 0.0);
    double prev = -kInf;
    bool ok = true;
    for (int i = 3; i <= 64; ++i) {
        const double t = static_cast<double>(i);
        x[0] = t;
        y[0] = -t;
        const double v =
            interaction.value(2.0 * t) +
            0.5 * (confinement.value(x.data(), dimension) + confinement.value(y.data(), dimension));
        if (i > 8 && v < prev - 1e-9) ok = false;
        prev = v;
    }
    return ok;
}

// ---------------------------------------------------------------------------
// Energy and gradient

namespace {

// Point-major flat -> per-coordinate SoA.
void to_soa(const std::vector<double>& flat, int n, int d, std::vector<std::vector<double>>& soa) {
    soa.resize(d);
    for (int k = 0; k < d; ++k) {
        soa[k].resize(n);
        for (int i = 0; i < n; ++i) soa[k][i] = flat[static_cast<std::size_t>(i) * d + k];
    }
}

struct PairEval {
    double pair_sum = 0.0;
    bool coincident = false;
};

PairEval eval_pairs(const GasModel& model, const std::vector<double>& flat, int n,
                    std::vector<std::vector<double>>& soa,
                    std::vector<std::vector<double>>& grad_soa, bool want_grad) {
    const int d = model.dimension;
    to_soa(flat, n, d, soa);
    std::vector<const double*> cptr(d);
    for (int k = 0; k < d; ++k) cptr[k] = soa[k].data();
    std::vector<double*> gptr;
    if (want_grad) {
        grad_soa.resize(d);
        gptr.resize(d);
        for (int k = 0; k < d; ++k) {
            grad_soa[k].assign(n, 0.0);
            gptr[k] = grad_soa[k].data();
        }
    }
    simd::PairSpec spec = model.interaction.pair_spec();
    spec.d = d; // spatial dimension (log2d can live on the line as well)
    PairEval out;
    out.pair_sum = simd::pair_energy_grad(spec, n, cptr.data(),
                                          want_grad ? gptr.data() : nullptr, &out.coincident);
    return out;
}

std::pair<int, int> find_coincident_pair(const GasModel& model,
                                         const ParticleConfiguration& config) {
    const int n = config.size();
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double r2 = 0.0;
            for (int k = 0; k < model.dimension; ++k) {
                const double diff = config.coord(i, k) - config.coord(j, k);
                r2 += diff * diff;
            }
            if (r2 < kCoincidenceR2) return {i, j};
        }
    return {-1, -1};
}

} // namespace

EnergyResult configuration_energy(const GasModel& model, const ParticleConfiguration& config) {
    model.validate();
    config.validate();
    if (config.dimension != model.dimension)
        throw UsageError("configuration_energy: dimension mismatch");
    const int n = config.size();

    std::vector<std::vector<double>> soa, unused;
    const PairEval pairs = eval_pairs(model, config.points, n, soa, unused, false);
    EnergyResult out;
    if (pairs.coincident) {
        const auto [i, j] = find_coincident_pair(model, config);
        out.value = kInf;
        out.coincident_i = i;
        out.coincident_j = j;
        return out;
    }
    double vsum = 0.0;
    for (int i = 0; i < n; ++i)
        vsum += model.confinement.value(config.points.data() + static_cast<std::size_t>(i) * model.dimension,
                                        model.dimension);
    out.value = vsum / n + pairs.pair_sum / (static_cast<double>(n) * n);
    return out;
}

std::vector<double> energy_gradient(const GasModel& model, const ParticleConfiguration& config) {
    model.validate();
    config.validate();
    if (config.dimension != model.dimension)
        throw UsageError("energy_gradient: dimension mismatch");
    const int n = config.size();
    const int d = model.dimension;

    std::vector<std::vector<double>> soa, grad_soa;
    const PairEval pairs = eval_pairs(model, config.points, n, soa, grad_soa, true);
    if (pairs.coincident) {
        const auto [i, j] = find_coincident_pair(model, config);
        throw NumericError("energy_gradient: singular gradient, coincident pair (" +
                           std::to_string(i) + "," + std::to_string(j) + ")");
    }
    std::vector<double> grad(static_cast<std::size_t>(n) * d);
    const double inv_n = 1.0 / n;
    const double inv_n2 = inv_n * inv_n;
    std::vector<double> vgrad(d);
    for (int i = 0; i < n; ++i) {
        model.confinement.gradient(config.points.data() + static_cast<std::size_t>(i) * d, d,
                                   vgrad.data());
        for (int k = 0; k < d; ++k)
            grad[static_cast<std::size_t>(i) * d + k] = inv_n * vgrad[k] + inv_n2 * grad_soa[k][i];
    }
    return grad;
}

// ---------------------------------------------------------------------------
// Equilibrium prediction and rate function

RadialCdf EquilibriumPrediction::radial_cdf() const {
    if (kind == Kind::UniformBall) return RadialCdf::uniform_ball(dimension, radius);
    if (kind == Kind::Semicircle) return RadialCdf::semicircle(radius);
    throw UsageError("equilibrium prediction: no radial cdf for kind=unknown");
}

EquilibriumPrediction equilibrium_prediction(const GasModel& model) {
    model.validate();
    EquilibriumPrediction out;
    out.dimension = model.dimension;
    if (model.confinement.tag != ConfinementPotential::Tag::Quadratic) return out;
    const double c = model.confinement.c;
    const int d = model.dimension;
    const auto& w = model.interaction;

    // 2-D log kernel (Coulomb in d=2 is the s=1 case): R = sqrt(s / 2c).
    const bool log_kernel_2d =
        (w.tag == InteractionKernel::Tag::Log2D && d == 2) ||
        (w.tag == InteractionKernel::Tag::Coulomb && d == 2);
    if (log_kernel_2d) {
        const double s = w.tag == InteractionKernel::Tag::Log2D ? w.s : 1.0;
        out.kind = EquilibriumPrediction::Kind::UniformBall;
        out.radius = std::sqrt(s / (2.0 * c));
        out.modified_robin_constant = s * (0.5 - std::log(out.radius));
        return out;
    }
    if (w.tag == InteractionKernel::Tag::Coulomb && d >= 3) {
        out.kind = EquilibriumPrediction::Kind::UniformBall;
        out.radius = std::pow((d - 2) / (2.0 * c), 1.0 / d);
        out.modified_robin_constant = d / (2.0 * std::pow(out.radius, d - 2));
        return out;
    }
    // 1-D log-gas: semicircle with support radius sqrt(s/c).
    if (w.tag == InteractionKernel::Tag::Log2D && d == 1) {
        out.kind = EquilibriumPrediction::Kind::Semicircle;
        out.radius = std::sqrt(w.s / c);
        return out;
    }
    return out; // unknown: riesz and everything else
}

double rate_function(const ParticleConfiguration& config, const GasModel& model) {
    return configuration_energy(model, config).value;
}

double rate_function(const PlanarDensity& mu, const GasModel& model) {
    model.validate();
    mu.validate();
    if (model.dimension != 2) throw UsageError("rate_function: planar density needs a d=2 model");
    double vterm = 0.0;
    for (int iy = 0; iy < mu.ny; ++iy)
        for (int ix = 0; ix < mu.nx; ++ix) {
            const double wgt = mu.weights[static_cast<std::size_t>(iy) * mu.nx + ix];
            if (wgt == 0.0) continue;
            const double x[2] = {mu.cx(ix), mu.cy(iy)};
            vterm += wgt * model.confinement.value(x, 2);
        }
    const auto& w = model.interaction;
    double s;
    if (w.tag == InteractionKernel::Tag::Log2D)
        s = w.s;
    else if (w.tag == InteractionKernel::Tag::Coulomb)
        s = 1.0;
    else if (w.tag == InteractionKernel::Tag::None)
        return vterm;
    else
        throw UsageError("rate_function: planar quadrature supports log-type kernels only");
    const LogEnergyResult chi = log_energy(mu);
    return vterm + 0.5 * s * (-chi.total());
}

double rate_function(const GridDensity& mu, const GasModel& model) {
    model.validate();
    mu.validate();
    if (model.dimension != 1) throw UsageError("rate_function: grid density needs a d=1 model");
    const int m = mu.size();
    std::vector<double> wgt(m), pos(m);
    for (int i = 0; i < m; ++i) {
        wgt[i] = mu.values[i] * mu.step;
        pos[i] = mu.x(i);
    }
    double vterm = 0.0;
    for (int i = 0; i < m; ++i) vterm += wgt[i] * model.confinement.value_radial(std::abs(pos[i]));
    double pair = 0.0;
    const double self_r = 0.5 * mu.step;
    for (int i = 0; i < m; ++i) {
        if (wgt[i] == 0.0) continue;
        pair += wgt[i] * wgt[i] * model.interaction.value(self_r);
        for (int j = i + 1; j < m; ++j) {
            if (wgt[j] == 0.0) continue;
            pair += 2.0 * wgt[i] * wgt[j] * model.interaction.value(pos[j] - pos[i]);
        }
    }
    return vterm + 0.5 * pair;
}

// ---------------------------------------------------------------------------
// MALA sampler

MalaChain::MalaChain(const GasModel& model, ParticleConfiguration init, std::uint64_t seed,
                     double dt, bool descent_mode)
    : model_(model), state_(std::move(init)), rng_(seed), dt_(dt), descent_(descent_mode) {
    model_.validate();
    state_.validate();
    if (state_.dimension != model_.dimension || state_.size() != model_.particle_count)
        throw UsageError("mala chain: initial configuration does not match the model");
    if (!(dt_ > 0.0)) throw UsageError("mala chain: dt must be positive");
    grad_.resize(state_.points.size());
    bool coincident = false;
    energy_ = full_energy_grad(state_.points, grad_, coincident);
    if (coincident) throw UsageError("mala chain: initial configuration has coincident points");
}

double MalaChain::full_energy_grad(const std::vector<double>& flat, std::vector<double>& grad,
                                   bool& coincident) {
    const int n = model_.particle_count;
    const int d = model_.dimension;
    const PairEval pairs = eval_pairs(model_, flat, n, soa_, grad_soa_, true);
    coincident = pairs.coincident;
    if (coincident) return kInf;
    grad.resize(flat.size());
    const double inv_n = 1.0 / n;
    const double inv_n2 = inv_n * inv_n;
    double vsum = 0.0;
    std::vector<double> vgrad(d);
    for (int i = 0; i < n; ++i) {
        const double* x = flat.data() + static_cast<std::size_t>(i) * d;
        vsum += model_.confinement.value(x, d);
        model_.confinement.gradient(x, d, vgrad.data());
        for (int k = 0; k < d; ++k)
            grad[static_cast<std::size_t>(i) * d + k] = inv_n * vgrad[k] + inv_n2 * grad_soa_[k][i];
    }
    return vsum * inv_n + pairs.pair_sum * inv_n2;
}

bool MalaChain::step() {
    const std::size_t dof = state_.points.size();
    proposal_.resize(dof);
    const double noise_scale = descent_ ? 0.0 : std::sqrt(2.0 * dt_ / model_.beta);
    for (std::size_t k = 0; k < dof; ++k) {
        const double xi = descent_ ? 0.0 : normal_(rng_);
        proposal_[k] = state_.points[k] - dt_ * grad_[k] + noise_scale * xi;
    }

    bool coincident = false;
    const double prop_energy = full_energy_grad(proposal_, prop_grad_, coincident);
    bool accept = false;
    if (!coincident && std::isfinite(prop_energy)) {
        if (descent_) {
            accept = prop_energy <= energy_;
        } else {
            // q(y|x) = N(y; x - dt grad(x), (2 dt / beta) Id)
            double fwd = 0.0, bwd = 0.0;
            for (std::size_t k = 0; k < dof; ++k) {
                const double df = proposal_[k] - state_.points[k] + dt_ * grad_[k];
                const double db = state_.points[k] - proposal_[k] + dt_ * prop_grad_[k];
                fwd += df * df;
                bwd += db * db;
            }
            const double log_ratio =
                -model_.beta * (prop_energy - energy_) -
                model_.beta / (4.0 * dt_) * (bwd - fwd);
            if (log_ratio >= 0.0)
                accept = true;
            else {
                std::uniform_real_distribution<double> unif(0.0, 1.0);
                accept = std::log(unif(rng_)) < log_ratio;
            }
        }
    }
    if (accept) {
        state_.points.swap(proposal_);
        grad_.swap(prop_grad_);
        energy_ = prop_energy;
    }
    ++state_.step_index;
    return accept;
}

SamplerRun run_sampler(const GasModel& model, const SamplerOptions& options) {
    model.validate();
    if (options.steps <= options.burn_in)
        throw UsageError("run_sampler: steps must exceed burn_in");
    if (options.thin < 1) throw UsageError("run_sampler: thin must be positive");

    const int n = model.particle_count;
    const int d = model.dimension;
    ParticleConfiguration init;
    if (options.init_snapshot) {
        init = *options.init_snapshot;
    } else {
        std::mt19937_64 rng(options.seed);
        std::normal_distribution<double> normal;
        init.dimension = d;
        init.seed = options.seed;
        for (int attempt = 0;; ++attempt) {
            init.points.resize(static_cast<std::size_t>(n) * d);
            for (double& v : init.points) v = options.init_sigma * normal(rng);
            if (find_coincident_pair(model, init).first < 0) break;
            if (attempt >= 100)
                throw NumericError("run_sampler: could not draw a coincidence-free start");
        }
    }
    init.seed = options.seed;
    init.step_index = 0;

    double dt = options.dt > 0.0 ? options.dt : 0.5;
    MalaChain chain(model, std::move(init), options.seed + 0x9e3779b97f4a7c15ULL, dt,
                    options.descent_mode);

    SamplerRun run;
    const bool tune = options.dt <= 0.0 && !options.descent_mode;
    long window_accepts = 0, window_size = 0;
    long accepts_after_burnin = 0, steps_after_burnin = 0;
    for (long step = 1; step <= options.steps; ++step) {
        const bool accepted = chain.step();
        if (options.record_trace)
            run.energy_trace.push_back({step, chain.energy(), accepted});
        if (tune && step <= options.burn_in) {
            window_accepts += accepted ? 1 : 0;
            if (++window_size == 100) {
                const double rate = window_accepts / 100.0;
                // keep acceptance inside the 0.3..0.8 band during burn-in
                if (rate < 0.3)
                    chain.set_dt(chain.dt() * 0.5);
                else if (rate > 0.8)
                    chain.set_dt(chain.dt() * 1.25);
                window_accepts = 0;
                window_size = 0;
            }
        }
        if (step > options.burn_in) {
            accepts_after_burnin += accepted ? 1 : 0;
            ++steps_after_burnin;
            if ((step - options.burn_in) % options.thin == 0) {
                ParticleConfiguration snap = chain.state();
                snap.seed = options.seed;
                run.snapshots.push_back(std::move(snap));
            }
        }
    }
    run.acceptance_rate =
        steps_after_burnin > 0 ? static_cast<double>(accepts_after_burnin) / steps_after_burnin : 0.0;
    run.dt_final = chain.dt();
    run.final_energy = chain.energy();
    return run;
}

// ---------------------------------------------------------------------------
// Lagrange conditions

LagrangeReport lagrange_residual(const ParticleConfiguration& samples, const GasModel& model,
                                 const EquilibriumPrediction& prediction,
                                 const std::vector<double>& probes) {
    model.validate();
    samples.validate();
    if (prediction.kind != EquilibriumPrediction::Kind::UniformBall)
        throw UsageError("lagrange_residual: uniform-ball prediction required");
    const int d = model.dimension;
    if (probes.empty() || probes.size() % static_cast<std::size_t>(d) != 0)
        throw UsageError("lagrange_residual: probe list size is not a multiple of d");
    const int n = samples.size();
    const int np = static_cast<int>(probes.size()) / d;

    LagrangeReport report;
    double in_min = kInf, in_max = -kInf, out_min = kInf;
    double in_sum = 0.0;
    int in_count = 0;
    for (int p = 0; p < np; ++p) {
        const double* z = probes.data() + static_cast<std::size_t>(p) * d;
        double u = 0.0;
        bool skip = false;
        for (int i = 0; i < n; ++i) {
            double r2 = 0.0;
            for (int k = 0; k < d; ++k) {
                const double diff = z[k] - samples.coord(i, k);
                r2 += diff * diff;
            }
            if (r2 < kCoincidenceR2) {
                skip = true;
                break;
            }
            u += model.interaction.value(std::sqrt(r2));
        }
        if (skip) {
            ++report.skipped_probes;
            continue;
        }
        u /= n;
        const double total = u + model.confinement.value(z, d);
        double pr2 = 0.0;
        for (int k = 0; k < d; ++k) pr2 += z[k] * z[k];
        if (std::sqrt(pr2) < prediction.radius) {
            in_min = std::min(in_min, total);
            in_max = std::max(in_max, total);
            in_sum += total;
            ++in_count;
        } else {
            out_min = std::min(out_min, total);
        }
    }
    if (in_count == 0) throw UsageError("lagrange_residual: no interior probes");
    report.inside_variation = in_max - in_min;
    report.inside_mean = in_sum / in_count;
    report.outside_violation = std::isfinite(out_min)
                                   ? std::max(0.0, report.inside_mean - out_min)
                                   : 0.0;
    return report;
}

namespace {

// Angular average of the kernel over the sphere of radius rho, seen from a
// probe at radius r. Closed form for the Coulomb d=3 and planar log kernels.
double shell_average(const GasModel& model, double r, double rho) {
    const double far = std::max(r, rho);
    if (model.interaction.tag == InteractionKernel::Tag::Coulomb && model.dimension == 3)
        return 1.0 / far;
    // log-type kernel (d=2)
    const double s = model.interaction.tag == InteractionKernel::Tag::Log2D
                         ? model.interaction.s
                         : 1.0;
    return far > 0.0 ? -s * std::log(far) : 0.0;
}

} // namespace

LagrangeReport lagrange_ball_quadrature(const GasModel& model,
                                        const EquilibriumPrediction& prediction,
                                        const std::vector<double>& probe_radii) {
    model.validate();
    if (prediction.kind != EquilibriumPrediction::Kind::UniformBall)
        throw UsageError("lagrange_ball_quadrature: uniform-ball prediction required");
    const int d = model.dimension;
    const bool supported = (model.interaction.tag == InteractionKernel::Tag::Coulomb && d == 3) ||
                           (model.interaction.tag == InteractionKernel::Tag::Log2D && d == 2) ||
                           (model.interaction.tag == InteractionKernel::Tag::Coulomb && d == 2);
    if (!supported)
        throw UsageError("lagrange_ball_quadrature: supports coulomb(3) and 2-D log kernels");
    const double radius = prediction.radius;

    // 200-node Gauss-Legendre per radial panel, split at the probe radius where
    // the shell average has a kink.
    static const int kNodes = 200;
    static std::vector<double> nodes, weights;
    if (nodes.empty()) {
        nodes.resize(kNodes);
        weights.resize(kNodes);
        for (int i = 0; i < (kNodes + 1) / 2; ++i) {
            double x = std::cos(M_PI * (i + 0.75) / (kNodes + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= kNodes; ++k) {
                    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = kNodes * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-15) break;
            }
            nodes[i] = -x;
            nodes[kNodes - 1 - i] = x;
            const double w = 2.0 / ((1.0 - x * x) * dp * dp);
            weights[i] = w;
            weights[kNodes - 1 - i] = w;
        }
    }
    auto panel = [&](double lo, double hi, double r) {
        if (!(hi > lo)) return 0.0;
        double acc = 0.0;
        for (int q = 0; q < kNodes; ++q) {
            const double rho = 0.5 * (hi + lo) + 0.5 * (hi - lo) * nodes[q];
            const double shell_mass = d * std::pow(rho, d - 1) / std::pow(radius, d);
            acc += weights[q] * 0.5 * (hi - lo) * shell_mass * shell_average(model, r, rho);
        }
        return acc;
    };

    LagrangeReport report;
    double in_min = kInf, in_max = -kInf, out_min = kInf;
    double in_sum = 0.0;
    int in_count = 0;
    for (double r : probe_radii) {
        const double split = std::min(std::abs(r), radius);
        const double u = panel(0.0, split, r) + panel(split, radius, r);
        const double total = u + model.confinement.value_radial(std::abs(r));
        if (std::abs(r) < radius) {
            in_min = std::min(in_min, total);
            in_max = std::max(in_max, total);
            in_sum += total;
            ++in_count;
        } else {
            out_min = std::min(out_min, total);
        }
    }
    if (in_count == 0) throw UsageError("lagrange_ball_quadrature: no interior probes");
    report.inside_variation = in_max - in_min;
    report.inside_mean = in_sum / in_count;
    report.outside_violation =
        std::isfinite(out_min) ? std::max(0.0, report.inside_mean - out_min) : 0.0;
    return report;
}

std::vector<double> default_probes(int dimension, double radius, int count, std::uint64_t seed) {
    if (dimension < 1 || count < 2 || !(radius > 0.0))
        throw UsageError("default_probes: bad parameters");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::vector<double> probes;
    probes.reserve(static_cast<std::size_t>(count) * dimension);
    for (int p = 0; p < count; ++p) {
        // half inside (10%..90% of R), half outside (110%..200%)
        const bool inside = p % 2 == 0;
        const double frac = static_cast<double>(p / 2) / std::max(1, (count + 1) / 2);
        const double r = inside ? radius * (0.1 + 0.8 * frac) : radius * (1.1 + 0.9 * frac);
        std::vector<double> dir(dimension);
        double norm2 = 0.0;
        do {
            norm2 = 0.0;
            for (double& v : dir) {
                v = normal(rng);
                norm2 += v * v;
            }
        } while (norm2 < 1e-12);
        const double scale = r / std::sqrt(norm2);
        for (double v : dir) probes.push_back(v * scale);
    }
    return probes;
}

} // namespace egl
