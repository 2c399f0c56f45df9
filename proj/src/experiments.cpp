#include "egl/experiments.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "egl/errors.hpp"
#include "egl/free_moments.hpp"
#include "egl/grid_density.hpp"
#include "egl/markov.hpp"
#include "egl/particles.hpp"

namespace egl {

namespace {

std::vector<int> parse_int_list(const std::string& s, const std::string& key) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t pos = 0;
            out.push_back(std::stoi(tok, &pos));
            if (pos != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw UsageError("key " + key + ": expected a comma-separated integer list");
        }
    }
    if (out.empty()) throw UsageError("key " + key + ": empty list");
    return out;
}

double parse_tagged_value(const std::string& spec, const std::string& tag,
                          const std::string& key) {
    // "<tag>:<number>"
    if (spec.size() <= tag.size() + 1 || spec.compare(0, tag.size(), tag) != 0 ||
        spec[tag.size()] != ':')
        throw UsageError("key " + key + ": expected " + tag + ":<number>, got '" + spec + "'");
    try {
        std::size_t pos = 0;
        const std::string num = spec.substr(tag.size() + 1);
        const double v = std::stod(num, &pos);
        if (pos != num.size()) throw std::invalid_argument(num);
        return v;
    } catch (const std::exception&) {
        throw UsageError("key " + key + ": expected " + tag + ":<number>, got '" + spec + "'");
    }
}

std::filesystem::path out_path(const ExperimentConfig& cfg, const std::string& name) {
    std::filesystem::create_directories(cfg.out_dir);
    return std::filesystem::path(cfg.out_dir) / name;
}

void echo_config(ReportBundle& bundle, const ExperimentConfig& cfg) {
    bundle.seed = cfg.seed;
    for (const std::string& key : cfg.key_order)
        bundle.config_echo.emplace_back(key, cfg.get(key));
}

} // namespace

GasModel model_from_config(const ExperimentConfig& cfg) {
    GasModel model;
    model.dimension = static_cast<int>(cfg.get_long("dim"));
    model.particle_count = static_cast<int>(cfg.get_long("n_particles"));
    model.beta = cfg.get_double("beta");

    const std::string& pot = cfg.get("potential");
    model.confinement = ConfinementPotential::quadratic(
        parse_tagged_value(pot, "quadratic", "potential"));

    const std::string& ker = cfg.get("kernel");
    if (ker == "coulomb")
        model.interaction = InteractionKernel::coulomb(model.dimension);
    else if (ker.rfind("riesz:", 0) == 0)
        model.interaction =
            InteractionKernel::riesz(model.dimension, parse_tagged_value(ker, "riesz", "kernel"));
    else if (ker.rfind("log2d:", 0) == 0)
        model.interaction = InteractionKernel::log2d(parse_tagged_value(ker, "log2d", "kernel"));
    else
        throw UsageError("key kernel: expected coulomb, riesz:<alpha>, or log2d:<s>");
    model.validate();
    return model;
}

double analytic_rate_minimum(const GasModel& model, const EquilibriumPrediction& prediction) {
    if (prediction.kind != EquilibriumPrediction::Kind::UniformBall ||
        !prediction.modified_robin_constant ||
        model.confinement.tag != ConfinementPotential::Tag::Quadratic)
        throw UsageError("analytic_rate_minimum: needs a ball prediction with a Robin constant");
    const double r2_mean =
        model.dimension * prediction.radius * prediction.radius / (model.dimension + 2);
    return 0.5 * (*prediction.modified_robin_constant + model.confinement.c * r2_mean);
}

// ---------------------------------------------------------------------------

ReportBundle run_markov(const ExperimentConfig& cfg) {
    ReportBundle bundle;
    echo_config(bundle, cfg);

    FiniteChain gen;
    const std::string& model = cfg.get("model");
    const std::string& chain_path = cfg.get("chain");
    if (!chain_path.empty()) {
        gen = load_chain(chain_path);
    } else if (model == "mm-infinity") {
        gen = mm_infinity_generator(cfg.get_double("lambda"), cfg.get_double("mu"),
                                    static_cast<int>(cfg.get_long("truncation")));
    } else {
        throw UsageError("key model: expected mm-infinity (or set chain=<path>)");
    }
    if (gen.kind != ChainKind::Generator)
        throw UsageError("markov: continuous-time trace needs a generator chain");

    const ProbVector pi = invariant_measure(gen);
    ProbVector mu0;
    const std::string& init = cfg.get("init");
    mu0.weights.assign(gen.size, 0.0);
    if (init == "uniform") {
        mu0.weights.assign(gen.size, 1.0 / gen.size);
    } else {
        const int k = static_cast<int>(parse_tagged_value(init, "dirac", "init"));
        if (k < 0 || k >= gen.size) throw UsageError("key init: dirac state out of range");
        mu0.weights[k] = 1.0;
    }

    const double dt = cfg.get_double("dt");
    const double t_max = cfg.get_double("t_max");
    if (!(dt > 0.0) || !(t_max > dt)) throw UsageError("markov: need 0 < dt < t_max");
    const int steps = static_cast<int>(std::floor(t_max / dt + 1e-9));

    std::ostringstream csv;
    csv << "t,free_energy,tv,pinsker_bound,d1,d2\n";
    std::vector<double> kl_trace;
    double max_increment = -std::numeric_limits<double>::infinity();
    double max_pinsker_violation = -std::numeric_limits<double>::infinity();
    double max_first_derivative = -std::numeric_limits<double>::infinity();
    for (int n = 0; n <= steps; ++n) {
        const double t = n * dt;
        const ProbVector mu_t = ct_evolve(gen, mu0, t);
        const double kl = relative_entropy(mu_t, pi);
        const double tv = total_variation(mu_t, pi);
        const double bound = std::sqrt(2.0 * kl);
        double d1 = std::numeric_limits<double>::quiet_NaN();
        double d2 = std::numeric_limits<double>::quiet_NaN();
        // mu_t is strictly positive once t > 0, but far-tail entries can still
        // underflow to zero at small t; skip the derivative columns there.
        bool positive = n > 0;
        for (int i = 0; positive && i < mu_t.size(); ++i)
            if (mu_t[i] <= 0.0) positive = false;
        if (positive) {
            const FreeEnergyDerivatives der = free_energy_derivatives(gen, mu_t);
            d1 = der.first;
            d2 = der.second;
            max_first_derivative = std::max(max_first_derivative, d1);
        }
        if (!kl_trace.empty()) max_increment = std::max(max_increment, kl - kl_trace.back());
        max_pinsker_violation = std::max(max_pinsker_violation, tv - bound);
        kl_trace.push_back(kl);
        csv << format_double(t) << ',' << format_double(kl) << ',' << format_double(tv) << ','
            << format_double(bound) << ',' << format_double(d1) << ',' << format_double(d2)
            << '\n';
    }
    atomic_write_file(out_path(cfg, "free_energy_trace.csv").string(), csv.str());
    bundle.artifacts.push_back("free_energy_trace.csv");

    bundle.add("kl_max_increment", max_increment, 1e-12, max_increment <= 1e-12);
    bundle.add("pinsker_max_violation", max_pinsker_violation, 1e-12,
               max_pinsker_violation <= 1e-12);
    bundle.add("first_derivative_max", max_first_derivative, 1e-12,
               max_first_derivative <= 1e-12);
    bundle.add("decay_rate", decay_rate_regression(kl_trace, dt), 0.0, true);
    return bundle;
}

ReportBundle run_clt(const ExperimentConfig& cfg) {
    ReportBundle bundle;
    echo_config(bundle, cfg);

    const double step = cfg.get_double("grid_step");
    const std::string& start = cfg.get("start");
    GridDensity f;
    if (start == "uniform") {
        const double a = std::sqrt(3.0);
        f = GridDensity::uniform(-a, a, step);
    } else if (start == "gaussian") {
        f = GridDensity::gaussian(0.0, 1.0, step);
    } else {
        throw UsageError("key start: expected uniform or gaussian");
    }

    const int doublings = static_cast<int>(cfg.get_long("doublings"));
    if (doublings < 1) throw UsageError("key doublings: must be >= 1");

    std::ostringstream csv;
    csv << "k,entropy,increment\n";
    double prev = entropy(f);
    csv << "0," << format_double(prev) << ",\n";
    double min_increment = std::numeric_limits<double>::infinity();
    GridDensity g = f;
    for (int k = 1; k <= doublings; ++k) {
        g = clt_step(g);
        const double s = entropy(g);
        min_increment = std::min(min_increment, s - prev);
        csv << k << ',' << format_double(s) << ',' << format_double(s - prev) << '\n';
        prev = s;
    }
    atomic_write_file(out_path(cfg, "entropy_sequence.csv").string(), csv.str());
    save_density_csv(g, out_path(cfg, "density_final.csv"));
    bundle.artifacts.push_back("entropy_sequence.csv");
    bundle.artifacts.push_back("density_final.csv");

    const double residual = de_bruijn_residual(f, cfg.get_double("heat_t"),
                                               cfg.get_double("heat_h"));
    const double gaussian_entropy = 0.5 * std::log(2.0 * M_PI * std::exp(1.0));
    bundle.add("entropy_min_increment", min_increment, 0.0, min_increment > 0.0);
    bundle.add("entropy_final_gap", gaussian_entropy - prev, 0.05,
               std::abs(gaussian_entropy - prev) < 0.05);
    bundle.add("de_bruijn_residual", residual, 1e-3, residual < 1e-3);
    return bundle;
}

ReportBundle run_free(const ExperimentConfig& cfg) {
    ReportBundle bundle;
    echo_config(bundle, cfg);

    const std::vector<int> d_list = parse_int_list(cfg.get("d_list"), "d_list");
    const int max_order = static_cast<int>(cfg.get_long("max_order"));

    std::ostringstream csv;
    csv << "d,m,scaled_moment,catalan,gap\n";
    double max_monotonicity_violation = -std::numeric_limits<double>::infinity();
    double worst_final_ratio = 0.0;
    for (int m = 1; m <= max_order; ++m) {
        const double c_m = static_cast<double>(catalan(m));
        double prev_gap = std::numeric_limits<double>::infinity();
        for (int d : d_list) {
            const double scaled = free_clt_scaled_moment(d, m);
            const double gap = std::abs(scaled - c_m);
            max_monotonicity_violation = std::max(max_monotonicity_violation, gap - prev_gap);
            prev_gap = gap;
            csv << d << ',' << m << ',' << format_double(scaled) << ',' << format_double(c_m)
                << ',' << format_double(gap) << '\n';
        }
        worst_final_ratio = std::max(worst_final_ratio, prev_gap / c_m);
    }
    atomic_write_file(out_path(cfg, "free_clt_moments.csv").string(), csv.str());
    bundle.artifacts.push_back("free_clt_moments.csv");

    // Kesten-McKay quadrature moments against exact tree-walk counts.
    const std::vector<int> km_d = parse_int_list(cfg.get("km_d_list"), "km_d_list");
    const int km_max = static_cast<int>(cfg.get_long("km_max_order"));
    std::ostringstream km_csv;
    km_csv << "d,k,quadrature_moment,tree_walks,relative_gap\n";
    double worst_km_gap = 0.0;
    for (int d : km_d) {
        const MomentFamily fam = MomentFamily::kesten_mckay(d);
        for (int k = 2; k <= km_max; k += 2) {
            const double quad = reference_moment(fam, k);
            const double exact = static_cast<double>(tree_walk_count(d, k));
            const double rel = std::abs(quad - exact) / exact;
            worst_km_gap = std::max(worst_km_gap, rel);
            km_csv << d << ',' << k << ',' << format_double(quad) << ','
                   << format_double(exact) << ',' << format_double(rel) << '\n';
        }
    }
    atomic_write_file(out_path(cfg, "kesten_mckay.csv").string(), km_csv.str());
    bundle.artifacts.push_back("kesten_mckay.csv");

    bundle.add("gap_monotonicity_violation", max_monotonicity_violation, 0.0,
               max_monotonicity_violation <= 0.0);
    bundle.add("final_gap_ratio", worst_final_ratio, 0.1, worst_final_ratio < 0.1);
    bundle.add("kesten_mckay_max_relative_gap", worst_km_gap, 1e-8, worst_km_gap < 1e-8);
    return bundle;
}

ReportBundle run_gas(const ExperimentConfig& cfg) {
    ReportBundle bundle;
    echo_config(bundle, cfg);

    const GasModel model = model_from_config(cfg);
    if (!model.cooling_scheme_satisfied())
        std::cerr << "warning: beta < N log N, outside the cooling-scheme regime\n";
    if (!model.confinement_beats_repulsion())
        std::cerr << "warning: confinement does not visibly dominate the repulsion at range\n";

    SamplerOptions opt;
    opt.steps = cfg.get_long("steps");
    opt.burn_in = cfg.get_long("burn_in");
    opt.thin = cfg.get_long("thin");
    opt.seed = cfg.seed;
    const std::string& dt = cfg.get("dt");
    opt.dt = dt == "auto" ? 0.0 : cfg.get_double("dt");
    const SamplerRun run = run_sampler(model, opt);

    std::ostringstream trace;
    trace << "step,energy,accepted\n";
    for (const EnergyTracePoint& p : run.energy_trace)
        trace << p.step << ',' << format_double(p.energy) << ',' << (p.accepted ? 1 : 0) << '\n';
    atomic_write_file(out_path(cfg, "energy_trace.csv").string(), trace.str());
    bundle.artifacts.push_back("energy_trace.csv");

    if (run.snapshots.empty()) throw NumericError("gas: no snapshots collected");
    save_snapshot(run.snapshots.back(), out_path(cfg, "snapshot_final.txt"));
    bundle.artifacts.push_back("snapshot_final.txt");

    // Pool the thinned snapshots for the empirical statistics.
    ParticleConfiguration pooled;
    pooled.dimension = model.dimension;
    pooled.seed = cfg.seed;
    for (const ParticleConfiguration& snap : run.snapshots)
        pooled.points.insert(pooled.points.end(), snap.points.begin(), snap.points.end());

    bundle.add("acceptance_rate", run.acceptance_rate, 0.0, true);
    bundle.add("dt_final", run.dt_final, 0.0, true);
    bundle.add("final_energy", run.final_energy, 0.0, true);

    const EquilibriumPrediction pred = equilibrium_prediction(model);
    if (pred.kind == EquilibriumPrediction::Kind::Unknown) {
        // No computable equilibrium (riesz): moments and the energy trace only.
        const MomentSequence mom = empirical_moments(pooled, {2, 4}, MomentKind::Radial);
        bundle.add("m2_radial", mom.value_at(2), 0.0, true);
        bundle.add("m4_radial", mom.value_at(4), 0.0, true);
        return bundle;
    }

    const RadialCdf cdf = pred.radial_cdf();
    const double ks = radial_ks_distance(pooled, cdf);
    bundle.add("radial_ks", ks, 0.05, ks < 0.05);
    bundle.add("predicted_radius", pred.radius, 0.0, true);

    if (pred.kind == EquilibriumPrediction::Kind::UniformBall) {
        const int d = model.dimension;
        const double m2_target = d * pred.radius * pred.radius / (d + 2);
        const MomentSequence mom = empirical_moments(pooled, {2}, MomentKind::Radial);
        const double m2 = mom.value_at(2);
        bundle.add("m2_radial", m2, 0.05 * m2_target, std::abs(m2 - m2_target) < 0.05 * m2_target);

        long inside = 0;
        const int n_pool = pooled.size();
        for (int i = 0; i < n_pool; ++i)
            if (pooled.radius(i) <= 1.1 * pred.radius) ++inside;
        const double frac = static_cast<double>(inside) / n_pool;
        bundle.add("fraction_inside_1.1R", frac, 0.99, frac >= 0.99);

        const double rate_min = analytic_rate_minimum(model, pred);
        const double rate = rate_function(run.snapshots.back(), model);
        bundle.add("rate_function_trace", rate, 0.05,
                   std::abs(rate - rate_min) <= 0.05 && std::isfinite(rate));
        bundle.add("rate_function_minimum", rate_min, 0.0, true);

        const LagrangeReport sampled =
            lagrange_residual(pooled, model, pred,
                              default_probes(d, pred.radius, 64, cfg.seed + 101));
        bundle.add("lagrange_inside_variation", sampled.inside_variation, 0.1,
                   sampled.inside_variation < 0.1);
        bundle.add("lagrange_outside_violation", sampled.outside_violation, 0.05,
                   sampled.outside_violation < 0.05);

        const bool quadrature_ok =
            (model.interaction.tag == InteractionKernel::Tag::Coulomb && d == 3) ||
            (model.interaction.tag == InteractionKernel::Tag::Log2D && d == 2) ||
            (model.interaction.tag == InteractionKernel::Tag::Coulomb && d == 2);
        if (quadrature_ok) {
            std::vector<double> radii;
            for (int i = 1; i <= 9; ++i) radii.push_back(0.1 * i * pred.radius);
            for (int i = 0; i < 5; ++i) radii.push_back((1.1 + 0.2 * i) * pred.radius);
            const LagrangeReport quad = lagrange_ball_quadrature(model, pred, radii);
            bundle.add("lagrange_quadrature_inside_variation", quad.inside_variation, 1e-3,
                       quad.inside_variation < 1e-3);
            bundle.add("lagrange_quadrature_outside_violation", quad.outside_violation, 1e-3,
                       quad.outside_violation < 1e-3);
        }
    } else { // semicircle, d = 1
        const MomentSequence mom =
            empirical_moments(pooled, {2, 4}, MomentKind::CoordinateFirstAxis);
        const double half = 0.5 * pred.radius; // moments of the [-R, R] semicircle
        const double m2_target = half * half;
        const double m4_target = 2.0 * half * half * half * half;
        const double m2 = mom.value_at(2), m4 = mom.value_at(4);
        bundle.add("m2_coordinate", m2, 0.05 * m2_target,
                   std::abs(m2 - m2_target) <= 0.05 * m2_target);
        bundle.add("m4_coordinate", m4, 0.075 * m4_target,
                   std::abs(m4 - m4_target) <= 0.075 * m4_target);
    }
    return bundle;
}

ReportBundle run_experiment(const ExperimentConfig& cfg) {
    ReportBundle bundle;
    try {
        if (cfg.subcommand == "markov")
            bundle = run_markov(cfg);
        else if (cfg.subcommand == "clt")
            bundle = run_clt(cfg);
        else if (cfg.subcommand == "free")
            bundle = run_free(cfg);
        else if (cfg.subcommand == "gas")
            bundle = run_gas(cfg);
        else
            throw UsageError("unknown subcommand " + cfg.subcommand);
    } catch (const UsageError&) {
        throw; // nothing partial to keep
    } catch (const std::exception&) {
        bundle.failed_marker = true;
        echo_config(bundle, cfg);
        write_report(bundle, cfg.out_dir);
        throw;
    }
    write_report(bundle, cfg.out_dir);
    return bundle;
}

} // namespace egl
