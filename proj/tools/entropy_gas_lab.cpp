#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "egl/config.hpp"
#include "egl/errors.hpp"
#include "egl/experiments.hpp"

namespace {

int check_threads_env() {
    const char* env = std::getenv("ENTROPY_LAB_THREADS");
    if (!env || !*env) return 1;
    try {
        std::size_t pos = 0;
        const int n = std::stoi(env, &pos);
        if (pos != std::string(env).size() || n < 1) throw std::invalid_argument(env);
        return n;
    } catch (const std::exception&) {
        throw egl::UsageError("ENTROPY_LAB_THREADS must be a positive integer");
    }
}

struct SubArgs {
    std::string config;
    std::string out;
    long seed = -1;
};

void add_subcommand(CLI::App& app, const std::string& name, const std::string& desc,
                    SubArgs& args, bool& chosen_flag) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("--config", args.config, "config file path or preset name")->required();
    sub->add_option("--seed", args.seed, "override the config seed");
    sub->add_option("--out", args.out, "override the output directory");
    sub->callback([&chosen_flag] { chosen_flag = true; });
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"entropy, free energy, and mean-field gas experiments"};
    app.require_subcommand(1);

    const std::string names[4] = {"markov", "clt", "free", "gas"};
    const std::string descs[4] = {
        "finite-chain free-energy decay and Pinsker checks",
        "entropy along CLT doublings and the de Bruijn identity",
        "tree-walk moments, free CLT scaling, Kesten-McKay identity",
        "MALA sampling of a confined Coulomb/Riesz gas",
    };
    SubArgs args[4];
    bool chosen[4] = {false, false, false, false};
    for (int i = 0; i < 4; ++i) add_subcommand(app, names[i], descs[i], args[i], chosen[i]);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    int which = 0;
    while (which < 4 && !chosen[which]) ++which;

    try {
        check_threads_env(); // validated; execution is sequential
        egl::ExperimentConfig cfg = egl::load_config(names[which], args[which].config);
        if (args[which].seed >= 0) {
            cfg.seed = static_cast<std::uint64_t>(args[which].seed);
            cfg.values["seed"] = std::to_string(args[which].seed);
        }
        if (!args[which].out.empty()) {
            cfg.out_dir = args[which].out;
            if (cfg.values.count("out_dir")) cfg.values["out_dir"] = args[which].out;
        }
        const egl::ReportBundle bundle = egl::run_experiment(cfg);
        for (const egl::Metric& m : bundle.metrics)
            std::cout << (m.pass ? "PASS " : "FAIL ") << m.name << " = "
                      << egl::format_double(m.value) << " (tolerance "
                      << egl::format_double(m.tolerance) << ")\n";
        return bundle.all_pass() ? 0 : 1;
    } catch (const egl::UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
