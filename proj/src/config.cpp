#include "egl/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "egl/errors.hpp"

namespace egl {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

int edit_distance(const std::string& a, const std::string& b) {
    std::vector<int> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<int>(j);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = static_cast<int>(i);
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

struct KeySpec {
    const char* key;
    const char* default_value; // nullptr = required
};

// Echo order is the declaration order below.
const std::vector<KeySpec>& subcommand_keys(const std::string& sub) {
    static const std::vector<KeySpec> gas = {
        {"dim", nullptr},       {"n_particles", nullptr}, {"beta", nullptr},
        {"potential", nullptr}, {"kernel", nullptr},      {"steps", "100000"},
        {"burn_in", "20000"},   {"thin", "100"},          {"seed", "1"},
        {"dt", "auto"},         {"out_dir", "out"},
    };
    static const std::vector<KeySpec> markov = {
        {"model", "mm-infinity"}, {"chain", ""},     {"lambda", "3"},
        {"mu", "1"},              {"truncation", "30"}, {"t_max", "5"},
        {"dt", "0.05"},           {"init", "dirac:0"},  {"seed", "1"},
        {"out_dir", "out"},
    };
    static const std::vector<KeySpec> clt = {
        {"start", "uniform"},  {"grid_step", "0.001953125"}, {"doublings", "4"},
        {"heat_t", "0.5"},     {"heat_h", "0.001"},          {"seed", "1"},
        {"out_dir", "out"},
    };
    static const std::vector<KeySpec> freemod = {
        {"d_list", "4,8,16,32,64"}, {"max_order", "5"},
        {"km_d_list", "3,4,5,6"},   {"km_max_order", "12"},
        {"seed", "1"},              {"out_dir", "out"},
    };
    if (sub == "gas") return gas;
    if (sub == "markov") return markov;
    if (sub == "clt") return clt;
    if (sub == "free") return freemod;
    throw UsageError("unknown subcommand " + sub);
}

} // namespace

const std::string& ExperimentConfig::get(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end()) throw StructuralError("config key missing after validation: " + key);
    return it->second;
}

double ExperimentConfig::get_double(const std::string& key) const {
    const std::string& v = get(key);
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw UsageError("key " + key + ": expected a number, got '" + v + "'");
    }
}

long ExperimentConfig::get_long(const std::string& key) const {
    const std::string& v = get(key);
    try {
        std::size_t pos = 0;
        const long x = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw UsageError("key " + key + ": expected an integer, got '" + v + "'");
    }
}

std::map<std::string, std::string> parse_key_value_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw UsageError("cannot open config file " + path);
    std::map<std::string, std::string> out;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw UsageError("config line " + std::to_string(lineno) + ": expected key=value");
        const std::string key = trim(t.substr(0, eq));
        const std::string val = trim(t.substr(eq + 1));
        if (key.empty())
            throw UsageError("config line " + std::to_string(lineno) + ": empty key");
        if (!out.emplace(key, val).second)
            throw UsageError("duplicate config key " + key);
    }
    return out;
}

ExperimentConfig validate_config(const std::string& subcommand,
                                 std::map<std::string, std::string> raw) {
    const auto& spec = subcommand_keys(subcommand);

    for (const auto& [key, value] : raw) {
        bool known = false;
        for (const auto& ks : spec)
            if (key == ks.key) {
                known = true;
                break;
            }
        if (known) continue;
        std::string best;
        int best_dist = 3;
        for (const auto& ks : spec) {
            const int d = edit_distance(key, ks.key);
            if (d < best_dist) {
                best_dist = d;
                best = ks.key;
            }
        }
        std::string msg = "unknown key " + key;
        if (!best.empty()) msg += "; did you mean " + best;
        throw UsageError(msg);
    }

    std::vector<std::string> missing;
    ExperimentConfig cfg;
    cfg.subcommand = subcommand;
    for (const auto& ks : spec) {
        auto it = raw.find(ks.key);
        if (it != raw.end()) {
            cfg.values[ks.key] = it->second;
        } else if (ks.default_value) {
            cfg.values[ks.key] = ks.default_value;
        } else {
            missing.push_back(ks.key);
            continue;
        }
        cfg.key_order.push_back(ks.key);
    }
    if (!missing.empty()) {
        std::string msg = "missing required keys:";
        for (const auto& k : missing) msg += " " + k;
        throw UsageError(msg);
    }

    // beta=N^2 shorthand
    if (subcommand == "gas" && cfg.values["beta"] == "N^2") {
        const long n = cfg.get_long("n_particles");
        std::ostringstream b;
        b << static_cast<double>(n) * static_cast<double>(n);
        cfg.values["beta"] = b.str();
    }

    if (cfg.values.count("seed")) {
        const long s = cfg.get_long("seed");
        if (s < 0) throw UsageError("key seed: must be non-negative");
        cfg.seed = static_cast<std::uint64_t>(s);
    }
    cfg.out_dir = cfg.values.count("out_dir") ? cfg.values["out_dir"] : "out";
    return cfg;
}

namespace {

const std::map<std::string, std::pair<std::string, std::map<std::string, std::string>>>&
preset_table() {
    static const std::map<std::string, std::pair<std::string, std::map<std::string, std::string>>>
        table = {
            {"ginibre-circular-law",
             {"gas",
              {{"dim", "2"},
               {"n_particles", "500"},
               {"beta", "N^2"},
               {"potential", "quadratic:1"},
               {"kernel", "log2d:2"},
               {"steps", "200000"},
               {"burn_in", "20000"},
               {"thin", "100"},
               {"seed", "1"},
               {"dt", "auto"}}}},
            {"gue-semicircle",
             {"gas",
              {{"dim", "1"},
               {"n_particles", "200"},
               {"beta", "N^2"},
               {"potential", "quadratic:0.5"},
               {"kernel", "log2d:2"},
               {"steps", "200000"},
               {"burn_in", "20000"},
               {"thin", "100"},
               {"seed", "1"},
               {"dt", "auto"}}}},
            {"coulomb-ball-3d",
             {"gas",
              {{"dim", "3"},
               {"n_particles", "500"},
               // Warm enough to melt the surface shell layering that dominates
               // the radial KS statistic at beta = N^2, cold enough (>> N log N)
               // that the edge stays sharp; ks has a wide flat optimum here.
               {"beta", "120000"},
               {"potential", "quadratic:1"},
               {"kernel", "coulomb"},
               {"steps", "100000"},
               {"burn_in", "20000"},
               {"thin", "100"},
               {"seed", "1"},
               {"dt", "auto"}}}},
            {"mm-infinity-free-energy",
             {"markov",
              {{"model", "mm-infinity"},
               {"lambda", "3"},
               {"mu", "1"},
               {"truncation", "30"},
               {"t_max", "5"},
               {"dt", "0.05"},
               {"init", "dirac:0"},
               {"seed", "1"}}}},
        };
    return table;
}

} // namespace

bool is_preset(const std::string& name) { return preset_table().count(name) > 0; }

std::string preset_subcommand(const std::string& name) {
    auto it = preset_table().find(name);
    if (it == preset_table().end()) throw UsageError("unknown preset " + name);
    return it->second.first;
}

std::map<std::string, std::string> preset_values(const std::string& name) {
    auto it = preset_table().find(name);
    if (it == preset_table().end()) throw UsageError("unknown preset " + name);
    return it->second.second;
}

ExperimentConfig load_config(const std::string& subcommand, const std::string& config_arg) {
    if (is_preset(config_arg)) {
        const std::string sub = preset_subcommand(config_arg);
        if (sub != subcommand)
            throw UsageError("preset " + config_arg + " belongs to subcommand " + sub);
        return validate_config(subcommand, preset_values(config_arg));
    }
    return validate_config(subcommand, parse_key_value_file(config_arg));
}

} // namespace egl
