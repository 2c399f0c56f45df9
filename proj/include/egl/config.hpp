#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace egl {

struct ExperimentConfig {
    std::string subcommand;              // markov | clt | free | gas
    std::map<std::string, std::string> values; // validated, defaults filled
    std::vector<std::string> key_order;  // deterministic echo order
    std::string out_dir = "out";
    std::uint64_t seed = 1;

    const std::string& get(const std::string& key) const;
    double get_double(const std::string& key) const;
    long get_long(const std::string& key) const;
};

// Raw key=value lines; '#' comments and blank lines skipped; duplicates rejected.
std::map<std::string, std::string> parse_key_value_file(const std::string& path);

// Validates keys for the subcommand, fills defaults, resolves beta=N^2.
// Unknown keys get a nearest-match suggestion; missing keys are listed at once.
ExperimentConfig validate_config(const std::string& subcommand,
                                 std::map<std::string, std::string> raw);

// Built-in named presets (ginibre-circular-law, gue-semicircle, coulomb-ball-3d,
// mm-infinity-free-energy). Returns the subcommand the preset belongs to.
bool is_preset(const std::string& name);
std::string preset_subcommand(const std::string& name);
std::map<std::string, std::string> preset_values(const std::string& name);

// --config accepts a preset name or a file path.
ExperimentConfig load_config(const std::string& subcommand, const std::string& config_arg);

} // namespace egl
