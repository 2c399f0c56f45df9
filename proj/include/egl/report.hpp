#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace egl {

struct Metric {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0; // the bound the value was judged against
    bool pass = false;
};

struct ReportBundle {
    std::string version = "1.0";
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, std::string>> config_echo; // insertion order kept
    std::vector<Metric> metrics;
    std::vector<std::string> artifacts; // paths relative to out_dir
    bool failed_marker = false;         // set when a module error aborted the run

    bool all_pass() const;
    void add(const std::string& name, double value, double tolerance, bool pass);
};

std::string format_double(double v); // 17 significant digits, round-trip exact

// Renders the summary deterministically (stable key order, %.17g numerics).
std::string render_summary(const ReportBundle& bundle);

// Writes summary.json atomically (temp file + rename). Returns written paths.
std::vector<std::string> write_report(const ReportBundle& bundle, const std::string& out_dir);

ReportBundle read_report(const std::string& path);

// Shared atomic file write used for all artifacts.
void atomic_write_file(const std::string& path, const std::string& content);

} // namespace egl
