#include "egl/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "egl/errors.hpp"

namespace egl {

bool ReportBundle::all_pass() const {
    if (failed_marker) return false;
    for (const Metric& m : metrics)
        if (!m.pass) return false;
    return true;
}

void ReportBundle::add(const std::string& name, double value, double tolerance, bool pass) {
    metrics.push_back({name, value, tolerance, pass});
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::string quote(const std::string& s) {
    nlohmann::json j = s; // reuse the library's string escaping
    return j.dump();
}

} // namespace

std::string render_summary(const ReportBundle& bundle) {
    std::ostringstream out;
    out << "{\n";
    out << "  \"version\": " << quote(bundle.version) << ",\n";
    out << "  \"seed\": " << bundle.seed << ",\n";
    out << "  \"status\": " << quote(bundle.failed_marker ? "FAILED"
                                     : bundle.all_pass()  ? "pass"
                                                          : "check-failure")
        << ",\n";
    out << "  \"config\": {";
    for (std::size_t i = 0; i < bundle.config_echo.size(); ++i) {
        out << (i ? ",\n    " : "\n    ") << quote(bundle.config_echo[i].first) << ": "
            << quote(bundle.config_echo[i].second);
    }
    out << (bundle.config_echo.empty() ? "},\n" : "\n  },\n");
    out << "  \"metrics\": [";
    for (std::size_t i = 0; i < bundle.metrics.size(); ++i) {
        const Metric& m = bundle.metrics[i];
        out << (i ? ",\n    " : "\n    ") << "{\"name\": " << quote(m.name)
            << ", \"value\": " << format_double(m.value)
            << ", \"tolerance\": " << format_double(m.tolerance)
            << ", \"pass\": " << (m.pass ? "true" : "false") << "}";
    }
    out << (bundle.metrics.empty() ? "],\n" : "\n  ],\n");
    out << "  \"artifacts\": [";
    for (std::size_t i = 0; i < bundle.artifacts.size(); ++i)
        out << (i ? ", " : "") << quote(bundle.artifacts[i]);
    out << "]\n}\n";
    return out.str();
}

void atomic_write_file(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw StructuralError("cannot write " + tmp);
        f << content;
        if (!f.good()) throw StructuralError("short write to " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw StructuralError("rename " + tmp + " -> " + path + ": " + ec.message());
}

std::vector<std::string> write_report(const ReportBundle& bundle, const std::string& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw StructuralError("cannot create " + out_dir + ": " + ec.message());
    const std::string path = (std::filesystem::path(out_dir) / "summary.json").string();
    atomic_write_file(path, render_summary(bundle));
    return {path};
}

ReportBundle read_report(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw StructuralError("cannot read " + path);
    nlohmann::ordered_json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw StructuralError("malformed summary " + path + ": " + e.what());
    }
    ReportBundle b;
    b.version = j.at("version").get<std::string>();
    b.seed = j.at("seed").get<std::uint64_t>();
    b.failed_marker = j.at("status").get<std::string>() == "FAILED";
    for (auto& [key, val] : j.at("config").items())
        b.config_echo.emplace_back(key, val.get<std::string>());
    for (auto& m : j.at("metrics"))
        b.metrics.push_back({m.at("name").get<std::string>(), m.at("value").get<double>(),
                             m.at("tolerance").get<double>(), m.at("pass").get<bool>()});
    for (auto& a : j.at("artifacts")) b.artifacts.push_back(a.get<std::string>());
    return b;
}

} // namespace egl
