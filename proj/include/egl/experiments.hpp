#pragma once

#include "egl/config.hpp"
#include "egl/gas.hpp"
#include "egl/report.hpp"

namespace egl {

// Builds the gas model described by a validated `gas` config.
GasModel model_from_config(const ExperimentConfig& cfg);

// I(mu_*) for a uniform-ball prediction with quadratic confinement:
// (C_* + c E|x|^2) / 2, with E|x|^2 = d R^2 / (d + 2).
double analytic_rate_minimum(const GasModel& model, const EquilibriumPrediction& prediction);

// Each runner writes its artifacts under cfg.out_dir and returns the summary
// bundle (also written there as summary.json by run_experiment).
ReportBundle run_markov(const ExperimentConfig& cfg);
ReportBundle run_clt(const ExperimentConfig& cfg);
ReportBundle run_free(const ExperimentConfig& cfg);
ReportBundle run_gas(const ExperimentConfig& cfg);

// Dispatch + summary emission. Exit status mapping is the caller's job.
ReportBundle run_experiment(const ExperimentConfig& cfg);

} // namespace egl
