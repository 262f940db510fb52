#pragma once

#include <iosfwd>
#include <string>

#include "smallimpact/config.hpp"

namespace smallimpact {

/// Coefficient CSVs and caches for every (eta, N) in the run section plus the
/// limit coefficients; prints a bound-check summary. Bound violations beyond
/// the solver tolerance raise NumericFault.
void cmd_solve_coefficients(const ExperimentConfig& config, std::ostream& log);

/// Per-seed factor paths, limit state with its jump sidecar, pre-limit states
/// for every (eta, N), and simulate_report.json with per-path invariants.
void cmd_simulate(const ExperimentConfig& config, std::ostream& log);

/// Convergence study per N entry: study_N<label>.json and .csv (eta x metric).
void cmd_study(const ExperimentConfig& config, std::ostream& log);

/// Cost report for `strategy`: "theta-hat", "block", "linear", "mollified", or
/// the path of a strategy JSON file.
void cmd_cost(const ExperimentConfig& config, const std::string& strategy, std::ostream& log);

/// Plot data on one fig1-sine path: fig1.csv with X for every eta and the
/// limit (two rows at each jump time).
void cmd_reproduce_fig1(const ExperimentConfig& config, std::ostream& log);

/// Built-in configuration: gamma = 3, lambda = 1, rho = 1 + 0.9 sin(2.5 W),
/// T = x0 = 1, etas {1e-1, 1e-2, 1e-3}, seed 0.
ExperimentConfig fig1_config();

/// Entry point of the command-line tool. Exit codes: 0 ok, 2 numeric fault,
/// 3 configuration fault, 1 other failures.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace smallimpact
