#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "smallimpact/coeffs.hpp"
#include "smallimpact/model.hpp"

namespace smallimpact {

/// Terminal penalization requested in the run section: a number, "inf" or "min".
struct PenaltySpec {
    bool minimal = false;
    double value = kInfinity;

    /// N for the given parameters (minimal: min_penalization(params)).
    [[nodiscard]] double resolve(const ModelParams& params) const;
    [[nodiscard]] std::string label() const;
};

struct NumericsConfig {
    std::size_t steps = 4096;
    bool refined = true;
    double chi_step = 0.025;
    double chi_sds = 6.0;
    double hausdorff_r = 0.0;   ///< 0 selects dt_max / 4 min(1, x0)
    double eps = 0.05;
    SolverOptions solver;

    [[nodiscard]] GridPtr grid(double T) const;
};

struct MollifierConfig {
    double beta = 0.05;
    double nu = 0.01;
    double eps = 0.05;
};

struct RunConfig {
    std::vector<double> etas{1e-1, 1e-2, 1e-3};
    std::vector<std::uint64_t> seeds{0};
    std::vector<PenaltySpec> penalties{PenaltySpec{}};
    std::filesystem::path out = "out";
    unsigned threads = 0;
    std::string strategy = "theta-hat";
    std::size_t coeff_stride = 8;   ///< thinning of spatial coefficient CSVs
    MollifierConfig mollifier;
};

/// JSON layout:
///   {"model":    {"gamma", "T", "x0"},
///    "factor":   {"family", ...family parameters},
///    "numerics": {"steps", "refined", "chi_step", "chi_sds", "hausdorff_r", "eps",
///                 "delta0", "newton_tol", "max_newton", "ode_tol"},
///    "run":      {"etas", "seeds" (list or "a..b"), "N" (list of numbers, "inf", "min"),
///                 "out", "threads", "strategy", "coeff_stride",
///                 "mollifier": {"beta", "nu", "eps"}}}
struct ExperimentConfig {
    ModelParams model;          ///< eta and N are set per run entry
    std::string family;
    nlohmann::json factor_spec;
    FactorModel factor;
    NumericsConfig numerics;
    RunConfig run;
    std::string config_hash;    ///< FNV-1a of the canonical JSON dump

    /// model with eta and N filled in.
    [[nodiscard]] ModelParams at(double eta, const PenaltySpec& N) const;
};

/// Throws ConfigError on unknown sections or keys, wrong types, invalid
/// parameters (model validate() for every eta and N), nonpositive etas or
/// repeated seeds.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& file);

/// "a..b" (inclusive) or a single integer.
std::vector<std::uint64_t> parse_seed_range(const std::string& s);

/// Re-runs the cross-field checks after command-line overrides.
void check_config(const ExperimentConfig& c);

}  // namespace smallimpact
