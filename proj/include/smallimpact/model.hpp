#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

namespace smallimpact {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Market and model constants.
struct ModelParams {
    double gamma = 1.0;       ///< transient impact slope
    double T = 1.0;           ///< horizon
    double x0 = 1.0;          ///< initial inventory (shares)
    double eta = 0.0;         ///< instantaneous impact; 0 selects the limit model
    double N = kInfinity;     ///< terminal penalization; +inf means strict liquidation
    double rho_lo = 1.0;      ///< lower bound of the resilience
    double rho_hi = 1.0;      ///< upper bound of the resilience
    double lambda_hi = 0.0;   ///< upper bound of the risk aversion

    [[nodiscard]] bool strict_liquidation() const { return N == kInfinity; }
};

using CoefficientFn = std::function<double(double t, double chi)>;

/// One-dimensional factor diffusion d chi = mu dt + sigma dW driving
/// (rho, lambda) = (f_rho, f_lambda)(t, chi).
struct FactorModel {
    std::string family;       ///< predefined family name, or "custom"
    CoefficientFn mu;
    CoefficientFn sigma;
    CoefficientFn f_rho;
    CoefficientFn f_lambda;
    double chi0 = 0.0;
    bool diffusive = false;   ///< false iff sigma == 0 identically
    double sigma_max = 0.0;   ///< bound on |sigma| used for grid sizing
    double mu_max = 0.0;      ///< bound on |mu|
};

/// Constants that the a priori estimates are expressed in.
struct DerivedBounds {
    double kappa_bar = 0.0;   ///< sqrt(2 max(lambda_hi, gamma rho_hi))
    double phi_lo = 0.0;      ///< sqrt(2 gamma rho_lo)
    double phi_hi = 0.0;      ///< sqrt(lambda_hi + 2 gamma rho_hi)
    double gamma = 0.0;
    double rho_lo = 0.0;
    double rho_hi = 0.0;
    double lambda_hi = 0.0;
    double T = 0.0;

    /// Lower bound exp(-phi_lo^-2 gamma rho_hi^2 (T - t)) of the limit coefficient B0.
    [[nodiscard]] double B0_lower(double t) const;
    [[nodiscard]] double D0_lower() const;
    [[nodiscard]] double D0_upper() const;
    [[nodiscard]] double E0_lower() const;
    [[nodiscard]] double E0_upper() const;
};

DerivedBounds derive_bounds(const ModelParams& p);

struct ValidationReport {
    std::vector<std::string> violations;
    [[nodiscard]] bool ok() const { return violations.empty(); }
};

/// phi = sqrt(lambda + 2 gamma rho). Throws std::domain_error for rho <= 0,
/// lambda < 0 or gamma <= 0.
double phi(double rho, double lambda, double gamma);

/// Smallest admissible finite penalization for the given eta:
/// gamma + 1 + sqrt(2 eta max(lambda_hi, gamma rho_hi)).
double min_penalization(const ModelParams& p);

/// Checks parameter invariants and samples the factor coefficients on a
/// (t, chi) grid covering chi0 +/- 6 sigma_max sqrt(T).
ValidationReport validate(const ModelParams& params, const FactorModel& factor);

/// Named factor families. Recognized keys in `spec`:
///   "constant":            rho, lambda
///   "lambda-equals-C-rho": rho, C, rho_amp, rho_freq   (rho(t) = rho (1 + rho_amp sin(rho_freq t)))
///   "fig1-sine":           lambda, amp, freq           (rho = 1 + amp sin(freq chi), chi = W)
/// Throws ConfigError for an unknown family.
FactorModel make_factor(const std::string& family, const nlohmann::json& spec = nlohmann::json::object());

/// Bounds (rho_lo, rho_hi, lambda_hi) implied by a predefined family.
void apply_family_bounds(const std::string& family, const nlohmann::json& spec, ModelParams& params);

}  // namespace smallimpact
