#pragma once

#include <string>
#include <vector>

#include "smallimpact/field.hpp"
#include "smallimpact/model.hpp"
#include "smallimpact/pathsim.hpp"

namespace smallimpact {

struct SolverOptions {
    /// Singular start-up offset for N = inf is delta0 * sqrt(eta).
    double delta0 = 1e-2;
    double newton_tol = 1e-10;
    int max_newton = 50;
    double bound_tol_pde = 1e-6;
    double bound_tol_ode = 1e-9;
    /// Local error tolerance of the adaptive ODE integrator.
    double ode_tol = 1e-11;
    /// PDE substeps: h <= layer_step * sqrt(eta) / kappa_bar everywhere, and
    /// h <= rel_step * sqrt(eta) / max D while T - t < layer_zone * sqrt(eta) / kappa_bar.
    double rel_step = 0.005;
    double layer_step = 0.25;
    double layer_zone = 8.0;
    /// Throw NumericFault when the a priori envelopes are violated beyond tolerance.
    bool enforce_bounds = true;
};

/// Limit (eta -> 0) coefficients B0, D0 = (lambda + gamma rho B0) / phi and
/// E0 = rho (2 - B0) / phi on a common grid.
struct LimitCoefficients {
    CoefficientField B0;
    CoefficientField D0;
    CoefficientField E0;
};

/// Pre-limit coefficients in the scaled variables
/// D = (A - gamma B) / sqrt(eta), E = (gamma C - B + 1) / sqrt(eta).
///
/// For N = inf the nodes with T - t < delta carry the start-up asymptotics
/// B = 1, E = 0, D = sqrt(eta) / (T - t); the node t = T stores D = +inf.
struct PreLimitCoefficients {
    CoefficientField B;
    CoefficientField D;
    CoefficientField E;
    double eta = 0.0;
    double N = kInfinity;
    double gamma = 1.0;
    double delta = 0.0;   ///< start-up offset (0 for finite N)

    /// A = sqrt(eta) D + gamma B.
    [[nodiscard]] CoefficientField recover_A() const;
    /// C = (sqrt(eta) E + B - 1) / gamma.
    [[nodiscard]] CoefficientField recover_C() const;
};

/// Explicit B0 for lambda = C rho, with R = int_t^T rho ds.
double closed_form_B0(double C, double gamma, double R);

/// Backward RK4 for the B0 ODE along deterministic (rho, lambda) samples.
LimitCoefficients solve_B0_deterministic(const SampledPath& rho, const SampledPath& lambda,
                                         const ModelParams& params, const SolverOptions& opts = {});

/// Semilinear parabolic PDE for B0(t, chi), TR-BDF2 in time with Newton on the
/// reaction term, central differences in chi with zero-curvature boundaries.
LimitCoefficients solve_B0_pde(const FactorModel& factor, const ModelParams& params, std::vector<double> chi_grid,
                               GridPtr grid, const SolverOptions& opts = {});

/// Backward adaptive integration of the (B, D, E) system along deterministic
/// (rho, lambda) samples.
PreLimitCoefficients solve_prelimit_deterministic(const SampledPath& rho, const SampledPath& lambda,
                                                  const ModelParams& params, const SolverOptions& opts = {});

/// Coupled semilinear PDEs for (B, D, E)(t, chi).
PreLimitCoefficients solve_prelimit_pde(const FactorModel& factor, const ModelParams& params,
                                        std::vector<double> chi_grid, GridPtr grid, const SolverOptions& opts = {});

/// Uniform chi grid covering chi0 +/- max(sds * sigma_max * sqrt(T), 1).
std::vector<double> default_chi_grid(const FactorModel& factor, const ModelParams& params, double step = 0.025,
                                     double sds = 6.0);

struct BoundReport {
    double max_violation = 0.0;
    std::size_t nodes_checked = 0;
    std::size_t violations = 0;   ///< nodes whose violation exceeds the tolerance
    std::string worst;            ///< description of the largest violation

    [[nodiscard]] bool ok() const { return violations == 0; }
};

/// Checks, at every node with t < T,
///   exp(-rho_hi (T-t)) <= B <= 1,
///   0 <= E <= kappa_bar / gamma * tanh(kappa_bar (T-t) / sqrt(eta)),
///   0 <  D <= kappa_bar * coth(kappa_bar (T-t) / sqrt(eta)).
BoundReport check_prelimit_bounds(const PreLimitCoefficients& c, const ModelParams& params, double tol);

/// Checks B0_lower(t) <= B0 <= 1 and the D0 / E0 envelopes.
BoundReport check_limit_bounds(const LimitCoefficients& c, const ModelParams& params, double tol);

}  // namespace smallimpact
