#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "smallimpact/limit.hpp"
#include "smallimpact/pathsim.hpp"
#include "smallimpact/stats.hpp"
#include "smallimpact/strategies.hpp"

namespace smallimpact {

/// Cost components. For a single path these are pathwise values; for a batch
/// they are Monte Carlo means and std_error refers to the total.
struct CostBreakdown {
    double instantaneous = 0.0;   ///< eta/2 int xi^2
    double transient = 0.0;       ///< int Y dX (J^eta) or int_(0,T] (Y- + Y)/2 dX (J^0)
    double risk = 0.0;            ///< 1/2 int lambda X^2
    double penalty = 0.0;         ///< N/2 X_T^2 - X_T Y_T, finite N only
    double block0 = 0.0;          ///< gamma/2 (j+_0 - j-_0)^2, J^0 only
    double qv = 0.0;              ///< gamma/2 [V]_T, J^0 only
    double total = 0.0;
    double std_error = 0.0;
    std::size_t paths = 0;
};

/// Per-path evaluation of J^{eta,N}. X is the exact cumulative sum of the cell
/// rates, Y = impact(X); int Y dX and int lambda X^2 use the trapezoid rule.
/// For N = inf the penalty term is dropped and X_T must vanish to
/// 1e-10 max(1, x0) (std::invalid_argument otherwise).
CostBreakdown path_cost_eta(const RateStrategy& xi, const PathBundle& bundle, const ModelParams& params);

/// Per-path evaluation of J^0 through the identity
/// int_(0,T] (Y- + Y)/2 dX = Y_T^2/(2 gamma) - block0 - qv + gamma^-1 int rho Y^2,
/// with [V]_T the realized quadratic variation on the grid.
CostBreakdown path_cost_semimartingale(const SemimartingaleStrategy& theta, const PathBundle& bundle,
                                       const ModelParams& params);

/// int_[0,T] (Y- + Y)/2 dX evaluated directly: block trades at the nodes with
/// the midpoint rule, the continuous part with left-point Riemann-Stieltjes sums.
double transient_stieltjes(const RcllPath& X, const RcllPath& Y);

/// Sum of (V_{i+1} - V_i)^2.
double realized_variation(const SampledPath& V);

/// Monte Carlo means (pairwise sums in path order) of per-path breakdowns.
CostBreakdown aggregate(std::span<const CostBreakdown> per_path);

/// Strategy chosen per path (adapted strategies depend on the bundle).
using RatePolicy = std::function<RateStrategy(const PathBundle&)>;
using SemimartingalePolicy = std::function<SemimartingaleStrategy(const PathBundle&)>;

/// Batch evaluation over bundles; per-path work runs on `threads` workers.
std::vector<CostBreakdown> cost_eta_paths(const RatePolicy& xi, std::span<const PathBundle> bundles,
                                          const ModelParams& params, unsigned threads = 0);
std::vector<CostBreakdown> cost_semimartingale_paths(const SemimartingalePolicy& theta,
                                                     std::span<const PathBundle> bundles, const ModelParams& params,
                                                     unsigned threads = 0);

CostBreakdown cost_eta(const RatePolicy& xi, std::span<const PathBundle> bundles, const ModelParams& params,
                       unsigned threads = 0);
CostBreakdown cost_semimartingale(const SemimartingalePolicy& theta, std::span<const PathBundle> bundles,
                                  const ModelParams& params, unsigned threads = 0);

/// Paired estimate of E(total_a - total_b).
Estimate paired_cost_difference(std::span<const CostBreakdown> a, std::span<const CostBreakdown> b);

/// theta-hat^q: V-hat + q t, with the terminal block absorbing q T so that the
/// strategy still liquidates.
SemimartingaleStrategy drift_perturbation(const SemimartingaleStrategy& theta, double q);

/// Moves the initial block by `shift` (a positive shift sells more at 0) and
/// settles the difference at T.
SemimartingaleStrategy block_shift(const SemimartingaleStrategy& theta, double shift);

/// Replaces a fraction of the jump at t = from by a jump of the same sign at the
/// grid node nearest to `to`.
SemimartingaleStrategy jump_split(const SemimartingaleStrategy& theta, double from, double to, double fraction);

/// (1 - w) theta + w (linear liquidation V = -x0 t / T).
SemimartingaleStrategy blend_with_linear(const SemimartingaleStrategy& theta, double w);

/// V + c t (T - t); the end points are unchanged.
SemimartingaleStrategy curvature_perturbation(const SemimartingaleStrategy& theta, double c);

struct NamedPerturbation {
    std::string name;
    std::function<SemimartingaleStrategy(const SemimartingaleStrategy&)> apply;
};

/// Twenty perturbations of a liquidating strategy: four drift tilts
/// (q = +-0.1, +-0.5 in units of x0 / T), six block shifts, five jump splits, three blends with linear liquidation and two
/// curvature terms. Sizes scale with x0.
std::vector<NamedPerturbation> perturbation_battery(double x0, double T);

struct FirstOrderResult {
    double derivative = 0.0;   ///< central difference of q -> J^0(theta-hat^q) at 0
    double std_error = 0.0;
    double cost = 0.0;         ///< J^0(theta-hat)
    double cost_plus = 0.0;    ///< J^0(theta-hat^h)
    double cost_minus = 0.0;   ///< J^0(theta-hat^-h)
};

/// Central difference with step h on common random numbers. J^0(theta^q) is
/// quadratic in q, so the difference quotient is exact up to rounding.
FirstOrderResult first_order_check(const SemimartingalePolicy& theta_hat, std::span<const PathBundle> bundles,
                                   const ModelParams& params, double h = 1e-2, unsigned threads = 0);

/// Right-hand side of the cost estimate |J^0(theta) - J^0(0, 0, V^xi)| <= ...
/// with the explicit constant from the impact bounds: d = E int (X^theta - X^xi)^2,
/// M = E int (X^theta)^2, rho_hi and lambda_hi from params.
double cost_estimate_bound(double d, double M, const ModelParams& params);

}  // namespace smallimpact
