#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "smallimpact/grid.hpp"
#include "smallimpact/model.hpp"

namespace smallimpact {

struct Jump {
    double t;
    double size;   ///< positive
};

using JumpList = std::vector<Jump>;

/// Right-continuous path sampled on a grid together with its left limits.
/// left[0] is the value before any trade at t = 0.
struct RcllPath {
    GridPtr grid;
    std::vector<double> right;
    std::vector<double> left;

    RcllPath() = default;
    RcllPath(GridPtr g, std::vector<double> right_values, std::vector<double> left_values);
    /// Continuous path: left limits equal the values.
    explicit RcllPath(const SampledPath& p);

    [[nodiscard]] std::size_t size() const { return right.size(); }
    [[nodiscard]] double t(std::size_t i) const { return (*grid)[i]; }
    [[nodiscard]] bool jumps_at(std::size_t i) const { return left[i] != right[i]; }
    [[nodiscard]] SampledPath values() const { return SampledPath(grid, right); }
};

/// theta = (j+, j-, V): X_t = x0 + j+_t - j-_t + V_t with RCLL cumulative jumps.
struct SemimartingaleStrategy {
    double x0 = 0.0;
    JumpList j_plus;
    JumpList j_minus;
    SampledPath V;            ///< continuous part, V_0 = 0
    bool liquidating = true;
};

/// Trading rate with cell semantics: xi[i] is the rate on [t_i, t_{i+1}); the
/// last entry repeats the previous one. X is then exact at the nodes.
struct RateStrategy {
    SampledPath xi;
};

/// X^theta on the strategy's grid. Throws std::invalid_argument for jump times
/// off the grid, nonpositive jump sizes, V_0 != 0, or a liquidating strategy
/// with |X_T| > 1e-10 max(1, x0).
RcllPath inventory(const SemimartingaleStrategy& theta);

/// X^xi_t = x0 + int_0^t xi.
RcllPath inventory(const RateStrategy& xi, double x0);

/// V^xi_t = int_0^t xi.
SampledPath integrate_rate(const RateStrategy& xi);

/// Y = gamma X - gamma exp(-R) (X_{0-} + int_0^t rho X exp(R)), R = int_0^t rho,
/// evaluated as gamma exp(-R_t) int_{[0,t]} exp(R) dX with X linear between nodes
/// and R trapezoidal. Left limits of Y follow those of X.
RcllPath impact(const RcllPath& X, const SampledPath& rho, double gamma);

/// Reference for impact(): explicit Euler on dY = gamma dX - rho Y dt.
SampledPath impact_euler(const RcllPath& X, const SampledPath& rho, double gamma);

/// Saturating feedback clamp(x, -beta, beta) / nu.
double tracker_feedback(double x, double beta, double nu);

struct TrackerResult {
    RateStrategy rate;        ///< cell averages of dV~/dt
    SampledPath Vtilde;       ///< int_0^t rate
    double sup_error = 0.0;   ///< max_i |V~_i - V_i|
};

/// Solves dV~/dt = f(V - V~), V~_0 = 0, with V linear between nodes. The
/// error e = V - V~ obeys a piecewise-linear autonomous ODE on each cell,
/// which is integrated exactly.
TrackerResult tracker(const SampledPath& V, double beta, double nu);

/// nu for which P(sup |V~ - V| > 3 beta) <= delta holds with confidence 1 - delta,
/// from per-path critical values (bisection in log nu on [nu_min, nu_max]) and
/// the binomial law of their order statistics. Throws std::invalid_argument if
/// the pilot batch is too small (fewer than about 3 / delta paths).
double select_tracker_nu(std::span<const SampledPath> pilot, double beta, double delta, double nu_min = 1e-6,
                         double nu_max = 1.0, int iterations = 40);

/// Absolutely continuous approximation of theta: smeared jumps plus the
/// tracker rate on [0, T - eps], then the constant rate liquidating the
/// accumulated position over (T - eps, T]. Jumps at times > T - eps are left to
/// the terminal branch.
RateStrategy mollify(const SemimartingaleStrategy& theta, double beta, double nu, double eps);

/// int_0^T (j_t - j_{t-eps})^2 dt for a deterministic jump list (j_t = 0 for t < 0), exact.
double jump_smoothing_statistic(const JumpList& jumps, double T, double eps);

/// Riemann sum int_0^T (a - b)^2 dt of right values.
double l2_distance_sq(const RcllPath& a, const RcllPath& b);

}  // namespace smallimpact
