#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "smallimpact/coeffs.hpp"
#include "smallimpact/model.hpp"
#include "smallimpact/strategies.hpp"

namespace smallimpact {

struct GraphPoint {
    double t;
    double x;

    bool operator==(const GraphPoint&) const = default;
};

/// Polyline through the graph of an RCLL path with each jump filled in by a
/// vertical segment. t-coordinates are nondecreasing.
struct CompletedGraph {
    std::vector<GraphPoint> polyline;
};

/// Vertices (t_i, left_i), (t_i, right_i) where the path jumps, (t_i, right_i)
/// elsewhere.
CompletedGraph completed_graph(const RcllPath& path);

/// Continuous path: the polyline is the path itself.
CompletedGraph completed_graph(const SampledPath& path);

/// Exact l-infinity distance from p to the segment [a, b].
double linf_point_segment(GraphPoint p, GraphPoint a, GraphPoint b);

/// Hausdorff distance with the l-infinity point norm. Both polylines are
/// resampled so that consecutive samples are at most r apart; distances from
/// samples to the other polyline are exact, so the result is within r of the
/// true distance. Throws std::invalid_argument for an empty graph or r <= 0.
double hausdorff(const CompletedGraph& a, const CompletedGraph& b, double r);

/// Default resolution dt_max / 4 * min(1, x0).
double default_resolution(const TimeGrid& grid, double x0);

/// sup |y_t - y_s| over grid pairs with |t - s| <= nu (monotone deques).
double modulus_of_continuity(const SampledPath& path, double nu);

struct StudyOptions {
    std::size_t steps = 4096;          ///< uniform steps of the refined time grid
    double chi_sds = 6.0;              ///< half width of the factor grid in standard deviations
    double chi_step = 0.05;
    bool penalize_min = false;         ///< use N = min_penalization(eta) instead of params.N
    std::vector<double> eps_values{0.05};
    double resolution = 0.0;           ///< Hausdorff r; 0 selects default_resolution
    unsigned threads = 0;
    SolverOptions solver;
};

/// Results of an eta sweep on common random numbers. Per-path matrices are
/// indexed [eta][path].
struct ConvergenceReport {
    std::vector<double> eta_values;
    std::vector<double> N_values;
    std::vector<std::uint64_t> seeds;
    double eps = 0.05;                 ///< window trimmed off the ends

    /// max over paths of sup_[0, T - eps] of b, d, e, f = F - phi, g = G - 2 rho.
    std::vector<double> sup_b, sup_d, sup_e, sup_f, sup_g;
    /// sup_[eps, T - eps] |X^eta - X^0| per path and its mean / max over paths.
    std::vector<std::vector<double>> state_distance;
    std::vector<double> state_mean, state_max;
    std::vector<std::vector<double>> hausdorff;
    std::vector<double> hausdorff_mean, hausdorff_max;
    /// [eta][k]: share of paths with d_inf <= eps_values[k].
    std::vector<double> eps_values;
    std::vector<std::vector<double>> fraction_within;
    /// Share of paths with X^eta - X^0 <= eps on [eps, T] and >= -eps on [0, T - eps].
    std::vector<double> band_fraction;
    std::vector<double> gap_mean;      ///< mean X^eta_T
    std::size_t clamped = 0;
};

/// Runs coefficients, limit and pre-limit states and all distances for every
/// (eta, seed). Non-diffusive factors use the deterministic ODE solvers.
/// Throws std::invalid_argument unless etas are positive and decreasing and
/// seeds are distinct; solver faults propagate.
ConvergenceReport convergence_study(const ModelParams& params, const FactorModel& factor,
                                    std::span<const double> etas, std::span<const std::uint64_t> seeds, double eps,
                                    const StudyOptions& opts = {});

/// Number of strict increases along v.
std::size_t count_inversions(std::span<const double> v);

}  // namespace smallimpact
