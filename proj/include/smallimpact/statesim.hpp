#pragma once

#include <cstddef>

#include "smallimpact/coeffs.hpp"
#include "smallimpact/pathsim.hpp"

namespace smallimpact {

/// Optimal pre-limit state along one path.
struct PreLimitState {
    SampledPath Xhat;
    SampledPath Yhat;
    SampledPath Zhat;
    double eta = 0.0;
    double N = kInfinity;
    std::size_t clamped = 0;   ///< field evaluations clamped to the chi hull
};

struct StateOptions {
    double invariant_tol = 1e-8;
    bool check_invariants = true;
};

/// Integrates dX = -(F / sqrt(eta)) (X - (E / F) Z) dt, dZ = rho Y dt,
/// Y = gamma X - Z, with F = D + gamma E. Each step solves the X equation
/// exactly for a rate frozen at the step average and a target c Z (c = E / F)
/// interpolated linearly in time; Z is advanced by the trapezoid rule, which
/// is linear in the unknown Z_{n+1} and solved in closed form.
///
/// Invariant checks (tolerance opts.invariant_tol): X in [0, x0], Y in
/// [-gamma x0, 0], Z in [0, gamma x0], Z nonincreasing, X Y <= 0. A breach
/// throws NumericFault carrying the first offending time.
PreLimitState integrate_state(const PreLimitCoefficients& coeffs, const PathBundle& bundle,
                              const ModelParams& params, const StateOptions& opts = {});

/// Xhat_T, the inventory left at the horizon.
double liquidation_gap(const PreLimitState& state);

}  // namespace smallimpact
