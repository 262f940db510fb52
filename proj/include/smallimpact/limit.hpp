#pragma once

#include <cstddef>

#include "smallimpact/coeffs.hpp"
#include "smallimpact/pathsim.hpp"
#include "smallimpact/strategies.hpp"

namespace smallimpact {

/// Explicit small-impact limit of the optimal state along one path.
///
/// Xhat0 jumps at 0 (left value x0) and at T (right value 0); Yhat0 jumps at
/// 0 (left value 0) and at T (right value -Zhat0_T). Zhat0 is continuous.
struct LimitState {
    SampledPath Zhat0;
    RcllPath Xhat0;
    RcllPath Yhat0;
    SampledPath D0;           ///< along the path
    SampledPath E0;           ///< along the path
    double initial_block = 0.0;   ///< x0 - Xhat0_0
    double terminal_block = 0.0;  ///< Xhat0_{T-}
    std::size_t clamped = 0;      ///< field evaluations clamped to the chi hull
};

/// theta-hat = (0, j-hat, V-hat).
using LimitStrategy = SemimartingaleStrategy;

/// Zhat0_t = gamma x0 exp(-int_0^t rho D0 / phi) by the trapezoid rule,
/// Xhat0 = (E0 / phi) Zhat0 and Yhat0 = -(D0 / phi) Zhat0 on [0, T).
/// D0 and E0 are rebuilt from B0 and the path's own (rho, lambda, phi).
LimitState build_limit_state(const LimitCoefficients& limit, const PathBundle& bundle, const ModelParams& params);

/// j-hat = {(0, x0 - Xhat0_0), (T, Xhat0_{T-})} and
/// V-hat = rho (2 - B0) Zhat0 / phi^2 minus its value at 0. Throws NumericFault
/// if x0 - j-hat + V-hat differs from Xhat0 by more than 1e-12 max(1, x0).
LimitStrategy decompose_limit_strategy(const LimitState& state, const PathBundle& bundle, const ModelParams& params);

}  // namespace smallimpact
