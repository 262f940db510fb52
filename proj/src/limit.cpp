#include "smallimpact/limit.hpp"

#include <cmath>
#include <stdexcept>

#include "smallimpact/errors.hpp"

namespace smallimpact {

LimitState build_limit_state(const LimitCoefficients& limit, const PathBundle& bundle, const ModelParams& params) {
    const auto& g = *bundle.grid();
    const std::size_t n = g.size();
    LimitState s;
    const auto B0 = limit.B0.along(bundle.chi, s.clamped);
    std::vector<double> d0(n), e0(n), rate(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double ph = bundle.phi[i];
        d0[i] = (bundle.lambda[i] + params.gamma * bundle.rho[i] * B0[i]) / ph;
        e0[i] = bundle.rho[i] * (2.0 - B0[i]) / ph;
        rate[i] = bundle.rho[i] * d0[i] / ph;
    }
    const auto integral = cumulative_trapezoid(g, rate);
    std::vector<double> z(n), x_right(n), x_left(n), y_right(n), y_left(n);
    const double z0 = params.gamma * params.x0;
    for (std::size_t i = 0; i < n; ++i) {
        z[i] = z0 * std::exp(-integral[i]);
        x_right[i] = x_left[i] = e0[i] / bundle.phi[i] * z[i];
        y_right[i] = y_left[i] = -d0[i] / bundle.phi[i] * z[i];
    }
    x_left[0] = params.x0;
    y_left[0] = 0.0;
    x_right[n - 1] = 0.0;
    y_right[n - 1] = -z[n - 1];

    s.Zhat0 = SampledPath(bundle.grid(), std::move(z));
    s.initial_block = params.x0 - x_right[0];
    s.terminal_block = x_left[n - 1];
    s.Xhat0 = RcllPath(bundle.grid(), std::move(x_right), std::move(x_left));
    s.Yhat0 = RcllPath(bundle.grid(), std::move(y_right), std::move(y_left));
    s.D0 = SampledPath(bundle.grid(), std::move(d0));
    s.E0 = SampledPath(bundle.grid(), std::move(e0));
    return s;
}

LimitStrategy decompose_limit_strategy(const LimitState& state, const PathBundle& bundle, const ModelParams& params) {
    const auto& g = *bundle.grid();
    const std::size_t n = g.size();
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double ph = bundle.phi[i];
        // rho (2 - B0) / phi^2 = E0 / phi
        v[i] = state.E0[i] / ph * state.Zhat0[i];
    }
    const double v0 = v[0];
    for (auto& x : v) x -= v0;
    v[0] = 0.0;

    LimitStrategy theta;
    theta.x0 = params.x0;
    theta.V = SampledPath(bundle.grid(), std::move(v));
    if (state.initial_block > 0.0) theta.j_minus.push_back({0.0, state.initial_block});
    if (state.terminal_block > 0.0) theta.j_minus.push_back({g.horizon(), state.terminal_block});
    theta.liquidating = true;

    const auto X = inventory(theta);
    const double tol = 1e-12 * std::max(1.0, params.x0);
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(X.right[i] - state.Xhat0.right[i]) > tol || std::abs(X.left[i] - state.Xhat0.left[i]) > tol)
            throw NumericFault("decompose_limit_strategy: reconstruction mismatch", g[i]);
    }
    return theta;
}

}  // namespace smallimpact
