#include "smallimpact/statesim.hpp"

#include <cmath>
#include <sstream>

#include "smallimpact/errors.hpp"

namespace smallimpact {

namespace {

/// phi1(z) = (1 - exp(-z)) / z, accurate for small z.
double phi1(double z) {
    if (z < 1e-8) return 1.0 - 0.5 * z;
    return -std::expm1(-z) / z;
}

void breach(const char* what, double t, double value) {
    std::ostringstream os;
    os << "state invariant violated: " << what << " (value " << value << ") at t=" << t;
    throw NumericFault(os.str(), t);
}

}  // namespace

PreLimitState integrate_state(const PreLimitCoefficients& coeffs, const PathBundle& bundle,
                              const ModelParams& params, const StateOptions& opts) {
    if (!(params.eta > 0.0)) throw std::invalid_argument("integrate_state requires eta > 0");
    const auto& g = *bundle.grid();
    const std::size_t n = g.size();
    const double s = std::sqrt(params.eta);
    const double gm = params.gamma;

    PreLimitState st;
    st.eta = params.eta;
    st.N = params.N;
    const auto D = coeffs.D.along(bundle.chi, st.clamped);
    const auto E = coeffs.E.along(bundle.chi, st.clamped);
    std::vector<double> F(n), c(n);
    for (std::size_t i = 0; i < n; ++i) {
        F[i] = D[i] + gm * E[i];
        c[i] = std::isfinite(F[i]) && F[i] > 0.0 ? E[i] / F[i] : 0.0;
    }

    std::vector<double> X(n), Y(n), Z(n);
    X[0] = params.x0;
    Y[0] = 0.0;
    Z[0] = gm * params.x0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double h = g.step(i);
        const double r0 = bundle.rho[i], r1 = bundle.rho[i + 1];
        if (!std::isfinite(F[i + 1])) {
            // Singular endpoint: strict liquidation closes the position.
            X[i + 1] = 0.0;
            Z[i + 1] = (Z[i] + 0.5 * h * r0 * Y[i]) / (1.0 + 0.5 * h * r1);
            Y[i + 1] = -Z[i + 1];
            continue;
        }
        const double z = 0.5 * (F[i] + F[i + 1]) / s * h;
        const double ez = std::exp(-z);
        const double p1 = phi1(z);
        const double a = ez * X[i] + (p1 - ez) * c[i] * Z[i];
        const double b = (1.0 - p1) * c[i + 1];
        Z[i + 1] = (Z[i] + 0.5 * h * r0 * Y[i] + 0.5 * h * r1 * gm * a) / (1.0 + 0.5 * h * r1 * (1.0 - gm * b));
        X[i + 1] = a + b * Z[i + 1];
        Y[i + 1] = gm * X[i + 1] - Z[i + 1];
    }

    if (opts.check_invariants && params.x0 > 0.0) {
        const double tol = opts.invariant_tol * std::max(1.0, gm * params.x0);
        for (std::size_t i = 0; i < n; ++i) {
            const double t = g[i];
            if (!std::isfinite(X[i]) || !std::isfinite(Z[i])) breach("non-finite state", t, X[i]);
            if (X[i] < -tol || X[i] > params.x0 + tol) breach("Xhat outside [0, x0]", t, X[i]);
            if (Y[i] > tol || Y[i] < -gm * params.x0 - tol) breach("Yhat outside [-gamma x0, 0]", t, Y[i]);
            if (Z[i] < -tol || Z[i] > gm * params.x0 + tol) breach("Zhat outside [0, gamma x0]", t, Z[i]);
            if (X[i] * Y[i] > tol) breach("Xhat Yhat > 0", t, X[i] * Y[i]);
            if (i > 0 && Z[i] > Z[i - 1] + tol) breach("Zhat increasing", t, Z[i] - Z[i - 1]);
        }
    }
    st.Xhat = SampledPath(bundle.grid(), std::move(X));
    st.Yhat = SampledPath(bundle.grid(), std::move(Y));
    st.Zhat = SampledPath(bundle.grid(), std::move(Z));
    return st;
}

double liquidation_gap(const PreLimitState& state) { return state.Xhat.back(); }

}  // namespace smallimpact
