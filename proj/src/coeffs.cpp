#include "smallimpact/coeffs.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "detail/stiff.hpp"
#include "smallimpact/errors.hpp"

namespace smallimpact {

namespace {

using detail::Mat;
using detail::NodeCoeffs;
using detail::Vec;

double b0_driver(double rho, double lambda, double gamma, double b) {
    const double p2 = lambda + 2.0 * gamma * rho;
    return (gamma * rho * rho * b * b - 2.0 * lambda * rho * (1.0 - b)) / p2;
}

void fill_limit_node(double rho, double lambda, double gamma, double b, double& d0, double& e0) {
    const double ph = phi(rho, lambda, gamma);
    d0 = (lambda + gamma * rho * b) / ph;
    e0 = rho * (2.0 - b) / ph;
}

/// Reaction term of the scaled pre-limit system in backward time, with its
/// Jacobian in (B, D, E).
struct PrelimitReaction {
    double sqrt_eta;
    double gamma;

    void operator()(const NodeCoeffs& c, const Vec<3>& u, Vec<3>& f, Mat<3>& J) const {
        const double b = u[0], d = u[1], e = u[2];
        const double r = c.rho, l = c.lambda, g = gamma, s = sqrt_eta;
        f[0] = -r * b + d * e;
        f[1] = (l - d * d + g * r * b - g * d * e) / s;
        f[2] = (-2.0 * s * r * e + 2.0 * r * (1.0 - b) - g * e * e + r * b - d * e) / s;
        J << -r, e, d,
             g * r / s, (-2.0 * d - g * e) / s, -g * d / s,
             -r / s, -e / s, (-2.0 * s * r - 2.0 * g * e - d) / s;
    }
};

struct B0Reaction {
    double gamma;

    void operator()(const NodeCoeffs& c, const Vec<1>& u, Vec<1>& f, Mat<1>& J) const {
        const double p2 = c.lambda + 2.0 * gamma * c.rho;
        f[0] = -b0_driver(c.rho, c.lambda, gamma, u[0]);
        J(0, 0) = -(2.0 * gamma * c.rho * c.rho * u[0] + 2.0 * c.lambda * c.rho) / p2;
    }
};

void require_prelimit(const ModelParams& params) {
    if (!(params.eta > 0.0)) throw std::invalid_argument("pre-limit solver requires eta > 0");
}

double startup_delta(const ModelParams& params, const SolverOptions& opts) {
    return params.strict_liquidation() ? opts.delta0 * std::sqrt(params.eta) : 0.0;
}

void enforce(const BoundReport& r, const char* who) {
    if (r.ok()) return;
    std::ostringstream os;
    os << who << ": a priori bounds violated at " << r.violations << " nodes (" << r.worst << ")";
    throw NumericFault(os.str());
}

}  // namespace

CoefficientField PreLimitCoefficients::recover_A() const {
    const double s = std::sqrt(eta);
    std::vector<double> v(B.values().size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = s * D.values()[k] + gamma * B.values()[k];
    if (!B.spatial()) return CoefficientField(B.grid(), std::move(v));
    return CoefficientField(B.grid(), {B.chi_grid().begin(), B.chi_grid().end()}, std::move(v));
}

CoefficientField PreLimitCoefficients::recover_C() const {
    const double s = std::sqrt(eta);
    std::vector<double> v(B.values().size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = (s * E.values()[k] + B.values()[k] - 1.0) / gamma;
    if (!B.spatial()) return CoefficientField(B.grid(), std::move(v));
    return CoefficientField(B.grid(), {B.chi_grid().begin(), B.chi_grid().end()}, std::move(v));
}

double closed_form_B0(double C, double gamma, double R) {
    if (C == 0.0) return 2.0 / (2.0 + R);
    const double s = std::sqrt(C * (C + 2.0 * gamma));
    const double x = (C + gamma) / s;
    const double arcoth = 0.5 * std::log((x + 1.0) / (x - 1.0));
    const double z = arcoth + std::sqrt(C / (C + 2.0 * gamma)) * R;
    return -C / gamma + s / gamma / std::tanh(z);
}

LimitCoefficients solve_B0_deterministic(const SampledPath& rho, const SampledPath& lambda,
                                         const ModelParams& params, const SolverOptions& opts) {
    if (!same_grid(rho.grid, lambda.grid)) throw std::invalid_argument("solve_B0_deterministic: grid mismatch");
    const auto& g = *rho.grid;
    const std::size_t n = g.size();
    const double gm = params.gamma;
    auto G = [&](double t, double b) { return b0_driver(rho.at(t), lambda.at(t), gm, b); };

    std::vector<double> B(n), D(n), E(n);
    B[n - 1] = 1.0;
    for (std::size_t i = n - 1; i-- > 0;) {
        const double h = g.step(i);
        const double t1 = g[i + 1], tm = t1 - 0.5 * h, t0 = g[i];
        const double b = B[i + 1];
        const double k1 = b0_driver(rho[i + 1], lambda[i + 1], gm, b);
        const double k2 = G(tm, b - 0.5 * h * k1);
        const double k3 = G(tm, b - 0.5 * h * k2);
        const double k4 = b0_driver(rho[i], lambda[i], gm, b - h * k3);
        B[i] = b - h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
        if (!std::isfinite(B[i])) throw NumericFault("solve_B0_deterministic: non-finite value", t0);
    }
    for (std::size_t i = 0; i < n; ++i) fill_limit_node(rho[i], lambda[i], gm, B[i], D[i], E[i]);

    LimitCoefficients out{CoefficientField(rho.grid, std::move(B)), CoefficientField(rho.grid, std::move(D)),
                          CoefficientField(rho.grid, std::move(E))};
    if (opts.enforce_bounds) enforce(check_limit_bounds(out, params, opts.bound_tol_ode), "solve_B0_deterministic");
    return out;
}

LimitCoefficients solve_B0_pde(const FactorModel& factor, const ModelParams& params, std::vector<double> chi_grid,
                               GridPtr grid, const SolverOptions& opts) {
    const auto& g = *grid;
    const std::size_t n = g.size(), m = chi_grid.size();
    if (m < 3) throw std::invalid_argument("solve_B0_pde: spatial grid needs at least 3 nodes");
    const double T = g.horizon();
    detail::SemilinearStepper<1, B0Reaction> stepper(factor, chi_grid, T, B0Reaction{params.gamma}, opts.newton_tol,
                                                     opts.max_newton);
    std::vector<Vec<1>> u(m, Vec<1>::Constant(1.0));
    std::vector<double> B(n * m), D(n * m), E(n * m);
    auto store = [&](std::size_t i) {
        for (std::size_t j = 0; j < m; ++j) {
            const double rho = factor.f_rho(g[i], chi_grid[j]);
            const double lam = factor.f_lambda(g[i], chi_grid[j]);
            B[i * m + j] = u[j][0];
            fill_limit_node(rho, lam, params.gamma, u[j][0], D[i * m + j], E[i * m + j]);
        }
    };
    store(n - 1);
    for (std::size_t i = n - 1; i-- > 0;) {
        stepper.step(T - g[i + 1], g.step(i), u);
        store(i);
    }
    LimitCoefficients out{CoefficientField(grid, chi_grid, std::move(B)), CoefficientField(grid, chi_grid, std::move(D)),
                          CoefficientField(grid, chi_grid, std::move(E))};
    if (opts.enforce_bounds) enforce(check_limit_bounds(out, params, opts.bound_tol_pde), "solve_B0_pde");
    return out;
}

PreLimitCoefficients solve_prelimit_deterministic(const SampledPath& rho, const SampledPath& lambda,
                                                  const ModelParams& params, const SolverOptions& opts) {
    require_prelimit(params);
    if (!same_grid(rho.grid, lambda.grid))
        throw std::invalid_argument("solve_prelimit_deterministic: grid mismatch");
    const auto& g = *rho.grid;
    const std::size_t n = g.size();
    const double T = g.horizon();
    const double s = std::sqrt(params.eta);
    const double delta = startup_delta(params, opts);
    const PrelimitReaction reaction{s, params.gamma};
    auto rhs = [&](double tau, const Vec<3>& u, Vec<3>& f, Mat<3>& J) {
        const double t = T - tau;
        reaction(NodeCoeffs{rho.at(t), lambda.at(t)}, u, f, J);
    };

    std::vector<double> B(n), D(n), E(n);
    Vec<3> u;
    double tau = 0.0;
    std::size_t i = n - 1;
    if (params.strict_liquidation()) {
        B[i] = 1.0;
        D[i] = kInfinity;
        E[i] = 0.0;
        while (i > 0 && T - g[i - 1] < delta) {
            --i;
            B[i] = 1.0;
            D[i] = s / (T - g[i]);
            E[i] = 0.0;
        }
        u << 1.0, s / delta, 0.0;
        tau = delta;
    } else {
        u << 1.0, (params.N - params.gamma) / s, 0.0;
        B[i] = u[0];
        D[i] = u[1];
        E[i] = u[2];
    }
    double h = 1e-3 * s;
    while (i > 0) {
        --i;
        const double target = T - g[i];
        detail::integrate_adaptive<3>(rhs, tau, target, u, h, opts.ode_tol, opts.newton_tol, opts.max_newton);
        tau = target;
        B[i] = u[0];
        D[i] = u[1];
        E[i] = u[2];
    }

    PreLimitCoefficients out{CoefficientField(rho.grid, std::move(B)),
                             CoefficientField(rho.grid, std::move(D)),
                             CoefficientField(rho.grid, std::move(E)),
                             params.eta,
                             params.N,
                             params.gamma,
                             delta};
    if (opts.enforce_bounds)
        enforce(check_prelimit_bounds(out, params, opts.bound_tol_pde), "solve_prelimit_deterministic");
    return out;
}

PreLimitCoefficients solve_prelimit_pde(const FactorModel& factor, const ModelParams& params,
                                        std::vector<double> chi_grid, GridPtr grid, const SolverOptions& opts) {
    require_prelimit(params);
    const auto& g = *grid;
    const std::size_t n = g.size(), m = chi_grid.size();
    if (m < 3) throw std::invalid_argument("solve_prelimit_pde: spatial grid needs at least 3 nodes");
    const double T = g.horizon();
    const double s = std::sqrt(params.eta);
    const double kappa = derive_bounds(params).kappa_bar;
    const double delta = startup_delta(params, opts);
    detail::SemilinearStepper<3, PrelimitReaction> stepper(factor, chi_grid, T, PrelimitReaction{s, params.gamma},
                                                           opts.newton_tol, opts.max_newton);

    std::vector<double> B(n * m), D(n * m), E(n * m);
    auto put = [&](std::size_t i, double b, double d, double e) {
        for (std::size_t j = 0; j < m; ++j) {
            B[i * m + j] = b;
            D[i * m + j] = d;
            E[i * m + j] = e;
        }
    };
    std::vector<Vec<3>> u(m);
    double tau = 0.0;
    std::size_t i = n - 1;
    if (params.strict_liquidation()) {
        put(i, 1.0, kInfinity, 0.0);
        while (i > 0 && T - g[i - 1] < delta) {
            --i;
            put(i, 1.0, s / (T - g[i]), 0.0);
        }
        for (auto& v : u) v << 1.0, s / delta, 0.0;
        tau = delta;
    } else {
        const double d = (params.N - params.gamma) / s;
        put(i, 1.0, d, 0.0);
        for (auto& v : u) v << 1.0, d, 0.0;
    }
    const double layer = opts.layer_step * s / kappa;
    const double zone = opts.layer_zone * s / kappa;
    while (i > 0) {
        --i;
        const double target = T - g[i];
        while (tau < target) {
            double max_d = 0.0;
            for (const auto& v : u) max_d = std::max(max_d, std::abs(v[1]));
            double h = layer;
            if (tau < zone && max_d > 0.0) h = std::min(h, opts.rel_step * s / max_d);
            if (tau + h >= target * (1.0 - 1e-14)) h = target - tau;
            stepper.step(tau, h, u);
            tau = tau + h >= target * (1.0 - 1e-14) ? target : tau + h;
        }
        for (std::size_t j = 0; j < m; ++j) {
            B[i * m + j] = u[j][0];
            D[i * m + j] = u[j][1];
            E[i * m + j] = u[j][2];
        }
    }

    PreLimitCoefficients out{CoefficientField(grid, chi_grid, std::move(B)),
                             CoefficientField(grid, chi_grid, std::move(D)),
                             CoefficientField(grid, chi_grid, std::move(E)),
                             params.eta,
                             params.N,
                             params.gamma,
                             delta};
    if (opts.enforce_bounds) enforce(check_prelimit_bounds(out, params, opts.bound_tol_pde), "solve_prelimit_pde");
    return out;
}

std::vector<double> default_chi_grid(const FactorModel& factor, const ModelParams& params, double step, double sds) {
    const double half = std::max(sds * factor.sigma_max * std::sqrt(params.T) + factor.mu_max * params.T, 1.0);
    const auto cells = static_cast<std::size_t>(std::ceil(2.0 * half / step));
    std::vector<double> chi(cells + 1);
    for (std::size_t j = 0; j <= cells; ++j) chi[j] = factor.chi0 - half + 2.0 * half * static_cast<double>(j) / cells;
    return chi;
}

namespace {

class BoundChecker {
public:
    explicit BoundChecker(double tol) : tol_(tol) {}

    void check(const char* name, double value, double lo, double hi, double t, double chi) {
        ++report_.nodes_checked;
        double v = 0.0;
        if (!std::isfinite(value)) {
            v = kInfinity;
        } else {
            v = std::max({lo - value, value - hi, 0.0}) / std::max({1.0, std::abs(lo), std::isfinite(hi) ? std::abs(hi) : 1.0});
        }
        if (v > tol_) ++report_.violations;
        if (v > report_.max_violation || (v == kInfinity && report_.worst.empty())) {
            report_.max_violation = v;
            std::ostringstream os;
            os << name << "=" << value << " outside [" << lo << ", " << hi << "] at t=" << t << ", chi=" << chi;
            report_.worst = os.str();
        }
    }

    [[nodiscard]] BoundReport report() const { return report_; }

private:
    double tol_;
    BoundReport report_;
};

}  // namespace

BoundReport check_prelimit_bounds(const PreLimitCoefficients& c, const ModelParams& params, double tol) {
    const auto& g = *c.B.grid();
    const double T = g.horizon();
    const double s = std::sqrt(c.eta);
    const double kappa = derive_bounds(params).kappa_bar;
    const auto chi = c.B.chi_grid();
    BoundChecker checker(tol);
    for (std::size_t i = 0; i + 1 < g.size(); ++i) {
        const double tau = T - g[i];
        const double z = kappa * tau / s;
        const double e_hi = kappa / params.gamma * std::tanh(z);
        const double d_hi = kappa / std::tanh(z);
        for (std::size_t j = 0; j < c.B.width(); ++j) {
            const double x = chi.empty() ? 0.0 : chi[j];
            checker.check("B", c.B.node(i, j), std::exp(-params.rho_hi * tau), 1.0, g[i], x);
            checker.check("E", c.E.node(i, j), 0.0, e_hi, g[i], x);
            checker.check("D", c.D.node(i, j), 0.0, d_hi, g[i], x);
        }
    }
    return checker.report();
}

BoundReport check_limit_bounds(const LimitCoefficients& c, const ModelParams& params, double tol) {
    const auto& g = *c.B0.grid();
    const auto b = derive_bounds(params);
    const auto chi = c.B0.chi_grid();
    BoundChecker checker(tol);
    for (std::size_t i = 0; i < g.size(); ++i) {
        for (std::size_t j = 0; j < c.B0.width(); ++j) {
            const double x = chi.empty() ? 0.0 : chi[j];
            checker.check("B0", c.B0.node(i, j), b.B0_lower(g[i]), 1.0, g[i], x);
            checker.check("D0", c.D0.node(i, j), b.D0_lower(), b.D0_upper(), g[i], x);
            checker.check("E0", c.E0.node(i, j), b.E0_lower(), b.E0_upper(), g[i], x);
        }
    }
    return checker.report();
}

}  // namespace smallimpact
