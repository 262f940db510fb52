#include "smallimpact/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "smallimpact/errors.hpp"

namespace smallimpact {

double DerivedBounds::B0_lower(double t) const {
    return std::exp(-gamma * rho_hi * rho_hi * (T - t) / (phi_lo * phi_lo));
}

double DerivedBounds::D0_lower() const {
    return gamma * rho_lo / phi_hi * std::exp(-gamma * rho_hi * rho_hi * T / (phi_lo * phi_lo));
}

double DerivedBounds::D0_upper() const { return (lambda_hi + gamma * rho_hi) / phi_lo; }
double DerivedBounds::E0_lower() const { return rho_lo / phi_hi; }
double DerivedBounds::E0_upper() const { return 2.0 * rho_hi / phi_lo; }

DerivedBounds derive_bounds(const ModelParams& p) {
    DerivedBounds b;
    b.gamma = p.gamma;
    b.rho_lo = p.rho_lo;
    b.rho_hi = p.rho_hi;
    b.lambda_hi = p.lambda_hi;
    b.T = p.T;
    b.kappa_bar = std::sqrt(2.0 * std::max(p.lambda_hi, p.gamma * p.rho_hi));
    b.phi_lo = std::sqrt(2.0 * p.gamma * p.rho_lo);
    b.phi_hi = std::sqrt(p.lambda_hi + 2.0 * p.gamma * p.rho_hi);
    return b;
}

double phi(double rho, double lambda, double gamma) {
    if (!(rho > 0.0)) throw std::domain_error("phi: rho must be positive");
    if (!(lambda >= 0.0)) throw std::domain_error("phi: lambda must be nonnegative");
    if (!(gamma > 0.0)) throw std::domain_error("phi: gamma must be positive");
    return std::sqrt(lambda + 2.0 * gamma * rho);
}

double min_penalization(const ModelParams& p) {
    return p.gamma + 1.0 + std::sqrt(2.0 * p.eta * std::max(p.lambda_hi, p.gamma * p.rho_hi));
}

ValidationReport validate(const ModelParams& params, const FactorModel& factor) {
    ValidationReport r;
    auto fail = [&r](std::string msg) { r.violations.push_back(std::move(msg)); };

    if (!(params.gamma > 0.0)) fail("gamma must be positive");
    if (!(params.T > 0.0)) fail("T must be positive");
    if (!(params.x0 > 0.0)) fail("x0 must be positive");
    if (!(params.eta >= 0.0)) fail("eta must be nonnegative");
    if (!(params.rho_lo > 0.0)) fail("rho lower bound must be positive");
    if (!(params.rho_lo <= params.rho_hi)) fail("rho bounds must satisfy rho_lo <= rho_hi");
    if (!(params.lambda_hi >= 0.0) || !std::isfinite(params.lambda_hi)) fail("lambda upper bound must be finite and nonnegative");
    if (!r.ok()) return r;

    if (params.eta > 0.0 && !params.strict_liquidation()) {
        const double n_min = min_penalization(params);
        if (!(params.N >= n_min)) {
            std::ostringstream os;
            os << "penalization N = " << params.N << " is below the minimum N_min = " << n_min;
            fail(os.str());
        }
    }

    if (!factor.mu || !factor.sigma || !factor.f_rho || !factor.f_lambda) {
        fail("factor model is missing a coefficient function");
        return r;
    }

    constexpr int kTimeSamples = 33;
    constexpr int kChiSamples = 121;
    const double half_width = std::max(6.0 * factor.sigma_max * std::sqrt(params.T) + factor.mu_max * params.T, 1.0);
    const double tol = 1e-12;
    bool rho_bad = false, lambda_bad = false, coeff_bad = false;
    for (int a = 0; a < kTimeSamples; ++a) {
        const double t = params.T * a / (kTimeSamples - 1);
        for (int b = 0; b < kChiSamples; ++b) {
            const double chi = factor.chi0 - half_width + 2.0 * half_width * b / (kChiSamples - 1);
            const double rho = factor.f_rho(t, chi);
            const double lam = factor.f_lambda(t, chi);
            if (!(rho >= params.rho_lo - tol && rho <= params.rho_hi + tol)) rho_bad = true;
            if (!(lam >= -tol && lam <= params.lambda_hi + tol)) lambda_bad = true;
            const double mu = factor.mu(t, chi);
            const double sg = factor.sigma(t, chi);
            if (!std::isfinite(mu) || !std::isfinite(sg) || std::abs(sg) > factor.sigma_max + tol ||
                std::abs(mu) > factor.mu_max + tol)
                coeff_bad = true;
        }
    }
    if (rho_bad) fail("f_rho leaves [rho_lo, rho_hi] on the sampled grid");
    if (lambda_bad) fail("f_lambda leaves [0, lambda_hi] on the sampled grid");
    if (coeff_bad) fail("mu or sigma exceed their declared bounds on the sampled grid");
    return r;
}

namespace {

double number(const nlohmann::json& spec, const char* key, double fallback) {
    if (!spec.contains(key)) return fallback;
    const auto& v = spec.at(key);
    if (!v.is_number()) throw ConfigError(std::string("factor parameter '") + key + "' must be a number");
    return v.get<double>();
}

}  // namespace

FactorModel make_factor(const std::string& family, const nlohmann::json& spec) {
    FactorModel f;
    f.family = family;
    if (family == "constant") {
        const double rho = number(spec, "rho", 1.0);
        const double lam = number(spec, "lambda", 0.0);
        if (!(rho > 0.0) || !(lam >= 0.0)) throw ConfigError("constant family needs rho > 0 and lambda >= 0");
        f.mu = [](double, double) { return 0.0; };
        f.sigma = [](double, double) { return 0.0; };
        f.f_rho = [rho](double, double) { return rho; };
        f.f_lambda = [lam](double, double) { return lam; };
    } else if (family == "lambda-equals-C-rho") {
        const double rho = number(spec, "rho", 1.0);
        const double C = number(spec, "C", 1.0);
        const double amp = number(spec, "rho_amp", 0.0);
        const double freq = number(spec, "rho_freq", 1.0);
        if (!(rho > 0.0) || !(C >= 0.0) || !(std::abs(amp) < 1.0))
            throw ConfigError("lambda-equals-C-rho needs rho > 0, C >= 0, |rho_amp| < 1");
        f.mu = [](double, double) { return 0.0; };
        f.sigma = [](double, double) { return 0.0; };
        f.f_rho = [rho, amp, freq](double t, double) { return rho * (1.0 + amp * std::sin(freq * t)); };
        f.f_lambda = [rho, amp, freq, C](double t, double) { return C * rho * (1.0 + amp * std::sin(freq * t)); };
    } else if (family == "fig1-sine") {
        const double lam = number(spec, "lambda", 1.0);
        const double amp = number(spec, "amp", 0.9);
        const double freq = number(spec, "freq", 2.5);
        if (!(std::abs(amp) < 1.0) || !(lam >= 0.0)) throw ConfigError("fig1-sine needs |amp| < 1 and lambda >= 0");
        f.mu = [](double, double) { return 0.0; };
        f.sigma = [](double, double) { return 1.0; };
        f.f_rho = [amp, freq](double, double chi) { return 1.0 + amp * std::sin(freq * chi); };
        f.f_lambda = [lam](double, double) { return lam; };
        f.diffusive = true;
        f.sigma_max = 1.0;
    } else {
        throw ConfigError("unknown factor family '" + family + "'");
    }
    f.chi0 = number(spec, "chi0", 0.0);
    return f;
}

void apply_family_bounds(const std::string& family, const nlohmann::json& spec, ModelParams& params) {
    if (family == "constant") {
        const double rho = number(spec, "rho", 1.0);
        params.rho_lo = params.rho_hi = rho;
        params.lambda_hi = number(spec, "lambda", 0.0);
    } else if (family == "lambda-equals-C-rho") {
        const double rho = number(spec, "rho", 1.0);
        const double amp = std::abs(number(spec, "rho_amp", 0.0));
        params.rho_lo = rho * (1.0 - amp);
        params.rho_hi = rho * (1.0 + amp);
        params.lambda_hi = number(spec, "C", 1.0) * params.rho_hi;
    } else if (family == "fig1-sine") {
        const double amp = std::abs(number(spec, "amp", 0.9));
        params.rho_lo = 1.0 - amp;
        params.rho_hi = 1.0 + amp;
        params.lambda_hi = number(spec, "lambda", 1.0);
    } else {
        throw ConfigError("unknown factor family '" + family + "'");
    }
}

}  // namespace smallimpact
