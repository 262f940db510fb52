#include "smallimpact/pathsim.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include "smallimpact/errors.hpp"

namespace smallimpact {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t splitmix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(splitmix64(splitmix64(seed + kGolden) ^ (stream * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL))) {}

std::uint64_t CounterRng::next_u64() {
    ++counter_;
    return splitmix64(key_ + counter_ * kGolden);
}

double CounterRng::uniform() {
    // (k + 0.5) / 2^53 keeps the value strictly inside (0, 1).
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

SampledPath simulate_brownian(GridPtr grid, std::uint64_t seed) {
    CounterRng rng(seed, 0);
    const auto& g = *grid;
    std::vector<double> w(g.size(), 0.0);
    for (std::size_t i = 0; i + 1 < g.size(); ++i) w[i + 1] = w[i] + std::sqrt(g.step(i)) * rng.normal();
    return SampledPath(std::move(grid), std::move(w));
}

PathBundle simulate_factor(const FactorModel& factor, const ModelParams& params, const SampledPath& W,
                           std::uint64_t seed) {
    const auto& g = *W.grid;
    const std::size_t n = g.size();
    std::vector<double> chi(n), rho(n), lam(n), ph(n);
    chi[0] = factor.chi0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double t = g[i];
        chi[i + 1] = chi[i] + factor.mu(t, chi[i]) * g.step(i) + factor.sigma(t, chi[i]) * (W[i + 1] - W[i]);
    }
    constexpr double tol = 1e-12;
    for (std::size_t i = 0; i < n; ++i) {
        rho[i] = factor.f_rho(g[i], chi[i]);
        lam[i] = factor.f_lambda(g[i], chi[i]);
        if (!(rho[i] >= params.rho_lo - tol && rho[i] <= params.rho_hi + tol) ||
            !(lam[i] >= -tol && lam[i] <= params.lambda_hi + tol)) {
            std::ostringstream os;
            os << "factor coefficients out of declared bounds at t=" << g[i] << " (rho=" << rho[i]
               << ", lambda=" << lam[i] << ")";
            throw NumericFault(os.str(), g[i]);
        }
        ph[i] = phi(rho[i], lam[i], params.gamma);
    }
    PathBundle b;
    b.seed = seed;
    b.W = W;
    b.chi = SampledPath(W.grid, std::move(chi));
    b.rho = SampledPath(W.grid, std::move(rho));
    b.lambda = SampledPath(W.grid, std::move(lam));
    b.phi = SampledPath(W.grid, std::move(ph));
    return b;
}

PathBundle simulate_bundle(const FactorModel& factor, const ModelParams& params, GridPtr grid, std::uint64_t seed) {
    return simulate_factor(factor, params, simulate_brownian(std::move(grid), seed), seed);
}

void write_bundle_csv(std::ostream& os, const PathBundle& b) {
    os << "t,W,chi,rho,lambda,phi\n";
    const auto& g = *b.grid();
    os.precision(17);
    for (std::size_t i = 0; i < g.size(); ++i)
        os << g[i] << ',' << b.W[i] << ',' << b.chi[i] << ',' << b.rho[i] << ',' << b.lambda[i] << ',' << b.phi[i]
           << '\n';
}

}  // namespace smallimpact
