#pragma once

#include <cstdint>
#include <iosfwd>

#include "smallimpact/grid.hpp"
#include "smallimpact/model.hpp"

namespace smallimpact {

/// Counter-based generator: the k-th output of stream (seed, stream) is
/// splitmix64(key(seed, stream) + k * 0x9E3779B97F4A7C15). Uniforms use the top
/// 53 bits; normals come in Box-Muller pairs (2j, 2j+1). The map from
/// (seed, stream, k) to a value is fixed and platform independent.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

    std::uint64_t next_u64();
    /// Uniform on (0, 1).
    double uniform();
    double normal();

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Bundle of factor-driven coefficient paths sharing one Brownian driver.
struct PathBundle {
    std::uint64_t seed = 0;
    SampledPath W;
    SampledPath chi;
    SampledPath rho;
    SampledPath lambda;
    SampledPath phi;

    [[nodiscard]] const GridPtr& grid() const { return W.grid; }
};

/// W[0] = 0, Gaussian increments with variance dt drawn from stream 0 of `seed`.
SampledPath simulate_brownian(GridPtr grid, std::uint64_t seed);

/// Euler-Maruyama for chi, pointwise evaluation of rho, lambda, phi.
/// Throws NumericFault if rho or lambda leave the declared bounds.
PathBundle simulate_factor(const FactorModel& factor, const ModelParams& params, const SampledPath& W,
                           std::uint64_t seed = 0);

/// simulate_brownian followed by simulate_factor.
PathBundle simulate_bundle(const FactorModel& factor, const ModelParams& params, GridPtr grid, std::uint64_t seed);

/// CSV with header t,W,chi,rho,lambda,phi.
void write_bundle_csv(std::ostream& os, const PathBundle& bundle);

}  // namespace smallimpact
