#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace smallimpact {

/// Pairwise (cascade) summation; bit-stable for a fixed input order.
double pairwise_sum(std::span<const double> x);

struct Estimate {
    double mean = 0.0;
    double std_error = 0.0;    ///< sample standard deviation / sqrt(n); 0 for n < 2
    std::size_t n = 0;
};

Estimate estimate(std::span<const double> x);

/// Estimate of E(a - b) from common-random-number samples.
Estimate paired_difference(std::span<const double> a, std::span<const double> b);

/// Runs body(i) for i in [0, n) on up to `threads` workers (0 selects the
/// hardware concurrency). Each index is run exactly once; the first exception
/// thrown by any worker is rethrown after all workers have joined.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, unsigned threads = 0);

}  // namespace smallimpact
