#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace smallimpact {

/// Strictly increasing time nodes covering [0, T], with t.front() == 0 and
/// t.back() == T exactly.
class TimeGrid {
public:
    /// Takes ownership of the node vector; throws std::invalid_argument if the
    /// nodes are not strictly increasing or do not start at zero.
    explicit TimeGrid(std::vector<double> nodes);

    /// n equal steps on [0, T].
    static TimeGrid uniform(double T, std::size_t n);

    /// n equal steps on [0, T] merged with geometric nodes T - frac*T*q^k that
    /// accumulate toward T (ratio q, stopping below tau_min*T).
    static TimeGrid refined(double T, std::size_t n, double frac = 0.05, double ratio = 0.85,
                            double tau_min = 1e-7);

    [[nodiscard]] std::size_t size() const { return t_.size(); }
    [[nodiscard]] double operator[](std::size_t i) const { return t_[i]; }
    [[nodiscard]] double horizon() const { return t_.back(); }
    [[nodiscard]] double dt_max() const { return dt_max_; }
    [[nodiscard]] double step(std::size_t i) const { return t_[i + 1] - t_[i]; }
    [[nodiscard]] std::span<const double> nodes() const { return t_; }

    /// Index i with t[i] <= t < t[i+1]; the last interval for t >= T.
    [[nodiscard]] std::size_t locate(double t) const;

    /// Index of a node within tol of t, or size() if there is none.
    [[nodiscard]] std::size_t find_node(double t, double tol = 1e-12) const;

    bool operator==(const TimeGrid& other) const { return t_ == other.t_; }

private:
    std::vector<double> t_;
    double dt_max_ = 0.0;
};

using GridPtr = std::shared_ptr<const TimeGrid>;

inline GridPtr make_grid(TimeGrid g) { return std::make_shared<const TimeGrid>(std::move(g)); }

/// One value per grid node.
struct SampledPath {
    GridPtr grid;
    std::vector<double> values;

    SampledPath() = default;
    SampledPath(GridPtr g, std::vector<double> v);
    /// Constant path on g.
    SampledPath(GridPtr g, double constant);

    [[nodiscard]] std::size_t size() const { return values.size(); }
    [[nodiscard]] double operator[](std::size_t i) const { return values[i]; }
    double& operator[](std::size_t i) { return values[i]; }
    [[nodiscard]] double t(std::size_t i) const { return (*grid)[i]; }
    [[nodiscard]] double front() const { return values.front(); }
    [[nodiscard]] double back() const { return values.back(); }

    /// Piecewise-linear interpolation, flat outside [0, T].
    [[nodiscard]] double at(double t) const;
};

bool same_grid(const GridPtr& a, const GridPtr& b);

/// Trapezoidal integral of y over the whole grid.
double trapezoid(const TimeGrid& grid, std::span<const double> y);

/// Running trapezoidal integral, out[0] = 0.
std::vector<double> cumulative_trapezoid(const TimeGrid& grid, std::span<const double> y);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace smallimpact
