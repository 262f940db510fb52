#include "smallimpact/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace smallimpact {

TimeGrid::TimeGrid(std::vector<double> nodes) : t_(std::move(nodes)) {
    if (t_.size() < 2) throw std::invalid_argument("TimeGrid: need at least two nodes");
    if (t_.front() != 0.0) throw std::invalid_argument("TimeGrid: first node must be 0");
    for (std::size_t i = 1; i < t_.size(); ++i) {
        if (!(t_[i] > t_[i - 1])) throw std::invalid_argument("TimeGrid: nodes must be strictly increasing");
        dt_max_ = std::max(dt_max_, t_[i] - t_[i - 1]);
    }
}

TimeGrid TimeGrid::uniform(double T, std::size_t n) {
    if (!(T > 0.0) || n == 0) throw std::invalid_argument("TimeGrid::uniform: need T > 0 and n > 0");
    std::vector<double> t(n + 1);
    for (std::size_t i = 0; i <= n; ++i) t[i] = T * static_cast<double>(i) / static_cast<double>(n);
    t[n] = T;
    return TimeGrid(std::move(t));
}

TimeGrid TimeGrid::refined(double T, std::size_t n, double frac, double ratio, double tau_min) {
    if (!(frac > 0.0 && frac < 1.0) || !(ratio > 0.0 && ratio < 1.0))
        throw std::invalid_argument("TimeGrid::refined: frac and ratio must lie in (0,1)");
    std::vector<double> t = TimeGrid::uniform(T, n).t_;
    const double h = T / static_cast<double>(n);
    for (double tau = frac * T; tau >= tau_min * T; tau *= ratio) t.push_back(T - tau);
    std::sort(t.begin(), t.end());
    // Drop nodes closer than a relative epsilon of the local scale.
    std::vector<double> out;
    out.reserve(t.size());
    for (double v : t) {
        if (!out.empty()) {
            const double gap = v - out.back();
            const double scale = std::min(h, std::max(T - v, tau_min * T));
            if (gap <= 1e-3 * scale) continue;
        }
        out.push_back(v);
    }
    if (out.back() != T) out.back() = T;
    return TimeGrid(std::move(out));
}

std::size_t TimeGrid::locate(double t) const {
    if (t <= t_.front()) return 0;
    if (t >= t_.back()) return t_.size() - 2;
    auto it = std::upper_bound(t_.begin(), t_.end(), t);
    return static_cast<std::size_t>(it - t_.begin()) - 1;
}

std::size_t TimeGrid::find_node(double t, double tol) const {
    const double abs_tol = tol * std::max(1.0, horizon());
    auto it = std::lower_bound(t_.begin(), t_.end(), t - abs_tol);
    if (it != t_.end() && std::abs(*it - t) <= abs_tol) return static_cast<std::size_t>(it - t_.begin());
    return t_.size();
}

SampledPath::SampledPath(GridPtr g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
    if (!grid || grid->size() != values.size())
        throw std::invalid_argument("SampledPath: value count does not match grid");
}

SampledPath::SampledPath(GridPtr g, double constant) : grid(std::move(g)) {
    if (!grid) throw std::invalid_argument("SampledPath: null grid");
    values.assign(grid->size(), constant);
}

double SampledPath::at(double t) const {
    const auto& g = *grid;
    if (t <= 0.0) return values.front();
    if (t >= g.horizon()) return values.back();
    const std::size_t i = g.locate(t);
    const double w = (t - g[i]) / g.step(i);
    return (1.0 - w) * values[i] + w * values[i + 1];
}

bool same_grid(const GridPtr& a, const GridPtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    return *a == *b;
}

double trapezoid(const TimeGrid& grid, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) s += 0.5 * grid.step(i) * (y[i] + y[i + 1]);
    return s;
}

std::vector<double> cumulative_trapezoid(const TimeGrid& grid, std::span<const double> y) {
    std::vector<double> out(grid.size(), 0.0);
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) out[i + 1] = out[i] + 0.5 * grid.step(i) * (y[i] + y[i + 1]);
    return out;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = std::min(x.size(), y.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

}  // namespace smallimpact
