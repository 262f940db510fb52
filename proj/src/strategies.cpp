#include "smallimpact/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "smallimpact/errors.hpp"

namespace smallimpact {

RcllPath::RcllPath(GridPtr g, std::vector<double> right_values, std::vector<double> left_values)
    : grid(std::move(g)), right(std::move(right_values)), left(std::move(left_values)) {
    if (!grid || right.size() != grid->size() || left.size() != grid->size())
        throw std::invalid_argument("RcllPath: value count does not match grid");
}

RcllPath::RcllPath(const SampledPath& p) : grid(p.grid), right(p.values), left(p.values) {}

namespace {

std::size_t jump_node(const TimeGrid& g, const Jump& j) {
    if (!(j.size > 0.0)) throw std::invalid_argument("jump sizes must be positive");
    const std::size_t i = g.find_node(j.t);
    if (i == g.size()) throw std::invalid_argument("jump time is not a grid node");
    return i;
}

}  // namespace

RcllPath inventory(const SemimartingaleStrategy& theta) {
    const auto& g = *theta.V.grid;
    const std::size_t n = g.size();
    if (theta.V[0] != 0.0) throw std::invalid_argument("inventory: V must start at zero");
    std::vector<double> at_node(n, 0.0);
    for (const auto& j : theta.j_plus) at_node[jump_node(g, j)] += j.size;
    for (const auto& j : theta.j_minus) at_node[jump_node(g, j)] -= j.size;
    std::vector<double> right(n), left(n);
    double cum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        left[i] = theta.x0 + cum + theta.V[i];
        cum += at_node[i];
        right[i] = theta.x0 + cum + theta.V[i];
    }
    if (theta.liquidating && std::abs(right.back()) > 1e-10 * std::max(1.0, std::abs(theta.x0)))
        throw std::invalid_argument("inventory: liquidating strategy does not end at zero");
    return RcllPath(theta.V.grid, std::move(right), std::move(left));
}

SampledPath integrate_rate(const RateStrategy& xi) {
    const auto& g = *xi.xi.grid;
    std::vector<double> v(g.size(), 0.0);
    for (std::size_t i = 0; i + 1 < g.size(); ++i) v[i + 1] = v[i] + xi.xi[i] * g.step(i);
    return SampledPath(xi.xi.grid, std::move(v));
}

RcllPath inventory(const RateStrategy& xi, double x0) {
    auto v = integrate_rate(xi);
    for (auto& x : v.values) x += x0;
    return RcllPath(v);
}

RcllPath impact(const RcllPath& X, const SampledPath& rho, double gamma) {
    if (!same_grid(X.grid, rho.grid)) throw std::invalid_argument("impact: grid mismatch");
    const auto& g = *X.grid;
    const std::size_t n = g.size();
    const auto R = cumulative_trapezoid(g, rho.values);
    std::vector<double> right(n), left(n);
    double I = 0.0;   // int_{[0,t]} exp(R) dX
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) {
            // Mean of exp(R) over the cell with R linear.
            const double dr = R[i] - R[i - 1];
            const double mean = std::abs(dr) < 1e-8 ? std::exp(R[i - 1]) * (1.0 + 0.5 * dr)
                                                    : std::exp(R[i - 1]) * std::expm1(dr) / dr;
            I += mean * (X.left[i] - X.right[i - 1]);
        }
        const double decay = std::exp(-R[i]);
        left[i] = gamma * decay * I;
        I += std::exp(R[i]) * (X.right[i] - X.left[i]);
        right[i] = gamma * decay * I;
    }
    return RcllPath(X.grid, std::move(right), std::move(left));
}

SampledPath impact_euler(const RcllPath& X, const SampledPath& rho, double gamma) {
    const auto& g = *X.grid;
    std::vector<double> y(g.size());
    y[0] = gamma * (X.right[0] - X.left[0]);
    for (std::size_t i = 0; i + 1 < g.size(); ++i)
        y[i + 1] = y[i] + gamma * (X.right[i + 1] - X.right[i]) - rho[i] * y[i] * g.step(i);
    return SampledPath(X.grid, std::move(y));
}

double tracker_feedback(double x, double beta, double nu) { return std::clamp(x, -beta, beta) / nu; }

namespace {

/// Advances e' = s - f(e) exactly over a span h.
double advance_error(double e, double s, double beta, double nu, double h) {
    for (int guard = 0; guard < 8 && h > 0.0; ++guard) {
        if (e > beta) {
            const double r = s - beta / nu;
            if (r >= 0.0) return e + r * h;
            const double hit = (e - beta) / -r;
            if (hit >= h) return e + r * h;
            e = beta;
            h -= hit;
        } else if (e < -beta) {
            const double r = s + beta / nu;
            if (r <= 0.0) return e + r * h;
            const double hit = (-beta - e) / r;
            if (hit >= h) return e + r * h;
            e = -beta;
            h -= hit;
        } else {
            const double target = s * nu;
            if (std::abs(target) <= beta) return target + (e - target) * std::exp(-h / nu);
            const double edge = target > 0.0 ? beta : -beta;
            // Time for e to reach the edge while relaxing toward target.
            const double hit = -nu * std::log((target - edge) / (target - e));
            if (hit >= h) return target + (e - target) * std::exp(-h / nu);
            h -= hit;
            return edge + (s - edge / nu) * h;
        }
    }
    return e;
}

}  // namespace

TrackerResult tracker(const SampledPath& V, double beta, double nu) {
    if (!(beta > 0.0) || !(nu > 0.0)) throw std::invalid_argument("tracker: beta and nu must be positive");
    const auto& g = *V.grid;
    const std::size_t n = g.size();
    std::vector<double> vt(n, 0.0), rate(n, 0.0);
    double e = V[0];
    double sup = std::abs(e);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double h = g.step(i);
        const double s = (V[i + 1] - V[i]) / h;
        e = advance_error(e, s, beta, nu, h);
        vt[i + 1] = V[i + 1] - e;
        rate[i] = (vt[i + 1] - vt[i]) / h;
        sup = std::max(sup, std::abs(e));
    }
    if (n > 1) rate[n - 1] = rate[n - 2];
    TrackerResult r;
    r.rate.xi = SampledPath(V.grid, std::move(rate));
    r.Vtilde = SampledPath(V.grid, std::move(vt));
    r.sup_error = sup;
    return r;
}

double select_tracker_nu(std::span<const SampledPath> pilot, double beta, double delta, double nu_min,
                         double nu_max, int iterations) {
    const std::size_t n = pilot.size();
    if (n == 0) throw std::invalid_argument("select_tracker_nu: empty pilot batch");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("select_tracker_nu: delta must lie in (0,1)");
    auto passes = [&](const SampledPath& v, double nu) { return tracker(v, beta, nu).sup_error <= 3.0 * beta; };

    // Largest passing nu for every pilot path.
    std::vector<double> crit(n);
    for (std::size_t k = 0; k < n; ++k) {
        const auto& v = pilot[k];
        if (passes(v, nu_max)) {
            crit[k] = nu_max;
            continue;
        }
        if (!passes(v, nu_min)) {
            crit[k] = 0.0;
            continue;
        }
        double lo = nu_min, hi = nu_max;
        for (int it = 0; it < iterations && hi / lo > 1.0 + 1e-6; ++it) {
            const double mid = std::sqrt(lo * hi);
            (passes(v, mid) ? lo : hi) = mid;
        }
        crit[k] = lo;
    }
    std::sort(crit.begin(), crit.end());

    // The k-th smallest critical value has failure probability <= delta with
    // probability P(Binomial(n, delta) >= k); take the largest k reaching 1 - delta.
    std::vector<double> pmf(n + 1);
    const double ld = std::log(delta), l1d = std::log1p(-delta);
    for (std::size_t j = 0; j <= n; ++j) {
        const double c = std::lgamma(n + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0);
        pmf[j] = std::exp(c + static_cast<double>(j) * ld + static_cast<double>(n - j) * l1d);
    }
    double tail = 1.0;   // P(Bin >= k)
    std::size_t best = 0;
    for (std::size_t k = 1; k <= n; ++k) {
        tail -= pmf[k - 1];
        if (tail >= 1.0 - delta) best = k;
    }
    if (best == 0) throw std::invalid_argument("select_tracker_nu: pilot batch too small for the requested delta");
    const double nu = crit[best - 1];
    if (!(nu > 0.0)) throw NumericFault("select_tracker_nu: no admissible nu above nu_min");
    return nu;
}

namespace {

/// Integral of the smeared jump rate (1/eps) 1[tau, tau+eps) over [a, b).
double smear_overlap(const Jump& j, double eps, double a, double b) {
    const double lo = std::max(a, j.t), hi = std::min(b, j.t + eps);
    return hi > lo ? j.size * (hi - lo) / eps : 0.0;
}

}  // namespace

RateStrategy mollify(const SemimartingaleStrategy& theta, double beta, double nu, double eps) {
    const auto& g = *theta.V.grid;
    const std::size_t n = g.size();
    const double T = g.horizon();
    if (!(eps > 0.0 && eps < 0.5 * T)) throw std::invalid_argument("mollify: need 0 < eps < T/2");
    const double cut = T - eps;
    const auto tr = tracker(theta.V, beta, nu);

    // First branch integrated over [a, b) within [0, cut].
    auto branch = [&](std::size_t i, double a, double b) {
        double v = 0.0;
        for (const auto& j : theta.j_plus)
            if (j.t <= cut) v += smear_overlap(j, eps, a, b);
        for (const auto& j : theta.j_minus)
            if (j.t <= cut) v -= smear_overlap(j, eps, a, b);
        return v + tr.rate.xi[i] * (b - a);
    };

    std::vector<double> xi(n, 0.0);
    double acc = theta.x0;
    std::size_t split = n - 1;   // cell containing cut
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (g[i + 1] <= cut) {
            const double v = branch(i, g[i], g[i + 1]);
            xi[i] = v / g.step(i);
            acc += v;
        } else {
            split = i;
            break;
        }
    }
    double partial = 0.0;
    if (split + 1 < n && g[split] < cut) partial = branch(split, g[split], cut);
    acc += partial;
    const double terminal = -acc / eps;
    for (std::size_t i = split; i + 1 < n; ++i) {
        const double lo = std::max(g[i], cut);
        const double part = i == split ? partial : 0.0;
        xi[i] = (part + terminal * (g[i + 1] - lo)) / g.step(i);
    }
    if (n > 1) xi[n - 1] = xi[n - 2];
    return RateStrategy{SampledPath(theta.V.grid, std::move(xi))};
}

double jump_smoothing_statistic(const JumpList& jumps, double T, double eps) {
    std::vector<double> cuts{0.0, T};
    for (const auto& j : jumps) {
        for (double c : {j.t, j.t + eps})
            if (c > 0.0 && c < T) cuts.push_back(c);
    }
    std::sort(cuts.begin(), cuts.end());
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double a = cuts[k], b = cuts[k + 1];
        if (!(b > a)) continue;
        const double m = 0.5 * (a + b);
        double d = 0.0;
        for (const auto& j : jumps)
            if (j.t > m - eps && j.t <= m) d += j.size;
        total += d * d * (b - a);
    }
    return total;
}

double l2_distance_sq(const RcllPath& a, const RcllPath& b) {
    if (!same_grid(a.grid, b.grid)) throw std::invalid_argument("l2_distance_sq: grid mismatch");
    const auto& g = *a.grid;
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < g.size(); ++i) {
        const double d0 = a.right[i] - b.right[i];
        const double d1 = a.left[i + 1] - b.left[i + 1];
        s += g.step(i) * (d0 * d0 + d0 * d1 + d1 * d1) / 3.0;
    }
    return s;
}

}  // namespace smallimpact
