#include "smallimpact/costs.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace smallimpact {

namespace {

/// Trapezoid over cells using right values at the left end and left limits at
/// the right end.
double cell_trapezoid(const TimeGrid& g, const std::vector<double>& right, const std::vector<double>& left) {
    std::vector<double> cells(g.size() - 1);
    for (std::size_t i = 0; i + 1 < g.size(); ++i) cells[i] = 0.5 * g.step(i) * (right[i] + left[i + 1]);
    return pairwise_sum(cells);
}

void check_grids(const GridPtr& strategy, const PathBundle& b) {
    if (!same_grid(strategy, b.grid())) throw std::invalid_argument("cost: strategy and bundle grids differ");
}

}  // namespace

CostBreakdown path_cost_eta(const RateStrategy& xi, const PathBundle& b, const ModelParams& p) {
    check_grids(xi.xi.grid, b);
    const auto& g = *b.grid();
    const std::size_t n = g.size();
    const auto X = inventory(xi, p.x0);
    const auto Y = impact(X, b.rho, p.gamma);

    std::vector<double> inst(n - 1), tr(n - 1), lx2(n);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        inst[i] = xi.xi[i] * xi.xi[i] * g.step(i);
        tr[i] = 0.5 * (Y.right[i] + Y.right[i + 1]) * (X.right[i + 1] - X.right[i]);
    }
    for (std::size_t i = 0; i < n; ++i) lx2[i] = b.lambda[i] * X.right[i] * X.right[i];

    CostBreakdown c;
    c.paths = 1;
    c.instantaneous = 0.5 * p.eta * pairwise_sum(inst);
    c.transient = pairwise_sum(tr);
    c.risk = 0.5 * trapezoid(g, lx2);
    const double XT = X.right.back(), YT = Y.right.back();
    if (p.strict_liquidation()) {
        if (std::abs(XT) > 1e-10 * std::max(1.0, std::abs(p.x0)))
            throw std::invalid_argument("cost_eta: strategy does not liquidate under N = inf");
    } else {
        c.penalty = 0.5 * p.N * XT * XT - XT * YT;
    }
    c.total = c.instantaneous + c.transient + c.risk + c.penalty;
    return c;
}

double realized_variation(const SampledPath& V) {
    std::vector<double> d(V.size() > 0 ? V.size() - 1 : 0);
    for (std::size_t i = 0; i + 1 < V.size(); ++i) d[i] = (V[i + 1] - V[i]) * (V[i + 1] - V[i]);
    return pairwise_sum(d);
}

CostBreakdown path_cost_semimartingale(const SemimartingaleStrategy& theta, const PathBundle& b,
                                       const ModelParams& p) {
    if (!theta.liquidating) throw std::invalid_argument("cost_semimartingale: strategy is not liquidating");
    check_grids(theta.V.grid, b);
    const auto& g = *b.grid();
    const std::size_t n = g.size();
    const auto X = inventory(theta);
    const auto Y = impact(X, b.rho, p.gamma);

    std::vector<double> ry_r(n), ry_l(n), lx_r(n), lx_l(n);
    for (std::size_t i = 0; i < n; ++i) {
        ry_r[i] = b.rho[i] * Y.right[i] * Y.right[i];
        ry_l[i] = b.rho[i] * Y.left[i] * Y.left[i];
        lx_r[i] = b.lambda[i] * X.right[i] * X.right[i];
        lx_l[i] = b.lambda[i] * X.left[i] * X.left[i];
    }
    const double d0 = X.right[0] - X.left[0];
    const double YT = Y.right.back();

    CostBreakdown c;
    c.paths = 1;
    c.block0 = 0.5 * p.gamma * d0 * d0;
    c.qv = 0.5 * p.gamma * realized_variation(theta.V);
    c.transient = YT * YT / (2.0 * p.gamma) - c.block0 - c.qv + cell_trapezoid(g, ry_r, ry_l) / p.gamma;
    c.risk = 0.5 * cell_trapezoid(g, lx_r, lx_l);
    c.total = c.block0 + c.transient + c.risk + c.qv;
    return c;
}

double transient_stieltjes(const RcllPath& X, const RcllPath& Y) {
    if (!same_grid(X.grid, Y.grid)) throw std::invalid_argument("transient_stieltjes: grid mismatch");
    const std::size_t n = X.size();
    std::vector<double> terms(2 * n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        terms[2 * i] = 0.5 * (Y.left[i] + Y.right[i]) * (X.right[i] - X.left[i]);
        if (i + 1 < n) terms[2 * i + 1] = Y.right[i] * (X.left[i + 1] - X.right[i]);
    }
    return pairwise_sum(terms);
}

CostBreakdown aggregate(std::span<const CostBreakdown> per_path) {
    CostBreakdown out;
    const std::size_t n = per_path.size();
    out.paths = n;
    if (n == 0) return out;
    std::vector<double> v(n);
    auto mean = [&](double CostBreakdown::*field) {
        for (std::size_t i = 0; i < n; ++i) v[i] = per_path[i].*field;
        return pairwise_sum(v) / static_cast<double>(n);
    };
    out.instantaneous = mean(&CostBreakdown::instantaneous);
    out.transient = mean(&CostBreakdown::transient);
    out.risk = mean(&CostBreakdown::risk);
    out.penalty = mean(&CostBreakdown::penalty);
    out.block0 = mean(&CostBreakdown::block0);
    out.qv = mean(&CostBreakdown::qv);
    for (std::size_t i = 0; i < n; ++i) v[i] = per_path[i].total;
    const auto e = estimate(v);
    out.total = e.mean;
    out.std_error = e.std_error;
    return out;
}

std::vector<CostBreakdown> cost_eta_paths(const RatePolicy& xi, std::span<const PathBundle> bundles,
                                          const ModelParams& params, unsigned threads) {
    std::vector<CostBreakdown> out(bundles.size());
    parallel_for(
        bundles.size(), [&](std::size_t i) { out[i] = path_cost_eta(xi(bundles[i]), bundles[i], params); }, threads);
    return out;
}

std::vector<CostBreakdown> cost_semimartingale_paths(const SemimartingalePolicy& theta,
                                                     std::span<const PathBundle> bundles, const ModelParams& params,
                                                     unsigned threads) {
    std::vector<CostBreakdown> out(bundles.size());
    parallel_for(
        bundles.size(),
        [&](std::size_t i) { out[i] = path_cost_semimartingale(theta(bundles[i]), bundles[i], params); }, threads);
    return out;
}

CostBreakdown cost_eta(const RatePolicy& xi, std::span<const PathBundle> bundles, const ModelParams& params,
                       unsigned threads) {
    return aggregate(cost_eta_paths(xi, bundles, params, threads));
}

CostBreakdown cost_semimartingale(const SemimartingalePolicy& theta, std::span<const PathBundle> bundles,
                                  const ModelParams& params, unsigned threads) {
    return aggregate(cost_semimartingale_paths(theta, bundles, params, threads));
}

Estimate paired_cost_difference(std::span<const CostBreakdown> a, std::span<const CostBreakdown> b) {
    std::vector<double> ta(a.size()), tb(b.size());
    for (std::size_t i = 0; i < a.size(); ++i) ta[i] = a[i].total;
    for (std::size_t i = 0; i < b.size(); ++i) tb[i] = b[i].total;
    return paired_difference(ta, tb);
}

namespace {

std::size_t nearest_node(const TimeGrid& g, double t) {
    const std::size_t i = g.locate(t);
    if (i + 1 < g.size() && std::abs(g[i + 1] - t) < std::abs(t - g[i])) return i + 1;
    return i;
}

double net_jump(const SemimartingaleStrategy& th, std::size_t node) {
    const auto& g = *th.V.grid;
    double a = 0.0;
    for (const auto& j : th.j_plus)
        if (g.find_node(j.t) == node) a += j.size;
    for (const auto& j : th.j_minus)
        if (g.find_node(j.t) == node) a -= j.size;
    return a;
}

void set_net_jump(SemimartingaleStrategy& th, std::size_t node, double value) {
    const auto& g = *th.V.grid;
    auto at = [&](const Jump& j) { return g.find_node(j.t) == node; };
    std::erase_if(th.j_plus, at);
    std::erase_if(th.j_minus, at);
    if (value > 0.0) th.j_plus.push_back({g[node], value});
    if (value < 0.0) th.j_minus.push_back({g[node], -value});
}

}  // namespace

SemimartingaleStrategy drift_perturbation(const SemimartingaleStrategy& theta, double q) {
    auto out = theta;
    const auto& g = *theta.V.grid;
    for (std::size_t i = 0; i < g.size(); ++i) out.V[i] += q * g[i];
    const std::size_t last = g.size() - 1;
    set_net_jump(out, last, net_jump(theta, last) - q * g.horizon());
    return out;
}

SemimartingaleStrategy block_shift(const SemimartingaleStrategy& theta, double shift) {
    auto out = theta;
    const std::size_t last = theta.V.grid->size() - 1;
    set_net_jump(out, 0, net_jump(theta, 0) - shift);
    set_net_jump(out, last, net_jump(theta, last) + shift);
    return out;
}

SemimartingaleStrategy jump_split(const SemimartingaleStrategy& theta, double from, double to, double fraction) {
    const auto& g = *theta.V.grid;
    const std::size_t a = nearest_node(g, from), b = nearest_node(g, to);
    if (a == b) return theta;
    auto out = theta;
    const double moved = fraction * net_jump(theta, a);
    set_net_jump(out, a, net_jump(theta, a) - moved);
    set_net_jump(out, b, net_jump(theta, b) + moved);
    return out;
}

SemimartingaleStrategy blend_with_linear(const SemimartingaleStrategy& theta, double w) {
    auto out = theta;
    const auto& g = *theta.V.grid;
    for (auto& j : out.j_plus) j.size *= 1.0 - w;
    for (auto& j : out.j_minus) j.size *= 1.0 - w;
    std::erase_if(out.j_plus, [](const Jump& j) { return !(j.size > 0.0); });
    std::erase_if(out.j_minus, [](const Jump& j) { return !(j.size > 0.0); });
    for (std::size_t i = 0; i < g.size(); ++i)
        out.V[i] = (1.0 - w) * theta.V[i] - w * theta.x0 * g[i] / g.horizon();
    return out;
}

SemimartingaleStrategy curvature_perturbation(const SemimartingaleStrategy& theta, double c) {
    auto out = theta;
    const auto& g = *theta.V.grid;
    const double T = g.horizon();
    for (std::size_t i = 0; i < g.size(); ++i) out.V[i] += c * g[i] * (T - g[i]);
    out.V[g.size() - 1] = theta.V.back();
    return out;
}

std::vector<NamedPerturbation> perturbation_battery(double x0, double T) {
    std::vector<NamedPerturbation> out;
    const double s = std::max(std::abs(x0), 1e-3);
    for (double q : {0.1, 0.5})
        for (double sign : {1.0, -1.0}) {
            const double v = sign * q * s / T;
            out.push_back({"drift " + std::to_string(v), [v](const auto& th) { return drift_perturbation(th, v); }});
        }
    for (double q : {0.05, 0.1, 0.2})
        for (double sign : {1.0, -1.0}) {
            const double v = sign * q * s;
            out.push_back({"block shift " + std::to_string(v), [v](const auto& th) { return block_shift(th, v); }});
        }
    const std::pair<double, double> splits[] = {{0.0, 0.1}, {0.0, 0.25}, {0.0, 0.5}, {1.0, 0.9}, {1.0, 0.75}};
    const double fractions[] = {0.5, 0.5, 0.25, 0.5, 0.5};
    for (std::size_t k = 0; k < 5; ++k) {
        const double from = splits[k].first * T, to = splits[k].second * T, f = fractions[k];
        out.push_back({"split " + std::to_string(from) + "->" + std::to_string(to),
                       [=](const auto& th) { return jump_split(th, from, to, f); }});
    }
    for (double w : {0.1, 0.25, 0.5})
        out.push_back({"blend " + std::to_string(w), [w](const auto& th) { return blend_with_linear(th, w); }});
    for (double sign : {1.0, -1.0}) {
        const double c = sign * 0.2 * s / (T * T);
        out.push_back({"curvature " + std::to_string(c), [c](const auto& th) { return curvature_perturbation(th, c); }});
    }
    return out;
}

FirstOrderResult first_order_check(const SemimartingalePolicy& theta_hat, std::span<const PathBundle> bundles,
                                   const ModelParams& params, double h, unsigned threads) {
    const std::size_t n = bundles.size();
    std::vector<double> c0(n), cp(n), cm(n), d(n);
    parallel_for(
        n,
        [&](std::size_t i) {
            const auto th = theta_hat(bundles[i]);
            c0[i] = path_cost_semimartingale(th, bundles[i], params).total;
            cp[i] = path_cost_semimartingale(drift_perturbation(th, h), bundles[i], params).total;
            cm[i] = path_cost_semimartingale(drift_perturbation(th, -h), bundles[i], params).total;
            d[i] = (cp[i] - cm[i]) / (2.0 * h);
        },
        threads);
    FirstOrderResult r;
    const auto e = estimate(d);
    r.derivative = e.mean;
    r.std_error = e.std_error;
    r.cost = estimate(c0).mean;
    r.cost_plus = estimate(cp).mean;
    r.cost_minus = estimate(cm).mean;
    return r;
}

double cost_estimate_bound(double d, double M, const ModelParams& p) {
    const double T = p.T, g = p.gamma, r = p.rho_hi, x0 = std::abs(p.x0);
    const double e = std::exp(T * r);
    const double a = 1.0 + T * r * e;
    const double sd = std::sqrt(d), sM = std::sqrt(M);
    return 0.5 * p.lambda_hi * (d + 2.0 * sd * sM) + (0.5 * T * g * r * r * e * e + r * g * a * a) * d +
           std::sqrt(T) * g * r * e * sd * (x0 + r * e * std::sqrt(T) * sM) +
           2.0 * r * a * sd * (g * x0 * std::sqrt(T) + g * a * sM);
}

}  // namespace smallimpact
