#include "smallimpact/graphs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <stdexcept>

#include "smallimpact/limit.hpp"
#include "smallimpact/stats.hpp"
#include "smallimpact/statesim.hpp"

namespace smallimpact {

CompletedGraph completed_graph(const RcllPath& path) {
    CompletedGraph g;
    g.polyline.reserve(path.size() + 4);
    for (std::size_t i = 0; i < path.size(); ++i) {
        if (path.jumps_at(i)) g.polyline.push_back({path.t(i), path.left[i]});
        g.polyline.push_back({path.t(i), path.right[i]});
    }
    return g;
}

CompletedGraph completed_graph(const SampledPath& path) {
    CompletedGraph g;
    g.polyline.reserve(path.size());
    for (std::size_t i = 0; i < path.size(); ++i) g.polyline.push_back({path.t(i), path[i]});
    return g;
}

double linf_point_segment(GraphPoint p, GraphPoint a, GraphPoint b) {
    const double u = p.t - a.t, v = p.x - a.x;
    const double du = b.t - a.t, dv = b.x - a.x;
    auto f = [&](double s) {
        s = std::clamp(s, 0.0, 1.0);
        return std::max(std::abs(u - s * du), std::abs(v - s * dv));
    };
    // The minimum of this convex piecewise-linear function sits at an end point
    // or where one of the terms vanishes or the two terms cross.
    double best = std::min(f(0.0), f(1.0));
    if (du != 0.0) best = std::min(best, f(u / du));
    if (dv != 0.0) best = std::min(best, f(v / dv));
    if (du != dv) best = std::min(best, f((u - v) / (du - dv)));
    if (du != -dv) best = std::min(best, f((u + v) / (du + dv)));
    return best;
}

namespace {

std::vector<GraphPoint> resample(const std::vector<GraphPoint>& poly, double r) {
    std::vector<GraphPoint> out;
    out.reserve(poly.size() * 2);
    for (std::size_t k = 0; k + 1 < poly.size(); ++k) {
        const auto a = poly[k], b = poly[k + 1];
        const double len = std::max(std::abs(b.t - a.t), std::abs(b.x - a.x));
        const auto m = static_cast<std::size_t>(std::ceil(len / r));
        const std::size_t parts = std::max<std::size_t>(m, 1);
        for (std::size_t j = 0; j < parts; ++j) {
            const double s = static_cast<double>(j) / static_cast<double>(parts);
            out.push_back({a.t + s * (b.t - a.t), a.x + s * (b.x - a.x)});
        }
    }
    out.push_back(poly.back());
    return out;
}

/// sup over samples of the distance to the polyline `poly`.
double directed(const std::vector<GraphPoint>& samples, const std::vector<GraphPoint>& poly, std::size_t stride = 1,
                double worst = 0.0) {
    const std::size_t segs = poly.size() > 1 ? poly.size() - 1 : 0;
    auto seg_dist = [&](std::size_t k, GraphPoint p) {
        return segs == 0 ? std::max(std::abs(p.t - poly[0].t), std::abs(p.x - poly[0].x))
                         : linf_point_segment(p, poly[k], poly[k + 1]);
    };
    for (std::size_t i = 0; i < samples.size(); i += stride) {
        const auto& p = samples[i];
        if (segs == 0) {
            worst = std::max(worst, seg_dist(0, p));
            continue;
        }
        // First segment whose right end is at or after p.t.
        auto it = std::lower_bound(poly.begin() + 1, poly.end(), p.t,
                                   [](const GraphPoint& q, double t) { return q.t < t; });
        std::size_t k0 = std::min<std::size_t>(static_cast<std::size_t>(it - poly.begin()) - 1, segs - 1);
        // Stop once best <= worst.
        double best = seg_dist(k0, p);
        for (std::size_t k = k0; k-- > 0 && best > worst;) {
            if (p.t - poly[k + 1].t > best) break;
            best = std::min(best, seg_dist(k, p));
        }
        for (std::size_t k = k0 + 1; k < segs && best > worst; ++k) {
            if (poly[k].t - p.t > best) break;
            best = std::min(best, seg_dist(k, p));
        }
        worst = std::max(worst, best);
    }
    return worst;
}

}  // namespace

double hausdorff(const CompletedGraph& a, const CompletedGraph& b, double r) {
    if (a.polyline.empty() || b.polyline.empty()) throw std::invalid_argument("hausdorff: empty graph");
    if (!(r > 0.0)) throw std::invalid_argument("hausdorff: resolution must be positive");
    if (a.polyline == b.polyline) return 0.0;
    const auto sa = resample(a.polyline, r), sb = resample(b.polyline, r);
    // Lower bound from every 64th sample.
    double h = std::max(directed(sa, b.polyline, 64), directed(sb, a.polyline, 64));
    h = directed(sa, b.polyline, 1, h);
    return directed(sb, a.polyline, 1, h);
}

double default_resolution(const TimeGrid& grid, double x0) {
    return 0.25 * grid.dt_max() * std::min(1.0, std::abs(x0) > 0.0 ? std::abs(x0) : 1.0);
}

double modulus_of_continuity(const SampledPath& path, double nu) {
    const auto& g = *path.grid;
    const double slack = 1e-12 * std::max(1.0, g.horizon());
    std::deque<std::size_t> hi, lo;
    std::size_t start = 0;
    double out = 0.0;
    for (std::size_t i = 0; i < path.size(); ++i) {
        while (!hi.empty() && path[hi.back()] <= path[i]) hi.pop_back();
        while (!lo.empty() && path[lo.back()] >= path[i]) lo.pop_back();
        hi.push_back(i);
        lo.push_back(i);
        while (g[i] - g[start] > nu + slack) ++start;
        while (hi.front() < start) hi.pop_front();
        while (lo.front() < start) lo.pop_front();
        out = std::max(out, path[hi.front()] - path[lo.front()]);
    }
    return out;
}

std::size_t count_inversions(std::span<const double> v) {
    std::size_t n = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[i - 1]) ++n;
    return n;
}

namespace {

struct PathMetrics {
    double b = 0.0, d = 0.0, e = 0.0, f = 0.0, g = 0.0;
    double state = 0.0;
    double hausdorff = 0.0;
    bool band = true;
    double gap = 0.0;
    std::size_t clamped = 0;
};

}  // namespace

ConvergenceReport convergence_study(const ModelParams& params, const FactorModel& factor,
                                    std::span<const double> etas, std::span<const std::uint64_t> seeds, double eps,
                                    const StudyOptions& opts) {
    if (etas.empty() || seeds.empty()) throw std::invalid_argument("convergence_study: empty eta or seed list");
    for (std::size_t k = 0; k < etas.size(); ++k) {
        if (!(etas[k] > 0.0)) throw std::invalid_argument("convergence_study: etas must be positive");
        if (k > 0 && !(etas[k] < etas[k - 1])) throw std::invalid_argument("convergence_study: etas must decrease");
    }
    if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size())
        throw std::invalid_argument("convergence_study: seeds must be distinct");
    if (!(eps > 0.0 && eps < 0.5 * params.T)) throw std::invalid_argument("convergence_study: need 0 < eps < T/2");

    const auto grid = make_grid(TimeGrid::refined(params.T, opts.steps));
    const auto& g = *grid;
    const std::size_t n = g.size(), paths = seeds.size();
    const double r = opts.resolution > 0.0 ? opts.resolution : default_resolution(g, params.x0);

    std::vector<PathBundle> bundles(paths);
    parallel_for(
        paths, [&](std::size_t k) { bundles[k] = simulate_bundle(factor, params, grid, seeds[k]); }, opts.threads);

    std::vector<double> chi;
    if (factor.diffusive) chi = default_chi_grid(factor, params, opts.chi_step, opts.chi_sds);
    const auto limit = factor.diffusive
                           ? solve_B0_pde(factor, params, chi, grid, opts.solver)
                           : solve_B0_deterministic(bundles[0].rho, bundles[0].lambda, params, opts.solver);

    std::vector<LimitState> lim(paths);
    std::vector<std::vector<double>> B0(paths);
    std::vector<std::size_t> lim_clamped(paths, 0);
    parallel_for(
        paths,
        [&](std::size_t k) {
            lim[k] = build_limit_state(limit, bundles[k], params);
            B0[k] = limit.B0.along(bundles[k].chi, lim_clamped[k]);
        },
        opts.threads);

    ConvergenceReport rep;
    rep.eta_values.assign(etas.begin(), etas.end());
    rep.seeds.assign(seeds.begin(), seeds.end());
    rep.eps = eps;
    rep.eps_values = opts.eps_values;
    for (auto c : lim_clamped) rep.clamped += c;
    for (const auto& l : lim) rep.clamped += l.clamped;

    for (double eta : etas) {
        ModelParams p = params;
        p.eta = eta;
        if (opts.penalize_min) p.N = min_penalization(p);
        rep.N_values.push_back(p.N);
        const auto coeffs = factor.diffusive
                                ? solve_prelimit_pde(factor, p, chi, grid, opts.solver)
                                : solve_prelimit_deterministic(bundles[0].rho, bundles[0].lambda, p, opts.solver);

        std::vector<PathMetrics> m(paths);
        parallel_for(
            paths,
            [&](std::size_t k) {
                const auto& b = bundles[k];
                const auto& L = lim[k];
                auto& out = m[k];
                const auto st = integrate_state(coeffs, b, p);
                out.clamped = st.clamped;
                const auto B = coeffs.B.along(b.chi, out.clamped);
                const auto D = coeffs.D.along(b.chi, out.clamped);
                const auto E = coeffs.E.along(b.chi, out.clamped);
                for (std::size_t i = 0; i < n; ++i) {
                    const double t = g[i];
                    if (t <= params.T - eps) {
                        const double ph = b.phi[i];
                        out.b = std::max(out.b, std::abs(B[i] - B0[k][i]));
                        out.d = std::max(out.d, std::abs(D[i] - L.D0[i]));
                        out.e = std::max(out.e, std::abs(E[i] - L.E0[i]));
                        out.f = std::max(out.f, std::abs(D[i] + p.gamma * E[i] - ph));
                        out.g = std::max(out.g, std::abs(b.rho[i] * B[i] + ph * E[i] - 2.0 * b.rho[i]));
                    }
                    const double diff = st.Xhat[i] - L.Xhat0.right[i];
                    if (t >= eps && t <= params.T - eps) out.state = std::max(out.state, std::abs(diff));
                    if (t >= eps && diff > eps) out.band = false;
                    if (t <= params.T - eps && diff < -eps) out.band = false;
                }
                out.hausdorff = hausdorff(completed_graph(st.Xhat), completed_graph(L.Xhat0), r);
                out.gap = liquidation_gap(st);
            },
            opts.threads);

        double sb = 0, sd = 0, se = 0, sf = 0, sg = 0;
        std::vector<double> state(paths), haus(paths), gaps(paths);
        std::size_t band = 0;
        for (std::size_t k = 0; k < paths; ++k) {
            sb = std::max(sb, m[k].b);
            sd = std::max(sd, m[k].d);
            se = std::max(se, m[k].e);
            sf = std::max(sf, m[k].f);
            sg = std::max(sg, m[k].g);
            state[k] = m[k].state;
            haus[k] = m[k].hausdorff;
            gaps[k] = m[k].gap;
            if (m[k].band) ++band;
            rep.clamped += m[k].clamped;
        }
        rep.sup_b.push_back(sb);
        rep.sup_d.push_back(sd);
        rep.sup_e.push_back(se);
        rep.sup_f.push_back(sf);
        rep.sup_g.push_back(sg);
        rep.state_mean.push_back(estimate(state).mean);
        rep.state_max.push_back(*std::max_element(state.begin(), state.end()));
        rep.hausdorff_mean.push_back(estimate(haus).mean);
        rep.hausdorff_max.push_back(*std::max_element(haus.begin(), haus.end()));
        std::vector<double> within;
        for (double e : opts.eps_values) {
            const auto c = std::count_if(haus.begin(), haus.end(), [e](double h) { return h <= e; });
            within.push_back(static_cast<double>(c) / static_cast<double>(paths));
        }
        rep.fraction_within.push_back(std::move(within));
        rep.band_fraction.push_back(static_cast<double>(band) / static_cast<double>(paths));
        rep.gap_mean.push_back(estimate(gaps).mean);
        rep.state_distance.push_back(std::move(state));
        rep.hausdorff.push_back(std::move(haus));
    }
    return rep;
}

}  // namespace smallimpact
