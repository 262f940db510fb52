// Acceptance suite: one PASS/FAIL line per criterion. Optional arguments select
// criteria by number ("acceptance 3 7").

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "smallimpact/coeffs.hpp"
#include "smallimpact/costs.hpp"
#include "smallimpact/graphs.hpp"
#include "smallimpact/limit.hpp"
#include "smallimpact/pathsim.hpp"
#include "smallimpact/stats.hpp"
#include "smallimpact/statesim.hpp"
#include "smallimpact/strategies.hpp"

using namespace smallimpact;
using nlohmann::json;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

std::vector<std::uint64_t> seed_range(std::uint64_t first, std::size_t n) {
    std::vector<std::uint64_t> s(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = first + i;
    return s;
}

ModelParams params_for(const std::string& family, const json& spec, double gamma) {
    ModelParams p;
    p.gamma = gamma;
    p.T = 1.0;
    p.x0 = 1.0;
    apply_family_bounds(family, spec, p);
    return p;
}

const json kSineSpec = {{"rho", 1.0}, {"C", 1.0}, {"rho_amp", 0.3}, {"rho_freq", 6.0}};

std::vector<PathBundle> bundles(const FactorModel& f, const ModelParams& p, const GridPtr& g,
                                std::span<const std::uint64_t> seeds) {
    std::vector<PathBundle> out(seeds.size());
    parallel_for(seeds.size(), [&](std::size_t k) { out[k] = simulate_bundle(f, p, g, seeds[k]); });
    return out;
}

/// Smooth adapted liquidating inventory x0 (1 - t/T)(1 + a (sin(w t + ph) - sin ph) + c (R_t - t)),
/// R_t = int_0^t rho, as cell rates.
RateStrategy smooth_strategy(const PathBundle& b, double x0, double a, double w, double ph, double c) {
    const auto& g = *b.grid();
    const auto R = cumulative_trapezoid(g, b.rho.values);
    const double T = g.horizon();
    std::vector<double> X(g.size()), xi(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
        X[i] = x0 * (1.0 - g[i] / T) * (1.0 + a * (std::sin(w * g[i] + ph) - std::sin(ph)) + c * (R[i] - g[i]));
    X.back() = 0.0;
    for (std::size_t i = 0; i + 1 < g.size(); ++i) xi[i] = (X[i + 1] - X[i]) / g.step(i);
    xi.back() = xi[g.size() - 2];
    return {SampledPath(b.grid(), std::move(xi))};
}

struct SmoothShape {
    double a, w, ph, c;
};

std::vector<SmoothShape> random_shapes(std::size_t n, std::uint64_t seed) {
    CounterRng rng(seed, 7);
    std::vector<SmoothShape> out;
    for (std::size_t k = 0; k < n; ++k) {
        SmoothShape s;
        s.a = rng.uniform() - 0.5;
        s.w = 1.0 + 9.0 * rng.uniform();
        s.ph = 2.0 * std::numbers::pi * rng.uniform();
        s.c = rng.uniform() - 0.5;
        out.push_back(s);
    }
    return out;
}

// 1 -------------------------------------------------------------------------
Outcome obizhaeva_wang() {
    const json spec = {{"rho", 1.0}, {"lambda", 0.0}};
    const auto f = make_factor("constant", spec);
    auto p = params_for("constant", spec, 1.0);
    auto g = make_grid(TimeGrid::refined(1.0, 4096));
    const auto b = simulate_bundle(f, p, g, 0);

    const auto st = build_limit_state(solve_B0_deterministic(b.rho, b.lambda, p), b, p);
    const auto th = decompose_limit_strategy(st, b, p);
    double closed = std::max(std::abs(st.initial_block - 1.0 / 3.0), std::abs(st.terminal_block - 1.0 / 3.0));
    for (std::size_t i = 0; i < g->size(); ++i) closed = std::max(closed, std::abs(th.V.values[i] + (*g)[i] / 3.0));

    p.eta = 1e-5;
    const auto pre = solve_prelimit_pde(f, p, default_chi_grid(f, p), g);
    const auto xs = integrate_state(pre, b, p);
    // Least-squares line through X^eta on [0.1, 0.9]: its ends give the blocks, its slope the rate.
    double n = 0, st_ = 0, sx = 0, stt = 0, stx = 0;
    for (std::size_t i = 0; i < g->size(); ++i) {
        const double t = (*g)[i];
        if (t < 0.1 || t > 0.9) continue;
        n += 1;
        st_ += t;
        sx += xs.Xhat.values[i];
        stt += t * t;
        stx += t * xs.Xhat.values[i];
    }
    const double slope = (n * stx - st_ * sx) / (n * stt - st_ * st_);
    const double icpt = (sx - slope * st_) / n;
    double fit_resid = 0.0;
    for (std::size_t i = 0; i < g->size(); ++i) {
        const double t = (*g)[i];
        if (t >= 0.1 && t <= 0.9) fit_resid = std::max(fit_resid, std::abs(xs.Xhat.values[i] - icpt - slope * t));
    }
    const double pipe = std::max({std::abs(1.0 - icpt - 1.0 / 3.0), std::abs(icpt + slope - 1.0 / 3.0),
                                  std::abs(slope + 1.0 / 3.0), fit_resid});
    return {closed <= 1e-8 && pipe <= 1e-3, "closed form err " + sci(closed) + " <= 1e-8; pipeline (eta=1e-5) err " +
                                                sci(pipe) + " <= 1e-3 (blocks " + sci(1.0 - icpt) + ", " +
                                                sci(icpt + slope) + ", rate " + sci(slope) + ")"};
}

// 2 -------------------------------------------------------------------------
Outcome closed_form_sweep() {
    double worst = 0.0;
    for (double C : {0.5, 1.0, 2.0})
        for (double gamma : {1.0, 3.0, 10.0})
            for (double rho : {0.5, 2.0})
                for (double T : {1.0, 4.0}) {
                    const json spec = {{"rho", rho}, {"C", C}};
                    auto p = params_for("lambda-equals-C-rho", spec, gamma);
                    p.T = T;
                    auto g = make_grid(TimeGrid::uniform(T, 4096));
                    const auto b = simulate_bundle(make_factor("lambda-equals-C-rho", spec), p, g, 0);
                    const auto lim = solve_B0_deterministic(b.rho, b.lambda, p);
                    for (std::size_t i = 0; i < g->size(); ++i) {
                        const double ref = closed_form_B0(C, gamma, rho * (T - (*g)[i]));
                        worst = std::max(worst, std::abs(lim.B0.node(i) - ref) / std::abs(ref));
                    }
                }
    const json spec = {{"rho", 1.0}, {"C", 1.0}};
    const auto p = params_for("lambda-equals-C-rho", spec, 3.0);
    auto g = make_grid(TimeGrid::uniform(1.0, 4096));
    const auto b = simulate_bundle(make_factor("lambda-equals-C-rho", spec), p, g, 0);
    const double b00 = solve_B0_deterministic(b.rho, b.lambda, p).B0.node(0);
    const double target = std::abs(b00 - 0.73522094471974854);
    return {worst <= 1e-8 && target <= 1e-8,
            "max relative error " + sci(worst) + " over 36 cases <= 1e-8; B0_0 = " + std::to_string(b00) + " (err " +
                sci(target) + ")"};
}

// 3 -------------------------------------------------------------------------
Outcome bound_suite() {
    SolverOptions o;
    o.enforce_bounds = false;
    double worst = 0.0;
    std::size_t cases = 0, nodes = 0;
    std::string where;
    struct Fam {
        std::string name;
        json spec;
        double gamma;
    };
    const std::vector<Fam> fams{{"constant", {{"rho", 1.0}, {"lambda", 1.0}}, 1.0},
                                {"lambda-equals-C-rho", kSineSpec, 3.0},
                                {"fig1-sine", json::object(), 3.0}};
    for (const auto& fam : fams) {
        const auto f = make_factor(fam.name, fam.spec);
        const auto base = params_for(fam.name, fam.spec, fam.gamma);
        auto g = make_grid(TimeGrid::refined(1.0, 4096));
        const auto b = simulate_bundle(f, base, g, 0);
        const auto chi = f.diffusive ? default_chi_grid(f, base) : std::vector<double>{};
        for (double eta : {1e-1, 1e-2, 1e-3})
            for (int k = 0; k < 3; ++k) {
                auto p = base;
                p.eta = eta;
                p.N = k == 0 ? min_penalization(p) : (k == 1 ? 10.0 : kInfinity);
                const auto c = f.diffusive ? solve_prelimit_pde(f, p, chi, g, o)
                                           : solve_prelimit_deterministic(b.rho, b.lambda, p, o);
                const auto r = check_prelimit_bounds(c, p, 1e-6);
                ++cases;
                nodes += r.nodes_checked;
                if (r.max_violation >= worst) {
                    worst = r.max_violation;
                    where = fam.name + " eta=" + sci(eta) + " N=" + sci(p.N);
                }
            }
    }
    return {worst <= 1e-6, std::to_string(cases) + " solves, " + std::to_string(nodes) +
                               " nodes, max violation " + sci(worst) + " <= 1e-6" +
                               (worst > 0 ? " (" + where + ")" : "")};
}

// 4 -------------------------------------------------------------------------
Outcome state_invariants() {
    const auto f = make_factor("fig1-sine");
    auto p = params_for("fig1-sine", json::object(), 3.0);
    p.eta = 1e-2;
    auto g = make_grid(TimeGrid::refined(1.0, 4096));
    const auto pre = solve_prelimit_pde(f, p, default_chi_grid(f, p), g);
    const auto seeds = seed_range(0, 200);
    const auto bs = bundles(f, p, g, seeds);
    StateOptions so;
    so.check_invariants = false;
    const double tol = 1e-8, x0 = p.x0, gx = p.gamma * p.x0;
    std::vector<int> bad(bs.size(), 0);
    std::vector<double> zinc(bs.size(), 0.0), xmin(bs.size(), x0);
    parallel_for(bs.size(), [&](std::size_t k) {
        const auto s = integrate_state(pre, bs[k], p, so);
        for (std::size_t i = 1; i + 1 < g->size(); ++i) {
            const double X = s.Xhat.values[i], Y = s.Yhat.values[i];
            if (!(X > -tol && X < x0 + tol && Y > -gx - tol && Y < tol)) bad[k] = 1;
            xmin[k] = std::min(xmin[k], X);
        }
        for (std::size_t i = 0; i + 1 < g->size(); ++i)
            zinc[k] = std::max(zinc[k], s.Zhat.values[i + 1] - s.Zhat.values[i]);
        if (zinc[k] > tol) bad[k] = 1;
    });
    const int nbad = std::count(bad.begin(), bad.end(), 1);
    return {nbad == 0, std::to_string(bs.size() - nbad) + "/200 paths satisfy X in (0,x0), Y in (-gamma x0,0), Z "
                                                         "nonincreasing; max Z increase " +
                           sci(*std::max_element(zinc.begin(), zinc.end())) + ", min interior X " +
                           sci(*std::min_element(xmin.begin(), xmin.end()))};
}

// 5 -------------------------------------------------------------------------
Outcome coefficient_convergence() {
    const auto f = make_factor("lambda-equals-C-rho", kSineSpec);
    const auto p = params_for("lambda-equals-C-rho", kSineSpec, 3.0);
    auto g = make_grid(TimeGrid::refined(1.0, 4096));
    const auto b = simulate_bundle(f, p, g, 0);
    const auto lim = solve_B0_deterministic(b.rho, b.lambda, p);
    std::vector<double> sup;
    for (double eta : {1e-1, 1e-2, 1e-3, 1e-4, 1e-5}) {
        auto q = p;
        q.eta = eta;
        const auto c = solve_prelimit_deterministic(b.rho, b.lambda, q);
        double m = 0.0;
        for (std::size_t i = 0; i < g->size(); ++i)
            if ((*g)[i] <= p.T - 0.05) m = std::max(m, std::abs(c.B.node(i) - lim.B0.node(i)));
        sup.push_back(m);
    }
    const auto inv = count_inversions(sup);
    std::string s;
    for (double v : sup) s += (s.empty() ? "" : ", ") + sci(v);
    return {inv <= 1 && sup.back() <= 1e-2,
            "sup|B - B0| on [0, T-0.05]: " + s + "; inversions " + std::to_string(inv) + " <= 1, final <= 1e-2"};
}

// 6 -------------------------------------------------------------------------
Outcome graph_convergence() {
    const auto p = params_for("fig1-sine", json::object(), 3.0);
    StudyOptions o;
    o.steps = 4096;
    const std::vector<double> etas{1e-1, 1e-2, 1e-3, 1e-4};
    const auto rep = convergence_study(p, make_factor("fig1-sine"), etas, seed_range(0, 200), 0.05, o);
    std::vector<double> frac;
    for (const auto& row : rep.fraction_within) frac.push_back(row[0]);
    bool monotone = true;
    for (std::size_t k = 1; k < frac.size(); ++k) monotone = monotone && frac[k] >= frac[k - 1];
    std::string s;
    for (double v : frac) s += (s.empty() ? "" : ", ") + sci(v);
    return {monotone && frac.back() >= 0.9, "fraction with d_inf <= 0.05 at eta 1e-1..1e-4: " + s +
                                                "; nondecreasing and >= 0.9 at 1e-4; mean d_inf at 1e-4 " +
                                                sci(rep.hausdorff_mean.back())};
}

// 7 -------------------------------------------------------------------------
Outcome cost_identity() {
    const auto f = make_factor("fig1-sine");
    auto p = params_for("fig1-sine", json::object(), 3.0);
    p.eta = 1e-2;
    auto g = make_grid(TimeGrid::refined(1.0, 4096));
    const auto bs = bundles(f, p, g, seed_range(5000, 100));
    const double allowance = 10.0 * g->dt_max() * p.gamma * p.x0 * p.x0;
    int ok = 0;
    double worst_ratio = 0.0;
    for (const auto& sh : random_shapes(20, 11)) {
        RatePolicy xi = [&](const PathBundle& b) { return smooth_strategy(b, p.x0, sh.a, sh.w, sh.ph, sh.c); };
        SemimartingalePolicy th = [&](const PathBundle& b) {
            auto V = integrate_rate(xi(b));
            V.values.back() = -p.x0;
            return SemimartingaleStrategy{p.x0, {}, {}, V, true};
        };
        const auto je = cost_eta_paths(xi, bs, p);
        const auto j0 = cost_semimartingale_paths(th, bs, p);
        std::vector<double> r(bs.size());
        for (std::size_t k = 0; k < bs.size(); ++k) r[k] = je[k].total - j0[k].total - je[k].instantaneous;
        const auto e = estimate(r);
        const double tol = std::max(3.0 * e.std_error, allowance);
        if (std::abs(e.mean) <= tol) ++ok;
        worst_ratio = std::max(worst_ratio, std::abs(e.mean) / tol);
    }
    return {ok == 20, std::to_string(ok) + "/20 strategies within max(3 stderr, 10 dt gamma x0^2 = " + sci(allowance) +
                          "); worst |residual| / tolerance " + sci(worst_ratio)};
}

// 8 -------------------------------------------------------------------------
Outcome ito_free_identity() {
    const auto f = make_factor("fig1-sine");
    const auto p = params_for("fig1-sine", json::object(), 3.0);
    const std::size_t fine = 2048;
    const auto fg = make_grid(TimeGrid::uniform(1.0, fine));
    const auto shapes = random_shapes(5, 23);
    std::vector<double> dts, errs;
    std::vector<SampledPath> W;
    for (std::uint64_t s = 0; s < 50; ++s) W.push_back(simulate_brownian(fg, 9000 + s));
    for (std::size_t n : {256, 512, 1024, 2048}) {
        const auto g = make_grid(TimeGrid::uniform(1.0, n));
        const std::size_t stride = fine / n;
        std::vector<double> e(W.size(), 0.0);
        parallel_for(W.size(), [&](std::size_t k) {
            std::vector<double> w(n + 1);
            for (std::size_t i = 0; i <= n; ++i) w[i] = W[k].values[i * stride];
            const auto b = simulate_factor(f, p, SampledPath(g, std::move(w)), 9000 + k);
            for (const auto& sh : shapes) {
                auto V = integrate_rate(smooth_strategy(b, p.x0, sh.a, sh.w, sh.ph, sh.c));
                V.values.back() = -p.x0;
                const SemimartingaleStrategy th{p.x0, {}, {}, V, true};
                const auto X = inventory(th);
                const double direct = transient_stieltjes(X, impact(X, b.rho, p.gamma));
                const double ident = path_cost_semimartingale(th, b, p).transient;
                e[k] += std::abs(direct - ident) / shapes.size();
            }
        });
        dts.push_back(1.0 / n);
        errs.push_back(estimate(e).mean);
    }
    const double slope = loglog_slope(dts, errs);
    bool decreasing = true;
    for (std::size_t k = 1; k < errs.size(); ++k) decreasing = decreasing && errs[k] < errs[k - 1];
    std::string s;
    for (double v : errs) s += (s.empty() ? "" : ", ") + sci(v);
    return {decreasing && slope >= 0.9,
            "mean |direct - identity| at dt 1/256..1/2048: " + s + "; fitted order " + sci(slope) + " >= 0.9"};
}

// 9 -------------------------------------------------------------------------
Outcome optimality_battery() {
    const auto f = make_factor("fig1-sine");
    const auto p = params_for("fig1-sine", json::object(), 3.0);
    auto g = make_grid(TimeGrid::refined(1.0, 2048));
    const auto lim = solve_B0_pde(f, p, default_chi_grid(f, p), g);
    const auto bs = bundles(f, p, g, seed_range(0, 500));
    SemimartingalePolicy theta_hat = [&](const PathBundle& b) {
        return decompose_limit_strategy(build_limit_state(lim, b, p), b, p);
    };
    const auto ref = cost_semimartingale_paths(theta_hat, bs, p);
    int ok = 0;
    double worst = kInfinity;
    std::string worst_name;
    const auto battery = perturbation_battery(p.x0, p.T);
    for (const auto& pert : battery) {
        SemimartingalePolicy pol = [&](const PathBundle& b) { return pert.apply(theta_hat(b)); };
        const auto d = paired_cost_difference(cost_semimartingale_paths(pol, bs, p), ref);
        if (d.mean >= -3.0 * d.std_error) ++ok;
        const double z = d.std_error > 0 ? d.mean / d.std_error : kInfinity;
        if (z < worst) {
            worst = z;
            worst_name = pert.name;
        }
    }

    const auto df = make_factor("lambda-equals-C-rho", kSineSpec);
    const auto dp = params_for("lambda-equals-C-rho", kSineSpec, 3.0);
    auto dg = make_grid(TimeGrid::refined(1.0, 4096));
    const std::vector<PathBundle> db{simulate_bundle(df, dp, dg, 0)};
    const auto dlim = solve_B0_deterministic(db[0].rho, db[0].lambda, dp);
    SemimartingalePolicy det = [&](const PathBundle& b) {
        return decompose_limit_strategy(build_limit_state(dlim, b, dp), b, dp);
    };
    const auto foc = first_order_check(det, db, dp);
    const double rel = std::abs(foc.derivative) / foc.cost;
    return {ok == static_cast<int>(battery.size()) && rel <= 1e-3,
            std::to_string(ok) + "/" + std::to_string(battery.size()) +
                " perturbations with paired difference >= -3 stderr on 500 paths (smallest z " + sci(worst) + ", " +
                worst_name + "); deterministic |dJ/dq| / J = " + sci(rel) + " <= 1e-3"};
}

// 10 ------------------------------------------------------------------------
Outcome approximations() {
    std::ostringstream os;
    bool pass = true;

    auto g = make_grid(TimeGrid::refined(1.0, 4096));
    const double beta = 0.05;
    std::vector<SampledPath> pilot;
    for (std::uint64_t s = 0; s < 1000; ++s) pilot.push_back(simulate_brownian(g, 2'000'000 + s));
    const double nu = select_tracker_nu(pilot, beta, 0.025);
    std::vector<int> hit(1000, 0);
    parallel_for(1000, [&](std::size_t k) {
        hit[k] = tracker(simulate_brownian(g, 20'000 + k), beta, nu).sup_error <= 3.0 * beta;
    });
    const int ok = std::count(hit.begin(), hit.end(), 1);
    pass = pass && ok >= 950;
    os << "tracker " << ok << "/1000 >= 950 (nu " << sci(nu) << ")";

    const auto f = make_factor("fig1-sine");
    const auto p = params_for("fig1-sine", json::object(), 3.0);
    const auto lim = solve_B0_pde(f, p, default_chi_grid(f, p), g);
    const auto bs = bundles(f, p, g, seed_range(0, 20));
    std::vector<SemimartingaleStrategy> th;
    for (const auto& b : bs) th.push_back(decompose_limit_strategy(build_limit_state(lim, b, p), b, p));
    std::vector<double> l2;
    for (double e : {0.1, 0.05, 0.02, 0.01, 0.005}) {
        std::vector<double> d(bs.size());
        parallel_for(bs.size(), [&](std::size_t k) {
            d[k] = l2_distance_sq(inventory(th[k]), inventory(mollify(th[k], e, 0.1 * e, e), p.x0));
        });
        l2.push_back(estimate(d).mean);
    }
    bool dec = true;
    for (std::size_t k = 1; k < l2.size(); ++k) dec = dec && l2[k] < l2[k - 1];
    pass = pass && dec && l2.back() < 1e-3;
    os << "; mollifier L2 at beta=eps=0.1..0.005, nu=beta/10:";
    for (double v : l2) os << ' ' << sci(v);

    JumpList stairs;
    for (int k = 1; k <= 10; ++k) stairs.push_back({k / 10.0, 0.1});
    std::vector<double> eps{0.1, 0.05, 0.02, 0.01, 0.005}, js;
    double oracle = 0.0;
    for (double e : eps) {
        js.push_back(jump_smoothing_statistic(stairs, 1.0, e));
        // Disjoint windows: each interior jump contributes size^2 eps, the one at T nothing.
        oracle = std::max(oracle, std::abs(js.back() - 9 * 0.01 * e));
    }
    bool jdec = true;
    for (std::size_t k = 1; k < js.size(); ++k) jdec = jdec && js[k] < js[k - 1];
    const double jslope = loglog_slope(eps, js);
    pass = pass && jdec && jslope > 0 && oracle < 1e-12;
    os << "; jump smoothing slope " << sci(jslope) << " (oracle err " << sci(oracle) << ")";
    return {pass, os.str()};
}

// 11 ------------------------------------------------------------------------
Outcome liquidation_in_limit() {
    const auto f = make_factor("lambda-equals-C-rho", kSineSpec);
    const auto p = params_for("lambda-equals-C-rho", kSineSpec, 3.0);
    auto g = make_grid(TimeGrid::refined(1.0, 4096));
    const auto b = simulate_bundle(f, p, g, 0);
    std::vector<double> gaps;
    for (double eta : {1e-1, 1e-2, 1e-3, 1e-4}) {
        auto q = p;
        q.eta = eta;
        q.N = min_penalization(q);
        gaps.push_back(liquidation_gap(integrate_state(solve_prelimit_deterministic(b.rho, b.lambda, q), b, q)));
    }
    bool dec = true;
    for (std::size_t k = 1; k < gaps.size(); ++k) dec = dec && gaps[k] < gaps[k - 1];
    std::string s;
    for (double v : gaps) s += (s.empty() ? "" : ", ") + sci(v);
    return {dec && gaps.back() <= 1e-2 * p.x0,
            "X_T at N = N_min, eta 1e-1..1e-4: " + s + "; decreasing, final <= 1e-2 x0"};
}

struct Criterion {
    int id;
    const char* name;
    double budget_s;   ///< 0: no runtime limit
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> all{
        {1, "Obizhaeva-Wang limit", 10, obizhaeva_wang},
        {2, "closed-form B0 sweep", 5, closed_form_sweep},
        {3, "a priori coefficient bounds", 120, bound_suite},
        {4, "state invariants", 60, state_invariants},
        {5, "coefficient convergence", 60, coefficient_convergence},
        {6, "state and graph convergence", 600, graph_convergence},
        {7, "cost identity", 120, cost_identity},
        {8, "Ito-free identity", 0, ito_free_identity},
        {9, "optimality battery", 0, optimality_battery},
        {10, "tracker, mollifier and jump smoothing", 0, approximations},
        {11, "liquidation in the limit", 0, liquidation_in_limit},
    };
    std::set<int> pick;
    for (int i = 1; i < argc; ++i) pick.insert(std::atoi(argv[i]));
    int failed = 0;
    for (const auto& c : all) {
        if (!pick.empty() && !pick.count(c.id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = c.budget_s <= 0 || s < c.budget_s;
        const bool pass = o.pass && in_time;
        failed += !pass;
        std::printf("%s %2d %s: %s; %.1f s", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), s);
        if (c.budget_s > 0) std::printf(" (limit %.0f s)", c.budget_s);
        std::printf("\n");
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
