#include <doctest.h>

#include <cmath>

#include "smallimpact/coeffs.hpp"
#include "smallimpact/costs.hpp"
#include "smallimpact/limit.hpp"

using namespace smallimpact;

namespace {

ModelParams constant_params(double gamma, double rho, double lambda, double eta = 0.0, double N = kInfinity) {
    ModelParams p;
    p.gamma = gamma;
    p.eta = eta;
    p.N = N;
    apply_family_bounds("constant", {{"rho", rho}, {"lambda", lambda}}, p);
    return p;
}

PathBundle constant_bundle(double rho, double lambda, const ModelParams& p, GridPtr g) {
    return simulate_bundle(make_factor("constant", {{"rho", rho}, {"lambda", lambda}}), p, std::move(g), 0);
}

RateStrategy constant_rate(GridPtr g, double v) { return RateStrategy{SampledPath(std::move(g), v)}; }

SemimartingalePolicy limit_policy(const LimitCoefficients& limit, const ModelParams& p) {
    return [&limit, p](const PathBundle& b) { return decompose_limit_strategy(build_limit_state(limit, b, p), b, p); };
}

/// Derivative of q -> J0(theta-hat^q) at 0 written out through the impact
/// formula: -Y_T e^{-R_T} int s rho e^R + 2 int rho Y (t - e^{-R} int_0^t s rho e^R) + int t lambda X.
double derivative_formula(const SemimartingaleStrategy& th, const PathBundle& b, const ModelParams& p) {
    const auto& g = *b.grid();
    const std::size_t n = g.size();
    const auto X = inventory(th);
    const auto Y = impact(X, b.rho, p.gamma);
    const auto R = cumulative_trapezoid(g, b.rho.values);
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = g[i] * b.rho[i] * std::exp(R[i]);
    const auto S = cumulative_trapezoid(g, w);
    std::vector<double> a(n), c(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double y = i + 1 < n ? Y.right[i] : Y.left[i];
        const double x = i + 1 < n ? X.right[i] : X.left[i];
        a[i] = 2.0 * b.rho[i] * y * (g[i] - std::exp(-R[i]) * S[i]);
        c[i] = g[i] * b.lambda[i] * x;
    }
    return -Y.right.back() * std::exp(-R.back()) * S.back() + trapezoid(g, a) + trapezoid(g, c);
}

}  // namespace

TEST_CASE("no trading leaves penalty and risk") {
    auto g = make_grid(TimeGrid::uniform(1.0, 1000));
    const auto p = constant_params(1.0, 1.0, 1.0, 0.1, 5.0);
    const auto b = constant_bundle(1.0, 1.0, p, g);
    const auto c = path_cost_eta(constant_rate(g, 0.0), b, p);
    CHECK(c.total == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(c.penalty == doctest::Approx(2.5).epsilon(1e-14));
    CHECK(c.risk == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(c.transient == 0.0);
    CHECK(c.instantaneous == 0.0);
}

TEST_CASE("linear liquidation cost") {
    auto g = make_grid(TimeGrid::uniform(1.0, 4096));
    const auto p = constant_params(1.0, 1.0, 1.0, 0.1);
    const auto b = constant_bundle(1.0, 1.0, p, g);
    const auto c = path_cost_eta(constant_rate(g, -1.0), b, p);
    // 0.05 + exp(-1) + 1/6.
    CHECK(c.total == doctest::Approx(0.584546107838109).epsilon(1e-7));
    CHECK(c.instantaneous == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(c.risk == doctest::Approx(1.0 / 6.0).epsilon(1e-7));
    CHECK(c.transient == doctest::Approx(std::exp(-1.0)).epsilon(1e-7));

    auto open = p;
    CHECK_THROWS_AS(path_cost_eta(constant_rate(g, -0.5), b, open), std::invalid_argument);
}

TEST_CASE("block liquidation at time zero") {
    auto g = make_grid(TimeGrid::uniform(1.0, 4096));
    const auto p = constant_params(1.0, 1.0, 0.0);
    const auto b = constant_bundle(1.0, 0.0, p, g);
    const SemimartingaleStrategy block{1.0, {}, {{0.0, 1.0}}, SampledPath(g, 0.0), true};
    const auto c = path_cost_semimartingale(block, b, p);
    CHECK(c.block0 == 0.5);
    CHECK(c.qv == 0.0);
    CHECK(c.total == doctest::Approx(0.5).epsilon(1e-7));
    const auto X = inventory(block);
    CHECK(transient_stieltjes(X, impact(X, b.rho, p.gamma)) == doctest::Approx(0.5));

    SemimartingaleStrategy open{1.0, {}, {}, SampledPath(g, 0.0), false};
    CHECK_THROWS_AS(path_cost_semimartingale(open, b, p), std::invalid_argument);
}

TEST_CASE("realized variation of smooth paths vanishes") {
    double prev = 1e300;
    for (std::size_t n : {100u, 1000u, 10000u}) {
        auto g = make_grid(TimeGrid::uniform(1.0, n));
        std::vector<double> v(g->size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::sin(3.0 * (*g)[i]) - 0.0;
        const double qv = realized_variation(SampledPath(g, std::move(v)));
        CHECK(qv < prev);
        prev = qv;
    }
    CHECK(prev < 1e-3);
}

TEST_CASE("instantaneous impact accounts for the gap between the cost functionals") {
    ModelParams p;
    p.gamma = 3.0;
    p.eta = 0.05;
    apply_family_bounds("fig1-sine", nlohmann::json::object(), p);
    const auto f = make_factor("fig1-sine");
    auto g = make_grid(TimeGrid::uniform(1.0, 2048));
    const double dt = g->dt_max();
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const auto b = simulate_bundle(f, p, g, seed);
        // Adapted, continuous rate: follows W on [0, 1/2], then a linear ramp
        // fixed at t = 1/2 that liquidates the remainder.
        const std::size_t half = g->find_node(0.5);
        std::vector<double> xi(g->size());
        double x = p.x0;
        for (std::size_t i = 0; i < half; ++i) {
            xi[i] = -1.0 + b.W[i];
            x += xi[i] * g->step(i);
        }
        const double a = -1.0 + b.W[half];
        // int_{1/2}^1 (a + k (t - 1/2)) dt = -x  =>  k = 8 (-x - a / 2).
        const double k = 8.0 * (-x - 0.5 * a);
        for (std::size_t i = half; i < g->size(); ++i) xi[i] = a + k * ((*g)[i] - 0.5);
        for (std::size_t i = half; i + 1 < g->size(); ++i) {
            const double t0 = (*g)[i], t1 = (*g)[i + 1];
            xi[i] = a + k * (0.5 * (t0 + t1) - 0.5);   // cell average
        }
        const RateStrategy rate{SampledPath(g, xi)};
        const auto ce = path_cost_eta(rate, b, p);
        auto V = integrate_rate(rate);
        V[g->size() - 1] = -p.x0;
        const SemimartingaleStrategy th{p.x0, {}, {}, V, true};
        const auto c0 = path_cost_semimartingale(th, b, p);
        CHECK(std::abs(ce.total - c0.total - ce.instantaneous) <= 10.0 * dt);

        // Direct Riemann-Stieltjes evaluation of the transient term.
        const auto X = inventory(th);
        const double direct = transient_stieltjes(X, impact(X, b.rho, p.gamma)) + c0.risk + c0.qv;
        CHECK(std::abs(direct - c0.total) <= 10.0 * dt);
    }
}

TEST_CASE("first-order condition in the deterministic case") {
    auto g = make_grid(TimeGrid::refined(1.0, 4096));
    for (double lambda : {0.0, 1.0}) {
        const auto p = constant_params(1.0, 1.0, lambda);
        const std::vector<PathBundle> bs{constant_bundle(1.0, lambda, p, g)};
        const auto limit = solve_B0_deterministic(bs[0].rho, bs[0].lambda, p);
        const auto policy = limit_policy(limit, p);
        const auto r = first_order_check(policy, bs, p, 1e-2, 1);
        CHECK(std::abs(r.derivative) <= 1e-3 * r.cost);
        CHECK(r.cost_plus >= r.cost);
        CHECK(r.cost_minus >= r.cost);
        const double oracle = derivative_formula(policy(bs[0]), bs[0], p);
        CHECK(std::abs(oracle) <= 1e-3 * r.cost);
        CHECK(std::abs(oracle - r.derivative) <= 1e-3 * r.cost);
    }
}

TEST_CASE("difference quotient matches the derivative formula off the optimum") {
    auto g = make_grid(TimeGrid::uniform(1.0, 1024));
    ModelParams p;
    p.gamma = 3.0;
    apply_family_bounds("fig1-sine", nlohmann::json::object(), p);
    const auto f = make_factor("fig1-sine");
    std::vector<PathBundle> bs;
    for (std::uint64_t s = 0; s < 5; ++s) bs.push_back(simulate_bundle(f, p, g, s));
    // Linear liquidation is not optimal, so the derivative is far from zero.
    SemimartingalePolicy lin = [&](const PathBundle& b) {
        std::vector<double> v(g->size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = -(*g)[i];
        return SemimartingaleStrategy{1.0, {}, {}, SampledPath(b.grid(), std::move(v)), true};
    };
    const auto r = first_order_check(lin, bs, p, 0.1, 1);
    double oracle = 0.0;
    for (const auto& b : bs) oracle += derivative_formula(lin(b), b, p) / static_cast<double>(bs.size());
    CHECK(std::abs(r.derivative) > 0.01);
    CHECK(r.derivative == doctest::Approx(oracle).epsilon(1e-3));
}

TEST_CASE("round trips from zero inventory cost a positive amount") {
    auto g = make_grid(TimeGrid::uniform(1.0, 1024));
    auto p = constant_params(1.0, 1.0, 1.0);
    p.x0 = 0.0;
    const std::vector<PathBundle> bs{constant_bundle(1.0, 1.0, p, g)};
    const auto limit = solve_B0_deterministic(bs[0].rho, bs[0].lambda, p);
    const auto policy = limit_policy(limit, p);
    const auto th = policy(bs[0]);
    CHECK(th.j_plus.empty());
    CHECK(th.j_minus.empty());
    const auto r = first_order_check(policy, bs, p, 0.1, 1);
    CHECK(r.cost == 0.0);
    CHECK((r.cost_plus - r.cost) / 0.1 > 0.0);
    CHECK(r.cost_minus > 0.0);
}

TEST_CASE("perturbations of the limit strategy cost more") {
    auto g = make_grid(TimeGrid::refined(1.0, 2048));
    const auto p = constant_params(3.0, 1.0, 1.0);
    const std::vector<PathBundle> bs{constant_bundle(1.0, 1.0, p, g)};
    const auto limit = solve_B0_deterministic(bs[0].rho, bs[0].lambda, p);
    const auto policy = limit_policy(limit, p);
    const auto base = cost_semimartingale(policy, bs, p, 1);
    const auto battery = perturbation_battery(p.x0, p.T);
    REQUIRE(battery.size() == 20);
    for (const auto& pert : battery) {
        SemimartingalePolicy perturbed = [&](const PathBundle& b) { return pert.apply(policy(b)); };
        const auto c = cost_semimartingale(perturbed, bs, p, 1);
        INFO(pert.name);
        CHECK(c.total > base.total);
        CHECK(std::abs(inventory(perturbed(bs[0])).right.back()) < 1e-12);
    }
}

TEST_CASE("cost estimate bound for mollified strategies") {
    auto g = make_grid(TimeGrid::uniform(1.0, 4096));
    const auto p = constant_params(3.0, 1.0, 1.0);
    const auto b = constant_bundle(1.0, 1.0, p, g);
    const auto limit = solve_B0_deterministic(b.rho, b.lambda, p);
    const auto th = limit_policy(limit, p)(b);
    const auto X = inventory(th);
    const double c = path_cost_semimartingale(th, b, p).total;
    std::vector<double> x2(g->size());
    for (std::size_t i = 0; i < x2.size(); ++i) x2[i] = X.right[i] * X.right[i];
    const double M = trapezoid(*g, x2);
    for (double eps : {0.2, 0.05, 0.01}) {
        const auto xi = mollify(th, 0.05, 0.01, eps);
        auto V = integrate_rate(xi);
        V[g->size() - 1] = -p.x0;
        const SemimartingaleStrategy smooth{p.x0, {}, {}, V, true};
        const double d = l2_distance_sq(X, inventory(xi, p.x0));
        const double gap = std::abs(c - path_cost_semimartingale(smooth, b, p).total);
        CHECK(gap <= cost_estimate_bound(d, M, p));
        CHECK(gap > 0.0);
    }
}

TEST_CASE("batch results do not depend on the thread count") {
    ModelParams p;
    p.gamma = 3.0;
    apply_family_bounds("fig1-sine", nlohmann::json::object(), p);
    const auto f = make_factor("fig1-sine");
    auto g = make_grid(TimeGrid::refined(1.0, 512));
    std::vector<PathBundle> bs;
    for (std::uint64_t s = 0; s < 40; ++s) bs.push_back(simulate_bundle(f, p, g, s));
    const auto limit = solve_B0_pde(f, p, default_chi_grid(f, p, 0.05), g);
    const auto policy = limit_policy(limit, p);
    const auto a = cost_semimartingale(policy, bs, p, 1);
    const auto b = cost_semimartingale(policy, bs, p, 4);
    CHECK(a.total == b.total);
    CHECK(a.std_error == b.std_error);
    CHECK(a.paths == 40);
    CHECK(a.qv > 0.0);
    CHECK(a.total == doctest::Approx(a.block0 + a.transient + a.risk + a.qv));

    const auto pa = cost_semimartingale_paths(policy, bs, p, 1);
    const auto pb = cost_semimartingale_paths(
        [&](const PathBundle& x) { return drift_perturbation(policy(x), 0.1); }, bs, p, 1);
    const auto diff = paired_cost_difference(pb, pa);
    CHECK(diff.mean > 0.0);
    CHECK(diff.std_error > 0.0);
}
