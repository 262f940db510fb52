#include "smallimpact/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "smallimpact/costs.hpp"
#include "smallimpact/errors.hpp"
#include "smallimpact/graphs.hpp"
#include "smallimpact/io.hpp"
#include "smallimpact/limit.hpp"
#include "smallimpact/stats.hpp"
#include "smallimpact/statesim.hpp"

namespace smallimpact {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

std::ofstream open_file(const fs::path& p) {
    fs::create_directories(p.parent_path());
    std::ofstream os(p);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    return os;
}

void write_json(const fs::path& p, const nlohmann::json& j) {
    auto os = open_file(p);
    os << std::setw(2) << j << '\n';
}

nlohmann::json num_or_string(double v) {
    if (std::isfinite(v)) return v;
    return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
}

/// Shared state of one command: grid, factor paths and the coefficient caches.
class Session {
public:
    explicit Session(const ExperimentConfig& c) : c_(c), grid_(c.numerics.grid(c.model.T)) {
        if (c_.factor.diffusive) chi_ = default_chi_grid(c_.factor, c_.model, c_.numerics.chi_step, c_.numerics.chi_sds);
    }

    const GridPtr& grid() const { return grid_; }

    PathBundle bundle(std::uint64_t seed, const GridPtr& g = nullptr) const {
        return simulate_bundle(c_.factor, c_.model, g ? g : grid_, seed);
    }

    const LimitCoefficients& limit(std::ostream& log) {
        if (limit_) return *limit_;
        const auto key = key_for("limit", c_.model);
        const auto file = cache_path(key);
        if (auto hit = load_limit_cache(file, key)) {
            log << "limit coefficients: cache hit " << file.filename().string() << '\n';
            limit_ = std::move(*hit);
        } else {
            if (c_.factor.diffusive) {
                limit_ = solve_B0_pde(c_.factor, c_.model, chi_, grid_, c_.numerics.solver);
            } else {
                const auto b = bundle(0);
                limit_ = solve_B0_deterministic(b.rho, b.lambda, c_.model, c_.numerics.solver);
            }
            fs::create_directories(file.parent_path());
            save_limit_cache(file, key, *limit_);
        }
        return *limit_;
    }

    PreLimitCoefficients prelimit(const ModelParams& p, std::ostream& log) {
        const auto key = key_for("prelimit", p);
        const auto file = cache_path(key);
        if (auto hit = load_prelimit_cache(file, key)) {
            log << "eta=" << p.eta << " N=" << p.N << ": cache hit " << file.filename().string() << '\n';
            return std::move(*hit);
        }
        PreLimitCoefficients out;
        if (c_.factor.diffusive) {
            out = solve_prelimit_pde(c_.factor, p, chi_, grid_, c_.numerics.solver);
        } else {
            const auto b = bundle(0);
            out = solve_prelimit_deterministic(b.rho, b.lambda, p, c_.numerics.solver);
        }
        fs::create_directories(file.parent_path());
        save_prelimit_cache(file, key, out);
        return out;
    }

    FileStamp stamp(std::optional<std::uint64_t> seed = std::nullopt) const { return {c_.config_hash, seed}; }

private:
    std::uint64_t key_for(const char* kind, const ModelParams& p) const {
        nlohmann::json k;
        k["kind"] = kind;
        k["family"] = c_.family;
        k["factor"] = c_.factor_spec;
        k["model"] = {p.gamma, p.T, p.x0, p.eta, num_or_string(p.N), p.rho_lo, p.rho_hi, p.lambda_hi};
        k["grid"] = {c_.numerics.steps, c_.numerics.refined};
        k["chi"] = {c_.numerics.chi_step, c_.numerics.chi_sds};
        const auto& s = c_.numerics.solver;
        k["solver"] = {s.delta0, s.newton_tol, s.max_newton, s.ode_tol, s.rel_step, s.layer_step, s.layer_zone};
        return fnv1a(k.dump());
    }

    fs::path cache_path(std::uint64_t key) const { return c_.run.out / "cache" / (hex_hash(key) + ".bin"); }

    const ExperimentConfig& c_;
    GridPtr grid_;
    std::vector<double> chi_;
    std::optional<LimitCoefficients> limit_;
};

std::string tag(double eta, const PenaltySpec& N) { return "eta" + fmt(eta) + "_N" + N.label(); }

}  // namespace

void cmd_solve_coefficients(const ExperimentConfig& c, std::ostream& log) {
    Session s(c);
    const auto& limit = s.limit(log);
    {
        auto os = open_file(c.run.out / "coeffs_limit.csv");
        write_limit_coefficients_csv(os, limit, s.stamp(), c.run.coeff_stride);
    }
    const double tol_limit = c.factor.diffusive ? c.numerics.solver.bound_tol_pde : c.numerics.solver.bound_tol_ode;
    const auto lb = check_limit_bounds(limit, c.model, tol_limit);
    log << "limit: max bound violation " << lb.max_violation << " over " << lb.nodes_checked << " nodes\n";
    nlohmann::json summary;
    stamp_json(summary, s.stamp());
    summary["limit"] = {{"max_violation", lb.max_violation}, {"nodes", lb.nodes_checked}};
    summary["prelimit"] = nlohmann::json::array();
    for (double eta : c.run.etas)
        for (const auto& N : c.run.penalties) {
            const auto p = c.at(eta, N);
            const auto co = s.prelimit(p, log);
            auto os = open_file(c.run.out / ("coeffs_" + tag(eta, N) + ".csv"));
            write_prelimit_csv(os, co, s.stamp(), c.run.coeff_stride);
            const auto br = check_prelimit_bounds(co, p, tol_limit);
            log << "eta=" << eta << " N=" << N.label() << " (" << p.N << "): max bound violation "
                << br.max_violation << " over " << br.nodes_checked << " nodes\n";
            if (!br.ok()) throw NumericFault("coefficient bounds violated: " + br.worst);
            summary["prelimit"].push_back({{"eta", eta},
                                           {"N", num_or_string(p.N)},
                                           {"max_violation", br.max_violation},
                                           {"nodes", br.nodes_checked}});
        }
    write_json(c.run.out / "coefficients_summary.json", summary);
}

void cmd_simulate(const ExperimentConfig& c, std::ostream& log) {
    Session s(c);
    const auto& limit = s.limit(log);
    std::vector<std::pair<ModelParams, PreLimitCoefficients>> runs;
    std::vector<std::string> tags;
    for (double eta : c.run.etas)
        for (const auto& N : c.run.penalties) {
            const auto p = c.at(eta, N);
            runs.emplace_back(p, s.prelimit(p, log));
            tags.push_back(tag(eta, N));
        }
    const auto& seeds = c.run.seeds;
    std::vector<nlohmann::json> reports(seeds.size());
    parallel_for(
        seeds.size(),
        [&](std::size_t k) {
            const auto seed = seeds[k];
            const auto stamp = s.stamp(seed);
            const auto b = s.bundle(seed);
            {
                auto os = open_file(c.run.out / ("paths_seed" + std::to_string(seed) + ".csv"));
                write_stamp(os, stamp);
                write_bundle_csv(os, b);
            }
            const auto st0 = build_limit_state(limit, b, c.model);
            const auto th = decompose_limit_strategy(st0, b, c.model);
            {
                auto os = open_file(c.run.out / ("limit_seed" + std::to_string(seed) + ".csv"));
                write_limit_state_csv(os, st0, th, stamp);
                auto j = jumps_json(th);
                stamp_json(j, stamp);
                write_json(c.run.out / ("limit_seed" + std::to_string(seed) + "_jumps.json"), j);
            }
            nlohmann::json rep;
            rep["seed"] = seed;
            rep["limit"] = {{"initial_block", st0.initial_block},
                            {"terminal_block", st0.terminal_block},
                            {"clamped", st0.clamped}};
            rep["states"] = nlohmann::json::array();
            for (std::size_t r = 0; r < runs.size(); ++r) {
                const auto& [p, co] = runs[r];
                PreLimitState st;
                try {
                    st = integrate_state(co, b, p);
                } catch (const NumericFault& e) {
                    std::ostringstream os;
                    os << "seed " << seed << ", " << tags[r] << ": " << e.what();
                    throw NumericFault(os.str(), e.time());
                }
                auto os = open_file(c.run.out / ("state_seed" + std::to_string(seed) + "_" + tags[r] + ".csv"));
                write_state_csv(os, st, stamp);
                double zdrop = 0.0;
                for (std::size_t i = 1; i < st.Zhat.size(); ++i) zdrop = std::max(zdrop, st.Zhat[i] - st.Zhat[i - 1]);
                rep["states"].push_back({{"run", tags[r]},
                                         {"eta", p.eta},
                                         {"N", num_or_string(p.N)},
                                         {"liquidation_gap", liquidation_gap(st)},
                                         {"max_Z_increase", zdrop},
                                         {"clamped", st.clamped},
                                         {"invariants", "ok"}});
            }
            reports[k] = std::move(rep);
        },
        c.run.threads);
    nlohmann::json all;
    stamp_json(all, s.stamp());
    all["paths"] = reports;
    write_json(c.run.out / "simulate_report.json", all);
    log << "simulated " << seeds.size() << " path(s) for " << runs.size() << " (eta, N) pair(s)\n";
}

void cmd_study(const ExperimentConfig& c, std::ostream& log) {
    for (const auto& N : c.run.penalties) {
        StudyOptions o;
        o.steps = c.numerics.steps;
        o.chi_step = c.numerics.chi_step;
        o.chi_sds = c.numerics.chi_sds;
        o.resolution = c.numerics.hausdorff_r;
        o.threads = c.run.threads;
        o.solver = c.numerics.solver;
        o.eps_values = {c.numerics.eps};
        ModelParams p = c.model;
        o.penalize_min = N.minimal;
        if (!N.minimal) p.N = N.value;
        auto etas = c.run.etas;
        std::sort(etas.begin(), etas.end(), std::greater<>());
        const auto rep = convergence_study(p, c.factor, etas, c.run.seeds, c.numerics.eps, o);

        nlohmann::json j;
        stamp_json(j, {c.config_hash, std::nullopt});
        j["seeds"] = rep.seeds;
        j["eps"] = rep.eps;
        j["N"] = N.label();
        j["eta_values"] = rep.eta_values;
        std::vector<nlohmann::json> Ns;
        for (double v : rep.N_values) Ns.push_back(num_or_string(v));
        j["N_values"] = Ns;
        j["sup_distances"] = {{"b", rep.sup_b}, {"d", rep.sup_d}, {"e", rep.sup_e}, {"f", rep.sup_f}, {"g", rep.sup_g}};
        j["state_distances"] = {{"mean", rep.state_mean}, {"max", rep.state_max}, {"per_path", rep.state_distance}};
        j["hausdorff"] = {{"mean", rep.hausdorff_mean}, {"max", rep.hausdorff_max}, {"per_path", rep.hausdorff}};
        j["fraction_within"] = {{"eps", rep.eps_values}, {"values", rep.fraction_within}};
        j["band_fraction"] = rep.band_fraction;
        j["gap_mean"] = rep.gap_mean;
        j["clamped"] = rep.clamped;
        write_json(c.run.out / ("study_N" + N.label() + ".json"), j);

        auto os = open_file(c.run.out / ("study_N" + N.label() + ".csv"));
        write_stamp(os, {c.config_hash, std::nullopt});
        os << "eta,N,sup_b,sup_d,sup_e,sup_f,sup_g,state_mean,state_max,hausdorff_mean,hausdorff_max,fraction_within,"
              "band_fraction,gap_mean\n"
           << std::setprecision(17);
        for (std::size_t k = 0; k < rep.eta_values.size(); ++k)
            os << rep.eta_values[k] << ',' << rep.N_values[k] << ',' << rep.sup_b[k] << ',' << rep.sup_d[k] << ','
               << rep.sup_e[k] << ',' << rep.sup_f[k] << ',' << rep.sup_g[k] << ',' << rep.state_mean[k] << ','
               << rep.state_max[k] << ',' << rep.hausdorff_mean[k] << ',' << rep.hausdorff_max[k] << ','
               << rep.fraction_within[k][0] << ',' << rep.band_fraction[k] << ',' << rep.gap_mean[k] << '\n';
        log << "study N=" << N.label() << ": hausdorff mean";
        for (double h : rep.hausdorff_mean) log << ' ' << h;
        log << '\n';
    }
}

namespace {

nlohmann::json breakdown_json(const CostBreakdown& b) {
    return {{"instantaneous", b.instantaneous}, {"transient", b.transient}, {"risk", b.risk},
            {"penalty", b.penalty},             {"block0", b.block0},       {"qv", b.qv},
            {"total", b.total},                 {"stderr", b.std_error},    {"paths", b.paths}};
}

}  // namespace

void cmd_cost(const ExperimentConfig& c, const std::string& strategy, std::ostream& log) {
    Session s(c);
    const auto& p = c.model;
    nlohmann::json rep;
    stamp_json(rep, s.stamp());
    rep["seeds"] = c.run.seeds;
    rep["strategy"] = strategy;

    std::optional<SemimartingaleStrategy> fixed;
    GridPtr grid = s.grid();
    if (strategy != "theta-hat" && strategy != "block" && strategy != "linear" && strategy != "mollified") {
        fixed = read_strategy(strategy, p.x0);
        grid = fixed->V.grid;
    }
    std::vector<PathBundle> bundles(c.run.seeds.size());
    parallel_for(
        bundles.size(), [&](std::size_t k) { bundles[k] = s.bundle(c.run.seeds[k], grid); }, c.run.threads);

    const LimitCoefficients* limit = fixed ? nullptr : &s.limit(log);
    SemimartingalePolicy theta_hat = [&](const PathBundle& b) {
        return decompose_limit_strategy(build_limit_state(*limit, b, p), b, p);
    };
    SemimartingalePolicy policy;
    if (fixed) {
        policy = [&](const PathBundle&) { return *fixed; };
    } else if (strategy == "theta-hat" || strategy == "mollified") {
        policy = theta_hat;
    } else if (strategy == "block") {
        policy = [&](const PathBundle& b) {
            return SemimartingaleStrategy{p.x0, {}, {{0.0, p.x0}}, SampledPath(b.grid(), 0.0), true};
        };
    } else {
        policy = [&](const PathBundle& b) {
            std::vector<double> v(b.grid()->size());
            for (std::size_t i = 0; i < v.size(); ++i) v[i] = -p.x0 * (*b.grid())[i] / p.T;
            v.back() = -p.x0;
            return SemimartingaleStrategy{p.x0, {}, {}, SampledPath(b.grid(), std::move(v)), true};
        };
    }

    const auto per_path = cost_semimartingale_paths(policy, bundles, p, c.run.threads);
    const auto cost = aggregate(per_path);
    rep["J0"] = breakdown_json(cost);
    log << "J0(" << (strategy == "mollified" ? "theta-hat" : strategy) << ") = " << cost.total << " +/- "
        << cost.std_error << '\n';

    if (!fixed && strategy != "theta-hat" && strategy != "mollified") {
        const auto ref = cost_semimartingale_paths(theta_hat, bundles, p, c.run.threads);
        const auto d = paired_cost_difference(per_path, ref);
        rep["minus_theta_hat"] = {{"mean", d.mean}, {"stderr", d.std_error}};
    }

    if (strategy == "mollified") {
        const auto& m = c.run.mollifier;
        const std::size_t n = bundles.size();
        std::vector<CostBreakdown> smooth(n);
        std::vector<double> dist(n), mass(n), gap(n);
        std::vector<std::vector<CostBreakdown>> eta_costs(c.run.etas.size(), std::vector<CostBreakdown>(n));
        parallel_for(
            n,
            [&](std::size_t k) {
                const auto& b = bundles[k];
                const auto th = theta_hat(b);
                const auto xi = mollify(th, m.beta, m.nu, m.eps);
                auto V = integrate_rate(xi);
                V[V.size() - 1] = -p.x0;
                smooth[k] = path_cost_semimartingale(SemimartingaleStrategy{p.x0, {}, {}, V, true}, b, p);
                const auto X = inventory(th);
                dist[k] = l2_distance_sq(X, inventory(xi, p.x0));
                mass[k] = l2_distance_sq(X, RcllPath(SampledPath(b.grid(), 0.0)));
                gap[k] = per_path[k].total - smooth[k].total;
                for (std::size_t e = 0; e < c.run.etas.size(); ++e) {
                    ModelParams pe = p;
                    pe.eta = c.run.etas[e];
                    pe.N = kInfinity;
                    eta_costs[e][k] = path_cost_eta(xi, b, pe);
                }
            },
            c.run.threads);
        const auto sm = aggregate(smooth);
        const double d = estimate(dist).mean, M = estimate(mass).mean;
        const double diff = std::abs(estimate(gap).mean);
        const double bound = cost_estimate_bound(d, M, p);
        rep["mollifier"] = {{"beta", m.beta}, {"nu", m.nu}, {"eps", m.eps}};
        rep["J0_theta_hat"] = rep["J0"];
        rep["J0"] = breakdown_json(sm);
        const auto dd = paired_cost_difference(smooth, per_path);
        rep["minus_theta_hat"] = {{"mean", dd.mean}, {"stderr", dd.std_error}};
        rep["envelope"] = {{"l2_distance_sq", d},
                           {"l2_norm_sq", M},
                           {"cost_gap", diff},
                           {"bound", bound},
                           {"within", diff <= bound}};
        rep["J_eta"] = nlohmann::json::array();
        for (std::size_t e = 0; e < c.run.etas.size(); ++e)
            rep["J_eta"].push_back({{"eta", c.run.etas[e]}, {"cost", breakdown_json(aggregate(eta_costs[e]))}});
        log << "J0(mollified) = " << sm.total << " +/- " << sm.std_error << '\n';
        log << "mollified: |J0 gap| = " << diff << ", envelope " << bound << '\n';
    }
    write_json(c.run.out / "cost.json", rep);
}

ExperimentConfig fig1_config() {
    return parse_config(nlohmann::json{{"model", {{"gamma", 3.0}, {"T", 1.0}, {"x0", 1.0}}},
                                       {"factor", {{"family", "fig1-sine"}}},
                                       {"run", {{"etas", {1e-1, 1e-2, 1e-3}}, {"seeds", {0}}}}});
}

void cmd_reproduce_fig1(const ExperimentConfig& c, std::ostream& log) {
    Session s(c);
    const auto& limit = s.limit(log);
    const auto seed = c.run.seeds.front();
    const auto b = s.bundle(seed);
    const auto st0 = build_limit_state(limit, b, c.model);
    std::vector<PreLimitState> states;
    const auto& N = c.run.penalties.front();
    for (double eta : c.run.etas) {
        const auto p = c.at(eta, N);
        states.push_back(integrate_state(s.prelimit(p, log), b, p));
    }

    auto os = open_file(c.run.out / "fig1.csv");
    write_stamp(os, s.stamp(seed));
    os << 't';
    for (double eta : c.run.etas) os << ",X_eta" << fmt(eta);
    os << ",X_limit\n" << std::setprecision(17);
    for (std::size_t i = 0; i < b.grid()->size(); ++i) {
        auto row = [&](double x0) {
            os << (*b.grid())[i];
            for (const auto& st : states) os << ',' << st.Xhat[i];
            os << ',' << x0 << '\n';
        };
        if (st0.Xhat0.jumps_at(i)) row(st0.Xhat0.left[i]);
        row(st0.Xhat0.right[i]);
    }
    log << "fig1: seed " << seed << ", initial block " << st0.initial_block << ", terminal block "
        << st0.terminal_block << '\n';
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Optimal liquidation with small instantaneous impact"};
    app.require_subcommand(1);
    std::string config_path, out_dir, seeds, strategy = "";
    int threads = -1;
    auto add_common = [&](CLI::App* sub, bool need_config) {
        auto* opt = sub->add_option("--config", config_path, "JSON configuration file");
        if (need_config) opt->required();
        sub->add_option("--out", out_dir, "output directory (overrides run.out)");
        sub->add_option("--seeds", seeds, "seed range a..b (overrides run.seeds)");
        sub->add_option("--threads", threads, "worker threads, 0 = hardware concurrency")->check(CLI::NonNegativeNumber);
    };
    auto* solve = app.add_subcommand("solve-coefficients", "solve and export the coefficient fields");
    auto* simulate = app.add_subcommand("simulate", "simulate factor paths and optimal states");
    auto* study = app.add_subcommand("study", "eta sweep: coefficient, state and graph distances");
    auto* cost = app.add_subcommand("cost", "Monte Carlo cost of a strategy");
    auto* fig1 = app.add_subcommand("reproduce-fig1", "fig1 plot data: X for every eta and the limit");
    for (auto* sub : {solve, simulate, study, cost}) add_common(sub, true);
    add_common(fig1, false);
    cost->add_option("--strategy", strategy, "theta-hat | block | linear | mollified | strategy JSON file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 3;
    }

    try {
        ExperimentConfig c = config_path.empty() ? fig1_config() : load_config(config_path);
        if (!out_dir.empty()) c.run.out = out_dir;
        if (!seeds.empty()) c.run.seeds = parse_seed_range(seeds);
        if (threads >= 0) c.run.threads = static_cast<unsigned>(threads);
        check_config(c);
        if (*solve) cmd_solve_coefficients(c, out);
        if (*simulate) cmd_simulate(c, out);
        if (*study) cmd_study(c, out);
        if (*cost) cmd_cost(c, strategy.empty() ? c.run.strategy : strategy, out);
        if (*fig1) cmd_reproduce_fig1(c, out);
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << '\n';
        return 3;
    } catch (const NumericFault& e) {
        err << "numeric fault: " << e.what();
        if (e.time()) err << " (t = " << *e.time() << ")";
        err << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        err << "invalid input: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace smallimpact
