#include "smallimpact/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "smallimpact/errors.hpp"
#include "smallimpact/io.hpp"

namespace smallimpact {

double PenaltySpec::resolve(const ModelParams& params) const { return minimal ? min_penalization(params) : value; }

std::string PenaltySpec::label() const {
    if (minimal) return "min";
    if (value == kInfinity) return "inf";
    std::ostringstream os;
    os << value;
    return os.str();
}

GridPtr NumericsConfig::grid(double T) const {
    return make_grid(refined ? TimeGrid::refined(T, steps) : TimeGrid::uniform(T, steps));
}

ModelParams ExperimentConfig::at(double eta, const PenaltySpec& N) const {
    ModelParams p = model;
    p.eta = eta;
    p.N = kInfinity;
    p.N = N.resolve(p);
    return p;
}

namespace {

void only_keys(const nlohmann::json& j, const char* section, std::initializer_list<const char*> keys) {
    if (!j.is_object()) throw ConfigError(std::string("section '") + section + "' must be an object");
    for (const auto& [k, v] : j.items()) {
        bool known = false;
        for (const char* key : keys) known = known || k == key;
        if (!known) throw ConfigError(std::string("unknown key '") + k + "' in section '" + section + "'");
    }
}

double num(const nlohmann::json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) throw ConfigError(std::string("'") + key + "' must be a number");
    return j.at(key).get<double>();
}

bool nonnegative_integer(const nlohmann::json& v) {
    return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

std::size_t count(const nlohmann::json& j, const char* key, std::size_t fallback) {
    if (!j.contains(key)) return fallback;
    if (!nonnegative_integer(j.at(key))) throw ConfigError(std::string("'") + key + "' must be a nonnegative integer");
    return j.at(key).get<std::size_t>();
}

PenaltySpec penalty(const nlohmann::json& v) {
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf") return {};
        if (s == "min") return {true, kInfinity};
        throw ConfigError("N entries must be numbers, \"inf\" or \"min\"");
    }
    if (!v.is_number()) throw ConfigError("N entries must be numbers, \"inf\" or \"min\"");
    return {false, v.get<double>()};
}

}  // namespace

std::vector<std::uint64_t> parse_seed_range(const std::string& s) {
    const auto dots = s.find("..");
    auto parse = [&](const std::string& x) {
        std::size_t used = 0;
        unsigned long long v = 0;
        try {
            v = std::stoull(x, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != x.size() || x.find('-') != std::string::npos)
            throw ConfigError("malformed seed range '" + s + "'");
        return static_cast<std::uint64_t>(v);
    };
    if (dots == std::string::npos) return {parse(s)};
    const auto a = parse(s.substr(0, dots)), b = parse(s.substr(dots + 2));
    if (b < a) throw ConfigError("seed range '" + s + "' is empty");
    if (b - a > 10'000'000) throw ConfigError("seed range '" + s + "' is too large");
    std::vector<std::uint64_t> out;
    for (auto k = a; k <= b; ++k) out.push_back(k);
    return out;
}

void check_config(const ExperimentConfig& c) {
    if (c.run.etas.empty()) throw ConfigError("run.etas must not be empty");
    for (double e : c.run.etas)
        if (!(e > 0.0) || !std::isfinite(e)) throw ConfigError("run.etas must be positive");
    if (c.run.seeds.empty()) throw ConfigError("run.seeds must not be empty");
    if (std::set<std::uint64_t>(c.run.seeds.begin(), c.run.seeds.end()).size() != c.run.seeds.size())
        throw ConfigError("run.seeds must be distinct");
    if (c.run.penalties.empty()) throw ConfigError("run.N must not be empty");
    if (c.numerics.steps < 16) throw ConfigError("numerics.steps must be at least 16");
    if (!(c.numerics.eps > 0.0 && c.numerics.eps < 0.5 * c.model.T)) throw ConfigError("numerics.eps must lie in (0, T/2)");
    if (!(c.numerics.chi_step > 0.0)) throw ConfigError("numerics.chi_step must be positive");
    const auto& m = c.run.mollifier;
    if (!(m.beta > 0.0 && m.nu > 0.0 && m.eps > 0.0 && m.eps < 0.5 * c.model.T))
        throw ConfigError("run.mollifier needs beta, nu > 0 and 0 < eps < T/2");

    auto check = [&](const ModelParams& p) {
        const auto r = validate(p, c.factor);
        if (!r.ok()) {
            std::string msg = "invalid configuration:";
            for (const auto& v : r.violations) msg += "\n  " + v;
            throw ConfigError(msg);
        }
    };
    check(c.model);
    for (double eta : c.run.etas)
        for (const auto& N : c.run.penalties) check(c.at(eta, N));
}

ExperimentConfig parse_config(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
    only_keys(j, "top level", {"model", "factor", "numerics", "run"});
    ExperimentConfig c;
    c.config_hash = hex_hash(fnv1a(j.dump()));

    const auto model = j.value("model", nlohmann::json::object());
    only_keys(model, "model", {"gamma", "T", "x0"});
    c.model.gamma = num(model, "gamma", 1.0);
    c.model.T = num(model, "T", 1.0);
    c.model.x0 = num(model, "x0", 1.0);

    if (!j.contains("factor") || !j.at("factor").is_object()) throw ConfigError("missing 'factor' section");
    c.factor_spec = j.at("factor");
    if (!c.factor_spec.contains("family") || !c.factor_spec.at("family").is_string())
        throw ConfigError("factor.family must be a string");
    c.family = c.factor_spec.at("family").get<std::string>();
    c.factor_spec.erase("family");
    if (c.family == "constant")
        only_keys(c.factor_spec, "factor", {"rho", "lambda", "chi0"});
    else if (c.family == "lambda-equals-C-rho")
        only_keys(c.factor_spec, "factor", {"rho", "C", "rho_amp", "rho_freq", "chi0"});
    else if (c.family == "fig1-sine")
        only_keys(c.factor_spec, "factor", {"lambda", "amp", "freq", "chi0"});
    c.factor = make_factor(c.family, c.factor_spec);
    apply_family_bounds(c.family, c.factor_spec, c.model);

    const auto num_sec = j.value("numerics", nlohmann::json::object());
    only_keys(num_sec, "numerics",
              {"steps", "refined", "chi_step", "chi_sds", "hausdorff_r", "eps", "delta0", "newton_tol", "max_newton",
               "ode_tol"});
    auto& n = c.numerics;
    n.steps = count(num_sec, "steps", n.steps);
    if (num_sec.contains("refined")) {
        if (!num_sec.at("refined").is_boolean()) throw ConfigError("'refined' must be a boolean");
        n.refined = num_sec.at("refined").get<bool>();
    }
    n.chi_step = num(num_sec, "chi_step", n.chi_step);
    n.chi_sds = num(num_sec, "chi_sds", n.chi_sds);
    n.hausdorff_r = num(num_sec, "hausdorff_r", n.hausdorff_r);
    n.eps = num(num_sec, "eps", n.eps);
    n.solver.delta0 = num(num_sec, "delta0", n.solver.delta0);
    n.solver.newton_tol = num(num_sec, "newton_tol", n.solver.newton_tol);
    n.solver.max_newton = static_cast<int>(count(num_sec, "max_newton", n.solver.max_newton));
    n.solver.ode_tol = num(num_sec, "ode_tol", n.solver.ode_tol);

    const auto run = j.value("run", nlohmann::json::object());
    only_keys(run, "run", {"etas", "seeds", "N", "out", "threads", "strategy", "coeff_stride", "mollifier"});
    auto& r = c.run;
    if (run.contains("etas")) {
        if (!run.at("etas").is_array()) throw ConfigError("run.etas must be an array");
        r.etas.clear();
        for (const auto& e : run.at("etas")) {
            if (!e.is_number()) throw ConfigError("run.etas entries must be numbers");
            r.etas.push_back(e.get<double>());
        }
    }
    if (run.contains("seeds")) {
        const auto& s = run.at("seeds");
        if (s.is_string()) {
            r.seeds = parse_seed_range(s.get<std::string>());
        } else if (s.is_array()) {
            r.seeds.clear();
            for (const auto& e : s) {
                if (!nonnegative_integer(e)) throw ConfigError("run.seeds entries must be nonnegative integers");
                r.seeds.push_back(e.get<std::uint64_t>());
            }
        } else {
            throw ConfigError("run.seeds must be a list or \"a..b\"");
        }
    }
    if (run.contains("N")) {
        const auto& s = run.at("N");
        r.penalties.clear();
        if (s.is_array()) {
            for (const auto& e : s) r.penalties.push_back(penalty(e));
        } else {
            r.penalties.push_back(penalty(s));
        }
    }
    if (run.contains("out")) {
        if (!run.at("out").is_string()) throw ConfigError("run.out must be a string");
        r.out = run.at("out").get<std::string>();
    }
    r.threads = static_cast<unsigned>(count(run, "threads", r.threads));
    r.coeff_stride = count(run, "coeff_stride", r.coeff_stride);
    if (r.coeff_stride == 0) throw ConfigError("run.coeff_stride must be positive");
    if (run.contains("strategy")) {
        if (!run.at("strategy").is_string()) throw ConfigError("run.strategy must be a string");
        r.strategy = run.at("strategy").get<std::string>();
    }
    if (run.contains("mollifier")) {
        const auto& m = run.at("mollifier");
        only_keys(m, "run.mollifier", {"beta", "nu", "eps"});
        r.mollifier.beta = num(m, "beta", r.mollifier.beta);
        r.mollifier.nu = num(m, "nu", r.mollifier.nu);
        r.mollifier.eps = num(m, "eps", r.mollifier.eps);
    }
    check_config(c);
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& file) {
    std::ifstream is(file);
    if (!is) throw ConfigError("cannot open configuration " + file.string());
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("configuration " + file.string() + ": " + e.what());
    }
    return parse_config(j);
}

}  // namespace smallimpact
