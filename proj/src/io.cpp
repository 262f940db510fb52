#include "smallimpact/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "smallimpact/errors.hpp"

namespace smallimpact {

std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex_hash(std::uint64_t h) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

void write_stamp(std::ostream& os, const FileStamp& stamp) {
    os << "# config_hash=" << stamp.config_hash;
    if (stamp.seed) os << " seed=" << *stamp.seed;
    os << '\n';
}

void stamp_json(nlohmann::json& j, const FileStamp& stamp) {
    j["config_hash"] = stamp.config_hash;
    if (stamp.seed) j["seed"] = *stamp.seed;
}

namespace {

void write_fields(std::ostream& os, const CoefficientField& a, const CoefficientField& b, const CoefficientField& c,
                  const char* header, std::size_t stride) {
    os << header << '\n';
    os << std::setprecision(17);
    const auto& g = *a.grid();
    const auto chi = a.chi_grid();
    const std::size_t k = a.spatial() ? std::max<std::size_t>(stride, 1) : 1;
    auto keep = [k](std::size_t i, std::size_t n) { return i % k == 0 || i + 1 == n; };
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!keep(i, g.size())) continue;
        for (std::size_t j = 0; j < a.width(); ++j) {
            if (!keep(j, a.width())) continue;
            os << g[i] << ',';
            if (a.spatial())
                os << chi[j];
            else
                os << "nan";
            os << ',' << a.node(i, j) << ',' << b.node(i, j) << ',' << c.node(i, j) << '\n';
        }
    }
}

}  // namespace

void write_prelimit_csv(std::ostream& os, const PreLimitCoefficients& c, const FileStamp& stamp, std::size_t stride) {
    write_stamp(os, stamp);
    write_fields(os, c.B, c.D, c.E, "t,chi,B,D,E", stride);
}

void write_limit_coefficients_csv(std::ostream& os, const LimitCoefficients& c, const FileStamp& stamp,
                                  std::size_t stride) {
    write_stamp(os, stamp);
    write_fields(os, c.B0, c.D0, c.E0, "t,chi,B0,D0,E0", stride);
}

void write_limit_state_csv(std::ostream& os, const LimitState& st, const LimitStrategy& theta,
                           const FileStamp& stamp) {
    write_stamp(os, stamp);
    os << "t,Xhat0,Yhat0,Zhat0,Vhat\n" << std::setprecision(17);
    const std::size_t n = st.Zhat0.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double t = st.Zhat0.t(i);
        if (st.Xhat0.jumps_at(i) || st.Yhat0.jumps_at(i))
            os << t << ',' << st.Xhat0.left[i] << ',' << st.Yhat0.left[i] << ',' << st.Zhat0[i] << ','
               << theta.V[i] << '\n';
        os << t << ',' << st.Xhat0.right[i] << ',' << st.Yhat0.right[i] << ',' << st.Zhat0[i] << ',' << theta.V[i]
           << '\n';
    }
}

nlohmann::json jumps_json(const SemimartingaleStrategy& theta) {
    nlohmann::json j;
    j["x0"] = theta.x0;
    j["j_plus"] = nlohmann::json::array();
    j["j_minus"] = nlohmann::json::array();
    for (const auto& x : theta.j_plus) j["j_plus"].push_back({x.t, x.size});
    for (const auto& x : theta.j_minus) j["j_minus"].push_back({x.t, x.size});
    j["liquidating"] = theta.liquidating;
    return j;
}

void write_state_csv(std::ostream& os, const PreLimitState& st, const FileStamp& stamp) {
    write_stamp(os, stamp);
    os << "t,Xhat,Yhat,Zhat\n" << std::setprecision(17);
    for (std::size_t i = 0; i < st.Xhat.size(); ++i)
        os << st.Xhat.t(i) << ',' << st.Xhat[i] << ',' << st.Yhat[i] << ',' << st.Zhat[i] << '\n';
}

namespace {

constexpr char kMagic[8] = {'S', 'I', 'C', 'A', 'C', 'H', 'E', '1'};

template <class T>
void put(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
bool get(std::istream& is, T& v) {
    return static_cast<bool>(is.read(reinterpret_cast<char*>(&v), sizeof(T)));
}

void put_vec(std::ostream& os, std::span<const double> v) {
    put<std::uint64_t>(os, v.size());
    os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
}

bool get_vec(std::istream& is, std::vector<double>& v) {
    std::uint64_t n = 0;
    if (!get(is, n) || n > (1ULL << 34)) return false;
    v.resize(n);
    return static_cast<bool>(is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double))));
}

void put_fields(std::ostream& os, std::initializer_list<const CoefficientField*> fs) {
    const auto& f0 = **fs.begin();
    put_vec(os, f0.grid()->nodes());
    put_vec(os, f0.chi_grid());
    for (const auto* f : fs) put_vec(os, f->values());
}

bool get_fields(std::istream& is, std::size_t count, std::vector<CoefficientField>& out) {
    std::vector<double> t, chi;
    if (!get_vec(is, t) || !get_vec(is, chi)) return false;
    try {
        auto g = make_grid(TimeGrid(std::move(t)));
        for (std::size_t k = 0; k < count; ++k) {
            std::vector<double> v;
            if (!get_vec(is, v)) return false;
            out.push_back(chi.empty() ? CoefficientField(g, std::move(v)) : CoefficientField(g, chi, std::move(v)));
        }
    } catch (const std::invalid_argument&) {
        return false;
    }
    return true;
}

std::ofstream open_out(const std::filesystem::path& file) {
    std::ofstream os(file, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + file.string());
    os.write(kMagic, sizeof kMagic);
    return os;
}

bool open_in(std::ifstream& is, std::uint64_t key, char kind) {
    char magic[sizeof kMagic];
    std::uint64_t stored = 0;
    char k = 0;
    if (!is.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) return false;
    return get(is, stored) && stored == key && get(is, k) && k == kind;
}

}  // namespace

void save_prelimit_cache(const std::filesystem::path& file, std::uint64_t key, const PreLimitCoefficients& c) {
    auto os = open_out(file);
    put(os, key);
    put(os, 'P');
    put(os, c.eta);
    put(os, c.N);
    put(os, c.gamma);
    put(os, c.delta);
    put_fields(os, {&c.B, &c.D, &c.E});
}

std::optional<PreLimitCoefficients> load_prelimit_cache(const std::filesystem::path& file, std::uint64_t key) {
    std::ifstream is(file, std::ios::binary);
    if (!is || !open_in(is, key, 'P')) return std::nullopt;
    PreLimitCoefficients c;
    std::vector<CoefficientField> f;
    if (!get(is, c.eta) || !get(is, c.N) || !get(is, c.gamma) || !get(is, c.delta) || !get_fields(is, 3, f))
        return std::nullopt;
    c.B = std::move(f[0]);
    c.D = std::move(f[1]);
    c.E = std::move(f[2]);
    return c;
}

void save_limit_cache(const std::filesystem::path& file, std::uint64_t key, const LimitCoefficients& c) {
    auto os = open_out(file);
    put(os, key);
    put(os, 'L');
    put_fields(os, {&c.B0, &c.D0, &c.E0});
}

std::optional<LimitCoefficients> load_limit_cache(const std::filesystem::path& file, std::uint64_t key) {
    std::ifstream is(file, std::ios::binary);
    if (!is || !open_in(is, key, 'L')) return std::nullopt;
    std::vector<CoefficientField> f;
    if (!get_fields(is, 3, f)) return std::nullopt;
    return LimitCoefficients{std::move(f[0]), std::move(f[1]), std::move(f[2])};
}

namespace {

JumpList read_jumps(const nlohmann::json& j, const char* key) {
    JumpList out;
    if (!j.contains(key)) return out;
    const auto& a = j.at(key);
    if (!a.is_array()) throw ConfigError(std::string("strategy: '") + key + "' must be an array of [t, size]");
    for (const auto& e : a) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
            throw ConfigError(std::string("strategy: entries of '") + key + "' must be [t, size]");
        out.push_back({e[0].get<double>(), e[1].get<double>()});
    }
    return out;
}

}  // namespace

SemimartingaleStrategy read_strategy(const std::filesystem::path& file, double x0) {
    std::ifstream is(file);
    if (!is) throw ConfigError("cannot open strategy file " + file.string());
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("strategy file " + file.string() + ": " + e.what());
    }
    if (!j.contains("V") || !j.at("V").is_string()) throw ConfigError("strategy: 'V' must name a CSV file");
    const auto csv = file.parent_path() / j.at("V").get<std::string>();
    std::ifstream vs(csv);
    if (!vs) throw ConfigError("cannot open " + csv.string());
    std::vector<double> t, v;
    std::string line;
    bool header = false;
    while (std::getline(vs, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            header = true;
            if (line.rfind("t,V", 0) != 0) throw ConfigError(csv.string() + ": expected header t,V");
            continue;
        }
        std::istringstream ls(line);
        double a = 0.0, b = 0.0;
        char comma = 0;
        if (!(ls >> a >> comma >> b) || comma != ',') throw ConfigError(csv.string() + ": malformed row '" + line + "'");
        t.push_back(a);
        v.push_back(b);
    }
    SemimartingaleStrategy th;
    try {
        auto g = make_grid(TimeGrid(std::move(t)));
        th.V = SampledPath(g, std::move(v));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(csv.string() + ": " + e.what());
    }
    th.x0 = x0;
    th.j_plus = read_jumps(j, "j_plus");
    th.j_minus = read_jumps(j, "j_minus");
    th.liquidating = j.value("liquidating", true);
    try {
        (void)inventory(th);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("strategy " + file.string() + ": " + e.what());
    }
    return th;
}

}  // namespace smallimpact
