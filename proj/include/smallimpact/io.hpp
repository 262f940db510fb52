#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "smallimpact/coeffs.hpp"
#include "smallimpact/limit.hpp"
#include "smallimpact/statesim.hpp"

namespace smallimpact {

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);

/// 16 lowercase hex digits.
std::string hex_hash(std::uint64_t h);

/// Provenance written as the first line of every CSV ("# config_hash=... seed=...")
/// and as top-level keys of every JSON report.
struct FileStamp {
    std::string config_hash;
    std::optional<std::uint64_t> seed;
};

void write_stamp(std::ostream& os, const FileStamp& stamp);
void stamp_json(nlohmann::json& j, const FileStamp& stamp);

/// Long format t, chi, B, D, E (one row per space-time node). Deterministic
/// fields write chi = nan. Spatial fields keep every stride-th node in t and
/// chi plus the last ones.
void write_prelimit_csv(std::ostream& os, const PreLimitCoefficients& c, const FileStamp& stamp,
                        std::size_t stride = 1);
void write_limit_coefficients_csv(std::ostream& os, const LimitCoefficients& c, const FileStamp& stamp,
                                  std::size_t stride = 1);

/// t, Xhat0, Yhat0, Zhat0, Vhat. Jump times 0 and T get two rows: left limits
/// first, then values.
void write_limit_state_csv(std::ostream& os, const LimitState& st, const LimitStrategy& theta,
                           const FileStamp& stamp);
/// {"j_plus": [[t, s], ...], "j_minus": [...], "x0": x0}.
nlohmann::json jumps_json(const SemimartingaleStrategy& theta);

/// t, Xhat, Yhat, Zhat.
void write_state_csv(std::ostream& os, const PreLimitState& st, const FileStamp& stamp);

/// Binary cache of coefficient fields keyed by a content hash. load_* returns
/// nullopt for a missing file, a different key or a malformed file.
void save_prelimit_cache(const std::filesystem::path& file, std::uint64_t key, const PreLimitCoefficients& c);
std::optional<PreLimitCoefficients> load_prelimit_cache(const std::filesystem::path& file, std::uint64_t key);
void save_limit_cache(const std::filesystem::path& file, std::uint64_t key, const LimitCoefficients& c);
std::optional<LimitCoefficients> load_limit_cache(const std::filesystem::path& file, std::uint64_t key);

/// Reads {j_plus, j_minus, V, liquidating}; V names a CSV (relative to the
/// strategy file) with columns t, V whose t column becomes the grid. Throws
/// ConfigError on malformed input.
SemimartingaleStrategy read_strategy(const std::filesystem::path& file, double x0);

}  // namespace smallimpact
