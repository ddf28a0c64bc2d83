#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace chaselab {

struct ResolvedConfig {
  nlohmann::json json;  // every field present, defaults filled in
  std::string hash;     // FNV-1a of the canonical dump, "out" excluded
};

// 64-bit FNV-1a as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);

// Validates raw against the schema of its "experiment" kind and fills in
// defaults. Relative file paths resolve against base_dir. Throws ConfigError
// naming the offending field; unknown keys are rejected.
ResolvedConfig resolve_config(const nlohmann::json& raw, const std::filesystem::path& base_dir,
                              std::optional<std::uint64_t> seed_override = {});

// Reads and resolves a JSON config file. Parse errors become ConfigError.
ResolvedConfig load_config(const std::filesystem::path& path,
                           std::optional<std::uint64_t> seed_override = {});

struct ExperimentOutput {
  std::vector<std::filesystem::path> files;  // in write order
  std::vector<std::string> log;              // human-readable summary lines
};

// Writes config.resolved.json and the experiment's CSVs into out_dir.
// Output bytes depend only on the resolved config, never on thread count.
ExperimentOutput run_experiment(const ResolvedConfig& config, const std::filesystem::path& out_dir);

}  // namespace chaselab
