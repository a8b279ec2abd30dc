#pragma once

// Run configuration: strict JSON parsing (unknown keys rejected), seed
// override from the environment, and a digest of the effective settings.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pointnav/agent.hpp"
#include "pointnav/io.hpp"

namespace pointnav {

/// Invalid or incomplete configuration. Commands map it to exit status 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::filesystem::path map_path;
  std::filesystem::path episodes_path;
  std::filesystem::path output_dir;
  std::optional<std::uint64_t> seed;
  EstimatorKind estimator = EstimatorKind::ground_truth();
  SimConfig sim;
  PolicyParams policy;
  bool store_scans = false;
  bool use_map = true;
  int workers = 1;
  std::vector<double> thresholds{0.36, 0.395, 0.45, 0.70};
  /// Geodesic bin edges in metres; the last bin is open-ended.
  std::vector<double> bin_edges{0.0, 3.0, 8.0};
};

Json to_json(const ActuationNoiseConfig& c);
ActuationNoiseConfig actuation_from_json(const Json& j);
Json to_json(const SensorNoiseConfig& c);
SensorNoiseConfig sensor_from_json(const Json& j);
Json to_json(const PolicyParams& p);
PolicyParams policy_from_json(const Json& j);
Json to_json(const EstimatorKind& k);
EstimatorKind estimator_from_json(const Json& j);

/// Every key is optional except where noted by validate(); absent keys keep
/// their defaults. Relative paths are resolved against `base_dir`.
RunConfig run_config_from_json(const Json& j, const std::filesystem::path& base_dir = {});
Json to_json(const RunConfig& c);

/// Reads a config file, then applies NAV_SEED when `nav_seed` is non-null.
RunConfig load_run_config(const std::filesystem::path& path, const char* nav_seed);
/// Parses a NAV_SEED value; throws ConfigError unless it is a plain
/// non-negative integer that fits in 64 bits.
std::uint64_t parse_seed(const std::string& text);

/// Throws ConfigError on a missing seed, out-of-range parameters, or (when
/// `check_paths`) input files that do not exist.
void validate(const RunConfig& c, bool check_paths);

/// 16 hex digits of FNV-1a over the canonical JSON of `j`.
std::string digest(const Json& j);
std::string config_digest(const RunConfig& c);

/// Bin edges with +infinity appended, as used by the metrics.
std::vector<double> closed_bin_edges(const std::vector<double>& edges);

}  // namespace pointnav
