#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "shearless/barriers.hpp"
#include "shearless/dynamics.hpp"
#include "shearless/errors.hpp"

namespace shearless::cli {

/// Malformed or out-of-range configuration. `field` is the dotted JSON path.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct SntmParams {
  double a = 0.08;
  double b = 0.125;
};

struct OracleSpec {
  std::vector<int> iterations{100, 200, 300};
  int reference_iterations = 200;
  /// Bound on the distance at the last entry of `iterations`.
  std::optional<double> threshold;
};

struct TracerSpec {
  std::vector<Vec2> centers;
  double radius = 0.0;
  int n_points = 64;
};

struct HyperbolicSpec {
  Family family = Family::Strain;
  std::vector<Vec2> seeds;
  double neighborhood = 0.0;
};

/// Expectations checked by `validate`; unset entries are reported without a bound.
struct ValidateSpec {
  std::optional<int> chains;
  std::optional<int> closed_chains;
  std::optional<int> segments_per_chain;
  bool area_preserving = true;
  double det_tolerance = 1e-2;
  double invalid_fraction = 0.05;
};

struct RunConfig {
  /// Configuration with every default filled in; written to the run manifest.
  nlohmann::json resolved;
  std::string system_name;
  std::optional<DynamicalSystem> system;
  std::optional<SntmParams> sntm;
  Rect window;
  BarrierConfig barrier;
  HyperbolicSpec hyperbolic;
  OracleSpec oracle;
  TracerSpec tracers;
  ValidateSpec validate;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 1;
};

/// Parse a config (or a run manifest, whose "config" entry is used). Relative
/// paths resolve against `base_dir`. Throws ConfigError.
RunConfig parse_run_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);

/// Read and parse a JSON file; syntax errors are ConfigError on field "<file>".
RunConfig load_run_config(const std::filesystem::path& path);

/// Rebuild the system for a different horizon (maps only need the iteration
/// count; the mean-field schedule is regenerated).
DynamicalSystem build_system(const RunConfig& cfg, double t1);

}  // namespace shearless::cli
