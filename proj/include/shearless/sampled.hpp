#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "shearless/dynamics.hpp"

namespace shearless {

/// Uniform space grid and time stamps of a sampled velocity field.
struct SampledGridHeader {
  Vec2 origin;
  double dx = 1.0;
  double dy = 1.0;
  int nx = 2;
  int ny = 2;
  std::vector<double> times;
  /// When set, x wraps with this period (must equal nx * dx).
  std::optional<double> period_x;

  std::size_t nodes() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
  void validate() const;
};

/// Velocity samples: u[k] and v[k] hold time sample k, row-major with x fastest
/// (index j * nx + i).
struct SampledVelocityData {
  SampledGridHeader header;
  std::vector<std::vector<double>> u;
  std::vector<std::vector<double>> v;
};

/// Continuous system backed by samples: bilinear in space, linear in time. A
/// single time sample is treated as a steady field. Queries outside the
/// spatio-temporal hull throw DomainEscape.
DynamicalSystem sampled_velocity_system(SampledVelocityData data, std::string id = "sampled");

/// Structured-text header plus one raw little-endian float64 file per time
/// sample (u block then v block). Relative file names resolve against the
/// header's directory.
SampledVelocityData read_sampled_velocity(const std::filesystem::path& header_path);
void write_sampled_velocity(const SampledVelocityData& data, const std::filesystem::path& header_path);

/// CSV alternative with columns x,y,t,u,v covering a full tensor grid.
SampledVelocityData read_sampled_velocity_csv(const std::filesystem::path& path);

/// Sample a continuous system's velocity on a grid (useful for round trips and
/// refinement studies).
SampledVelocityData sample_velocity(const DynamicalSystem& system, const SampledGridHeader& header);

}  // namespace shearless
