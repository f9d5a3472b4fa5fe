#ifndef LDP_CONFIG_HPP
#define LDP_CONFIG_HPP

#include <optional>
#include <string>

#include <json.hpp>

#include "ldp/rate.hpp"
#include "ldp/simulate.hpp"
#include "ldp/verify.hpp"

namespace ldp {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SimSection {
  std::int64_t N = 1000;
  double T = 5.0;
  StartSpec start;
  bool reflected = true;
};

struct FluidSection {
  StartSpec start;
  double T = 10.0;
  double tol = 1e-10;
  std::optional<double> u_end;  // set: integrate the time-rescaled flow
};

/// Parsed and validated configuration with defaults applied. `resolved`
/// serializes losslessly: parse(resolved.dump()) reproduces it.
struct ToolConfig {
  ModelConfig model;
  std::uint64_t seed = 1;
  int threads = 0;  // 0 = all available
  double K = 1.0;
  double nu = 0.25;
  double integrator_tol = 1e-10;

  std::optional<SimSection> sim;
  std::optional<FluidSection> fluid;
  std::optional<LlnConfig> lln;
  std::optional<TubeConfig> tube;
  std::optional<UpperConfig> upper;
  std::optional<PoissonTailConfig> poisson;

  nlohmann::json resolved;
};

/// Strict parse: unknown keys are rejected with their full key path.
ToolConfig parse_config(const std::string& text);

// --- file formats -----------------------------------------------------

/// Event log dump: header t,j,applied,z1..zd plus rows at t=0 and t=T.
std::string path_record_csv(const PathRecord& path);

/// Piecewise path / fluid solution dump: header t,z1..zd.
std::string piecewise_csv(const PiecewisePath& phi);
PiecewisePath parse_piecewise_csv(const std::string& text);

/// Boundary polyline: header u,z1,z2.
std::string curve_csv(const BoundaryCurve& curve);
BoundaryCurve parse_curve_csv(const std::string& text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace ldp

#endif
