#pragma once

// Subcommands of the feshrf tool. run_cli is the whole program minus main(), so
// tests can drive it in process.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "feshrf/run_config.hpp"
#include "json.hpp"

namespace feshrf::cli {

enum ExitCode : int { Ok = 0, InputError = 1, FitFailure = 2, NumericalFailure = 3 };

inline constexpr int report_schema_version = 1;
std::string tool_version();

struct Range {
  double start = 0.0;
  double stop = 0.0;
  double step = 0.0;
};

// "start:stop:step" with step > 0 and stop >= start; errors name `flag`.
Range parse_range(std::string_view text, std::string_view flag);
// start, start + step, ... up to stop (inclusive within 1e-9 step).
std::vector<double> expand(const Range& r);

inline constexpr double reference_peak_molecules = 5e4;
inline constexpr double absolute_scale_factor = 30.0;
inline constexpr double spectroscopic_binding_energy_khz = 127.6;
inline constexpr double spectroscopic_field_gauss = 545.994;

struct ValidationOptions {
  std::size_t samples = 1'000'000;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  int bins = 64;
  std::size_t grid_points = 50;
  // Test hook: the expected densities use temperature * this factor.
  double temperature_corruption = 1.0;
};

struct ValidationOutcome {
  nlohmann::json report;  // "checks" array plus supporting numbers
  bool passed = false;
};

// Monte Carlo marginals, energy identity, independence, equipartition, engine vs
// reference quadrature and the absolute-scale sanity bound, for one config.
ValidationOutcome run_validation(const RunConfig& cfg, const ValidationOptions& options);

// args excludes the program name.
int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace feshrf::cli
