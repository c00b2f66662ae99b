#pragma once

// Run configuration in laboratory units (G, nK, kHz, nm, us) as read from JSON.
// Every key is optional; defaults are the 40K-87Rb parameters at 545.994 G.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "feshrf/fitting.hpp"
#include "feshrf/spectrum_engine.hpp"
#include "json.hpp"

namespace feshrf {

struct RunConfig {
  std::string label_a = "40K";
  double mass_a_amu = isotopes::potassium40_amu;
  std::string label_b = "87Rb";
  double mass_b_amu = isotopes::rubidium87_amu;

  AxisFrequencies freq_a_hz{335.0, 335.0, 335.0};
  AxisFrequencies freq_b_hz{244.0, 244.0, 244.0};

  double n_a = 5e5;
  double n_b = 2.5e5;
  double temperature_nk = 730.0;

  double a_bg_nm = 9.88;
  double b0_gauss = 546.618;
  double delta_b_gauss = 3.04;
  double delta_mu_bohr = 2.32;
  double a_prime_nm = 9.10;

  double rabi_khz = 45.0;  // Omega / 2 pi
  double tau_us = 25.0;
  double atomic_line_hz = 0.0;

  double field_gauss = 545.994;
  // When set, replaces E_b(field); chi is still evaluated through the resonance.
  std::optional<double> binding_energy_khz;
  double lambda = 1.0;

  QuadratureSettings quadrature;
  std::uint64_t seed = 20080513;

  SpeciesPair pair() const;
  TrapConfig trap() const;
  MixtureState mixture() const;
  ResonanceParams resonance() const;
  PulseParams pulse() const;
  BoundStateInfo bound_state() const;
  ModelConfig model() const;
  SpectrumModel spectrum_model() const;

  // Throws ConfigError if any derived module type is invalid.
  void validate() const;
};

// Unknown keys, wrong types and invalid values throw ConfigError.
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& cfg);

inline constexpr const char* config_env_var = "FESHRF_CONFIG";

// The explicit path if given, else $FESHRF_CONFIG if set and non-empty, else nothing (defaults).
std::optional<std::filesystem::path> resolve_config_path(const std::optional<std::string>& flag);

}  // namespace feshrf
