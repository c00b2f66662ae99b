#include "feshrf/trap_statistics.hpp"

#include <algorithm>
#include <cmath>

#include "feshrf/errors.hpp"
#include "feshrf/quantities.hpp"

namespace feshrf {

namespace {

void require_non_negative(double energy, const char* what) {
  if (!(energy >= 0.0)) throw DomainError(std::string(what) + ": energy must be non-negative");
}

}  // namespace

TrapConfig TrapConfig::isotropic(double omega_a, double omega_b) {
  return TrapConfig{{omega_a, omega_a, omega_a}, {omega_b, omega_b, omega_b}};
}

void TrapConfig::validate() const {
  for (std::size_t i = 0; i < 3; ++i) {
    if (!(omega_a[i] > 0.0) || !(omega_b[i] > 0.0) || !std::isfinite(omega_a[i]) ||
        !std::isfinite(omega_b[i])) {
      throw DomainError("TrapConfig: trap frequencies must be positive and finite");
    }
  }
}

double EffectiveTrap::level_spacing() const noexcept { return constants::hbar * omega_tilde; }

EffectiveTrap effective_trap(const TrapConfig& cfg) {
  cfg.validate();
  EffectiveTrap trap;
  for (std::size_t i = 0; i < 3; ++i) {
    trap.omega_bar[i] = std::sqrt(cfg.omega_a[i] * cfg.omega_b[i]);
    trap.frequency_mismatch =
        std::max(trap.frequency_mismatch, std::abs(cfg.omega_a[i] - cfg.omega_b[i]) / trap.omega_bar[i]);
  }
  trap.omega_tilde = std::cbrt(trap.omega_bar[0] * trap.omega_bar[1] * trap.omega_bar[2]);
  return trap;
}

EffectiveTrap effective_trap(double omega_tilde) {
  return effective_trap(TrapConfig::isotropic(omega_tilde, omega_tilde));
}

void MixtureState::validate() const {
  if (!(n_a >= 0.0) || !(n_b >= 0.0)) throw DomainError("MixtureState: atom numbers must be non-negative");
  if (!(temperature > 0.0)) throw DomainError("MixtureState: temperature must be positive");
}

double single_atom_occupation(double energy, double atom_number, const AxisFrequencies& omega,
                              double temperature) {
  require_non_negative(energy, "single_atom_occupation");
  const double kt = thermal_energy(temperature);
  const double ratio = constants::hbar * constants::hbar * constants::hbar * omega[0] * omega[1] * omega[2] /
                       (kt * kt * kt);
  return atom_number * ratio * std::exp(-energy / kt);
}

double pair_occupation(double total_energy, const MixtureState& mix, const EffectiveTrap& trap) {
  require_non_negative(total_energy, "pair_occupation");
  const double kt = thermal_energy(mix.temperature);
  const double x = trap.level_spacing() / kt;
  const double x3 = x * x * x;
  return mix.n_a * mix.n_b * x3 * x3 * std::exp(-total_energy / kt);
}

double dos_center_of_mass(double cm_energy, const EffectiveTrap& trap) {
  require_non_negative(cm_energy, "dos_center_of_mass");
  const double q = trap.level_spacing();
  return cm_energy * cm_energy / (2.0 * q * q * q);
}

double dos_swave(const EffectiveTrap& trap) { return 1.0 / (2.0 * trap.level_spacing()); }

double pair_energy_density(double relative_energy, const MixtureState& mix, const EffectiveTrap& trap) {
  require_non_negative(relative_energy, "pair_energy_density");
  const double kt = thermal_energy(mix.temperature);
  const double q = trap.level_spacing();
  return mix.n_a * mix.n_b * q * q / (2.0 * kt * kt * kt) * std::exp(-relative_energy / kt);
}

double total_swave_pairs(const MixtureState& mix, const EffectiveTrap& trap) {
  const double kt = thermal_energy(mix.temperature);
  const double q = trap.level_spacing();
  return mix.n_a * mix.n_b * q * q / (2.0 * kt * kt);
}

}  // namespace feshrf
