#pragma once

// Thermal pair statistics of two species in harmonic traps, in the continuous
// (thermodynamic-limit) description. All energies in J, frequencies in rad/s.

#include <array>

namespace feshrf {

using AxisFrequencies = std::array<double, 3>;

struct TrapConfig {
  AxisFrequencies omega_a{};
  AxisFrequencies omega_b{};

  static TrapConfig isotropic(double omega_a, double omega_b);
  // Throws DomainError unless all six frequencies are positive and finite.
  void validate() const;
};

struct EffectiveTrap {
  // Per-axis geometric mean sqrt(omega_a,i * omega_b,i).
  AxisFrequencies omega_bar{};
  // Geometric mean of omega_bar.
  double omega_tilde = 0.0;
  // max_i |omega_a,i - omega_b,i| / omega_bar_i. The relative/centre-of-mass coupling
  // it controls is not part of the model.
  double frequency_mismatch = 0.0;

  // Quantum of the mean oscillator, hbar * omega_tilde.
  double level_spacing() const noexcept;
};

EffectiveTrap effective_trap(const TrapConfig& cfg);
EffectiveTrap effective_trap(double omega_tilde);

struct MixtureState {
  double n_a = 0.0;
  double n_b = 0.0;
  double temperature = 0.0;  // K

  void validate() const;
};

// f(eps) = N (hbar^3 w1 w2 w3 / (k_B T)^3) exp(-eps / k_B T).
double single_atom_occupation(double energy, double atom_number, const AxisFrequencies& omega,
                              double temperature);

// f_p(eps_t) = N_a N_b (hbar w~ / k_B T)^6 exp(-eps_t / k_B T).
double pair_occupation(double total_energy, const MixtureState& mix, const EffectiveTrap& trap);

// g_cm(eps) = eps^2 / (2 (hbar w~)^3).
double dos_center_of_mass(double cm_energy, const EffectiveTrap& trap);

// g_r = 1 / (2 hbar w~), independent of the relative energy.
double dos_swave(const EffectiveTrap& trap);

// h(eps_r) = N_a N_b (hbar w~)^2 / (2 (k_B T)^3) exp(-eps_r / k_B T), the number of
// s-wave colliding pairs per unit relative energy after integrating out the
// centre-of-mass motion.
double pair_energy_density(double relative_energy, const MixtureState& mix, const EffectiveTrap& trap);

// Closed-form integral of pair_energy_density over [0, inf).
double total_swave_pairs(const MixtureState& mix, const EffectiveTrap& trap);

}  // namespace feshrf
