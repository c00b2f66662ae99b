#pragma once

// Physical constants, laboratory-unit conversions and two-body mass bookkeeping.
// Everything inside the library is SI (J, s, T, kg, m, K); laboratory units only
// appear at the I/O boundary.

#include <numbers>
#include <string>
#include <string_view>

namespace feshrf {

namespace constants {
// CODATA 2018. h, k_B are exact by SI definition.
inline constexpr double planck_h = 6.62607015e-34;                   // J s
inline constexpr double hbar = planck_h / (2.0 * std::numbers::pi);  // J s
inline constexpr double k_B = 1.380649e-23;                          // J/K
inline constexpr double mu_B = 9.2740100783e-24;                     // J/T
inline constexpr double amu = 1.66053906660e-27;                     // kg
}  // namespace constants

struct PhysicalConstants {
  double hbar;
  double planck_h;
  double k_B;
  double mu_B;
  double amu;
};

const PhysicalConstants& physical_constants() noexcept;

enum class Unit {
  Gauss,
  MilliGauss,
  NanoKelvin,
  MicroKelvin,
  Hertz,
  KiloHertz,
  MegaHertz,
  Nanometer,
  Microsecond,
  AtomicMass,
  BohrMagneton,
};

// Accepts "G", "mG", "nK", "uK"/"µK", "Hz", "kHz", "MHz", "nm", "us"/"µs", "amu"/"u",
// "muB"/"μB". Throws ConfigError otherwise.
Unit parse_unit(std::string_view name);
std::string_view unit_symbol(Unit unit) noexcept;

double to_si(double value, Unit unit) noexcept;
double from_si(double value, Unit unit) noexcept;
double to_si(double value, std::string_view unit);

// m_a m_b / (m_a + m_b), evaluated so that it is exactly symmetric and finite for m_b -> inf.
double reduced_mass(double mass_a, double mass_b);

// k_B T; throws DomainError for T <= 0.
double thermal_energy(double temperature);

// Energies cross the user boundary as E/h in kHz.
inline double energy_to_khz(double energy) noexcept { return energy / constants::planck_h * 1e-3; }
inline double khz_to_energy(double khz) noexcept { return khz * 1e3 * constants::planck_h; }
inline double energy_to_hz(double energy) noexcept { return energy / constants::planck_h; }
inline double hz_to_energy(double hz) noexcept { return hz * constants::planck_h; }
inline double angular_from_hz(double hz) noexcept { return 2.0 * std::numbers::pi * hz; }

class SpeciesPair {
 public:
  // Throws DomainError unless both masses are positive and finite.
  SpeciesPair(std::string label_a, double mass_a, std::string label_b, double mass_b);

  const std::string& label_a() const noexcept { return label_a_; }
  const std::string& label_b() const noexcept { return label_b_; }
  double mass_a() const noexcept { return mass_a_; }
  double mass_b() const noexcept { return mass_b_; }
  double reduced_mass() const noexcept { return reduced_mass_; }
  double total_mass() const noexcept { return total_mass_; }

 private:
  std::string label_a_;
  std::string label_b_;
  double mass_a_;
  double mass_b_;
  double reduced_mass_;
  double total_mass_;
};

namespace isotopes {
inline constexpr double potassium40_amu = 39.963998166;
inline constexpr double rubidium87_amu = 86.909180527;
}  // namespace isotopes

// 40K (species a) and 87Rb (species b).
SpeciesPair potassium_rubidium_pair();

}  // namespace feshrf
