#include "feshrf/quantities.hpp"

#include <algorithm>
#include <cmath>

#include "feshrf/errors.hpp"

namespace feshrf {

const PhysicalConstants& physical_constants() noexcept {
  static const PhysicalConstants values{constants::hbar, constants::planck_h, constants::k_B,
                                        constants::mu_B, constants::amu};
  return values;
}

Unit parse_unit(std::string_view name) {
  if (name == "G") return Unit::Gauss;
  if (name == "mG") return Unit::MilliGauss;
  if (name == "nK") return Unit::NanoKelvin;
  if (name == "uK" || name == "µK" || name == "μK") return Unit::MicroKelvin;
  if (name == "Hz") return Unit::Hertz;
  if (name == "kHz") return Unit::KiloHertz;
  if (name == "MHz") return Unit::MegaHertz;
  if (name == "nm") return Unit::Nanometer;
  if (name == "us" || name == "µs" || name == "μs") return Unit::Microsecond;
  if (name == "amu" || name == "u") return Unit::AtomicMass;
  if (name == "muB" || name == "μB" || name == "µB") return Unit::BohrMagneton;
  throw ConfigError("unknown unit '" + std::string(name) + "'");
}

std::string_view unit_symbol(Unit unit) noexcept {
  switch (unit) {
    case Unit::Gauss: return "G";
    case Unit::MilliGauss: return "mG";
    case Unit::NanoKelvin: return "nK";
    case Unit::MicroKelvin: return "uK";
    case Unit::Hertz: return "Hz";
    case Unit::KiloHertz: return "kHz";
    case Unit::MegaHertz: return "MHz";
    case Unit::Nanometer: return "nm";
    case Unit::Microsecond: return "us";
    case Unit::AtomicMass: return "amu";
    case Unit::BohrMagneton: return "muB";
  }
  return "?";
}

namespace {

double si_factor(Unit unit) noexcept {
  switch (unit) {
    case Unit::Gauss: return 1e-4;
    case Unit::MilliGauss: return 1e-7;
    case Unit::NanoKelvin: return 1e-9;
    case Unit::MicroKelvin: return 1e-6;
    case Unit::Hertz: return 1.0;
    case Unit::KiloHertz: return 1e3;
    case Unit::MegaHertz: return 1e6;
    case Unit::Nanometer: return 1e-9;
    case Unit::Microsecond: return 1e-6;
    case Unit::AtomicMass: return constants::amu;
    case Unit::BohrMagneton: return constants::mu_B;
  }
  return 1.0;
}

}  // namespace

double to_si(double value, Unit unit) noexcept { return value * si_factor(unit); }
double from_si(double value, Unit unit) noexcept { return value / si_factor(unit); }
double to_si(double value, std::string_view unit) { return to_si(value, parse_unit(unit)); }

double reduced_mass(double mass_a, double mass_b) {
  if (!(mass_a > 0.0) || !(mass_b > 0.0)) {
    throw DomainError("reduced_mass: masses must be positive");
  }
  const double lo = std::min(mass_a, mass_b);
  const double hi = std::max(mass_a, mass_b);
  return lo / (1.0 + lo / hi);
}

double thermal_energy(double temperature) {
  if (!(temperature > 0.0)) {
    throw DomainError("thermal_energy: temperature must be positive");
  }
  return constants::k_B * temperature;
}

SpeciesPair::SpeciesPair(std::string label_a, double mass_a, std::string label_b, double mass_b)
    : label_a_(std::move(label_a)), label_b_(std::move(label_b)), mass_a_(mass_a), mass_b_(mass_b) {
  if (!(mass_a > 0.0) || !(mass_b > 0.0) || !std::isfinite(mass_a) || !std::isfinite(mass_b)) {
    throw DomainError("SpeciesPair: masses must be positive and finite");
  }
  reduced_mass_ = feshrf::reduced_mass(mass_a, mass_b);
  total_mass_ = mass_a + mass_b;
}

SpeciesPair potassium_rubidium_pair() {
  return SpeciesPair("40K", isotopes::potassium40_amu * constants::amu, "87Rb",
                     isotopes::rubidium87_amu * constants::amu);
}

}  // namespace feshrf
