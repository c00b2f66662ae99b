#include "feshrf/resonance_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "feshrf/errors.hpp"

namespace feshrf {

void ResonanceParams::validate() const {
  if (!(a_bg != 0.0) || !std::isfinite(a_bg)) throw ConfigError("resonance: a_bg must be non-zero");
  if (!(delta_b != 0.0) || !std::isfinite(delta_b)) throw ConfigError("resonance: DeltaB must be non-zero");
  if (!(delta_mu != 0.0) || !std::isfinite(delta_mu)) throw ConfigError("resonance: Delta_mu must be non-zero");
  if (!(a_prime > 0.0) || !std::isfinite(a_prime)) throw ConfigError("resonance: a' must be positive");
  if (!std::isfinite(b0)) throw ConfigError("resonance: B0 must be finite");
}

ResonanceParams potassium_rubidium_resonance() {
  ResonanceParams p;
  p.a_bg = to_si(9.88, Unit::Nanometer);
  p.b0 = to_si(546.618, Unit::Gauss);
  p.delta_b = to_si(3.04, Unit::Gauss);
  p.delta_mu = to_si(2.32, Unit::BohrMagneton);
  p.a_prime = to_si(9.10, Unit::Nanometer);
  p.pair = potassium_rubidium_pair();
  return p;
}

double scattering_length(double field, const ResonanceParams& params) {
  const double detuning = field - params.b0;
  if (detuning == 0.0) throw PoleError("scattering_length: field is on the resonance pole B = B0");
  // Written around the zero crossing so that a(B0 + DeltaB) is exactly 0.
  return params.a_bg * (field - (params.b0 + params.delta_b)) / detuning;
}

double binding_energy_from_length(double length, const SpeciesPair& pair) {
  if (!(length > 0.0)) throw NoBoundStateError("no bound state for non-positive scattering length");
  return constants::hbar * constants::hbar / (2.0 * pair.reduced_mass() * length * length);
}

double length_from_binding_energy(double binding_energy, const SpeciesPair& pair) {
  if (!(binding_energy > 0.0)) throw DomainError("length_from_binding_energy: E_b must be positive");
  return constants::hbar / std::sqrt(2.0 * pair.reduced_mass() * binding_energy);
}

double binding_energy_from_field(double field, const ResonanceParams& params) {
  return binding_energy_from_length(scattering_length(field, params), params.pair);
}

double d_binding_energy_dB(double field, const ResonanceParams& params) {
  const double a = scattering_length(field, params);
  if (!(a > 0.0)) throw NoBoundStateError("d_binding_energy_dB: no bound state at this field");
  const double detuning = field - params.b0;
  const double mu = params.pair.reduced_mass();
  return -(constants::hbar * constants::hbar / (mu * a * a * a)) * params.a_bg * params.delta_b /
         (detuning * detuning);
}

namespace {

ChannelFactor make_channel_factor(double slope_magnitude, const ResonanceParams& params) {
  ChannelFactor chi;
  chi.unclamped = 1.0 - slope_magnitude / std::abs(params.delta_mu);
  chi.value = std::clamp(chi.unclamped, 0.0, 1.0);
  chi.clamped = chi.value != chi.unclamped;
  return chi;
}

}  // namespace

ChannelFactor closed_channel_factor(double binding_energy, const ResonanceParams& params) {
  const double mu = params.pair.reduced_mass();
  const double k = 1.0 / length_from_binding_energy(binding_energy, params.pair);
  const double s = 1.0 - k * params.a_bg;
  const double slope = constants::hbar * constants::hbar * k * s * s / (mu * std::abs(params.a_bg * params.delta_b));
  return make_channel_factor(slope, params);
}

ChannelFactor closed_channel_factor_at_field(double field, const ResonanceParams& params) {
  return make_channel_factor(std::abs(d_binding_energy_dB(field, params)), params);
}

double closed_channel_factor_printed(double binding_energy, const ResonanceParams& params) {
  const double mu = params.pair.reduced_mass();
  const double k = 1.0 / length_from_binding_energy(binding_energy, params.pair);
  const double t = 1.0 + k * params.a_bg;
  return 1.0 - constants::hbar * constants::hbar * k * k * t * t /
                   (params.delta_mu * params.delta_b * mu * params.a_bg);
}

BoundStateInfo bound_state_from_energy(double binding_energy, const ResonanceParams& params) {
  params.validate();
  BoundStateInfo bound;
  bound.binding_energy = binding_energy;
  bound.scattering_length = length_from_binding_energy(binding_energy, params.pair);
  bound.wavenumber = 1.0 / bound.scattering_length;
  bound.pair_scattering_length = params.a_prime;
  bound.binding_energy_prime = binding_energy_from_length(params.a_prime, params.pair);
  bound.chi = closed_channel_factor(binding_energy, params);
  return bound;
}

BoundStateInfo bound_state_from_field(double field, const ResonanceParams& params) {
  params.validate();
  BoundStateInfo bound;
  bound.scattering_length = scattering_length(field, params);
  bound.binding_energy = binding_energy_from_length(bound.scattering_length, params.pair);
  bound.wavenumber = 1.0 / bound.scattering_length;
  bound.pair_scattering_length = params.a_prime;
  bound.binding_energy_prime = binding_energy_from_length(params.a_prime, params.pair);
  bound.chi = closed_channel_factor_at_field(field, params);
  return bound;
}

double franck_condon(double relative_energy, const BoundStateInfo& bound, const EffectiveTrap& trap) {
  if (!(relative_energy >= 0.0)) throw DomainError("franck_condon: energy must be non-negative");
  const double eb = bound.binding_energy;
  const double ebp = bound.binding_energy_prime;
  const double overlap = 1.0 - bound.pair_scattering_length / bound.scattering_length;
  const double shape = std::sqrt(relative_energy * eb) * ebp /
                       ((relative_energy + eb) * (relative_energy + eb) * (relative_energy + ebp));
  return trap.level_spacing() * bound.chi.value * (2.0 / std::numbers::pi) * overlap * overlap * shape;
}

double franck_condon_max(const BoundStateInfo& bound, const EffectiveTrap& trap) {
  // sqrt(x)/((x+Eb)^2 (x+Eb')) is unimodal in log x.
  auto f = [&](double log_x) { return franck_condon(std::exp(log_x), bound, trap); };
  double lo = std::log(bound.binding_energy * 1e-6);
  double hi = std::log(std::max(bound.binding_energy, bound.binding_energy_prime) * 10.0);
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - ratio * (hi - lo);
  double x2 = lo + ratio * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + ratio * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - ratio * (hi - lo);
      f1 = f(x1);
    }
  }
  return std::max(f1, f2);
}

}  // namespace feshrf
