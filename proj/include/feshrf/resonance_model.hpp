#pragma once

// Field-dependent scattering length near a magnetic Feshbach resonance, the
// universal binding energy of the weakly bound molecule, the open-channel
// fraction chi and the closed-form free-bound Franck-Condon factor.
//
// Conventions:
//  * a(B) = a_bg (1 - DeltaB / (B - B0)); a bound molecule exists iff a(B) > 0.
//  * E_b = hbar^2 / (2 mu a^2), equivalently a = 1/k with k = sqrt(2 mu E_b) / hbar.
//  * chi = 1 - |dE_b/dB| / Delta_mu, using the analytic derivative of the
//    composition above and clamped to [0, 1]. Written in terms of E_b alone:
//        |dE_b/dB| = hbar^2 k (1 - k a_bg)^2 / (mu a_bg DeltaB).

#include <string>

#include "feshrf/quantities.hpp"
#include "feshrf/trap_statistics.hpp"

namespace feshrf {

struct ResonanceParams {
  double a_bg = 0.0;      // m
  double b0 = 0.0;        // T
  double delta_b = 0.0;   // T, signed
  double delta_mu = 0.0;  // J/T
  double a_prime = 0.0;   // m, scattering length of the colliding pair
  SpeciesPair pair = potassium_rubidium_pair();

  // Throws ConfigError on a_bg == 0, DeltaB == 0, Delta_mu == 0 or a' <= 0.
  void validate() const;
};

// 40K-87Rb resonance near 546.6 G: a_bg = 9.88 nm, B0 = 546.618 G, DeltaB = 3.04 G,
// Delta_mu = 2.32 mu_B, a' = 9.10 nm.
ResonanceParams potassium_rubidium_resonance();

struct ChannelFactor {
  double value = 1.0;      // clamped to [0, 1]
  double unclamped = 1.0;  // before clamping
  bool clamped = false;    // model-validity warning
};

struct BoundStateInfo {
  double binding_energy = 0.0;        // E_b > 0, J
  double binding_energy_prime = 0.0;  // E_b' from a', J
  double scattering_length = 0.0;     // a, m
  double pair_scattering_length = 0.0;  // a', m
  double wavenumber = 0.0;            // k = 1/a, 1/m
  ChannelFactor chi;
};

// Throws PoleError at B == B0.
double scattering_length(double field, const ResonanceParams& params);

// Throws NoBoundStateError for a <= 0.
double binding_energy_from_length(double length, const SpeciesPair& pair);
// Throws DomainError for E_b <= 0.
double length_from_binding_energy(double binding_energy, const SpeciesPair& pair);

// Throws PoleError / NoBoundStateError.
double binding_energy_from_field(double field, const ResonanceParams& params);
// dE_b/dB = -(hbar^2 / (mu a^3)) a_bg DeltaB / (B - B0)^2.
double d_binding_energy_dB(double field, const ResonanceParams& params);

// chi from the binding energy alone (the field is implied by E_b on the bound branch).
ChannelFactor closed_channel_factor(double binding_energy, const ResonanceParams& params);
// chi from the analytic field derivative at B.
ChannelFactor closed_channel_factor_at_field(double field, const ResonanceParams& params);
// Diagnostic only: the literal expression 1 - hbar^2 k^2 (1 + k a_bg)^2 / (Delta_mu DeltaB mu a_bg)
// evaluated in SI. It is not dimensionally consistent and is never used by the model.
double closed_channel_factor_printed(double binding_energy, const ResonanceParams& params);

BoundStateInfo bound_state_from_energy(double binding_energy, const ResonanceParams& params);
BoundStateInfo bound_state_from_field(double field, const ResonanceParams& params);

// F_f(eps) = hbar w~ chi (2/pi) (1 - a'/a)^2 sqrt(eps) sqrt(E_b) E_b' / ((eps + E_b)^2 (eps + E_b')).
double franck_condon(double relative_energy, const BoundStateInfo& bound, const EffectiveTrap& trap);

// Peak of franck_condon over eps >= 0 (golden-section search in log eps).
double franck_condon_max(const BoundStateInfo& bound, const EffectiveTrap& trap);

}  // namespace feshrf
