#pragma once

// Independent checks of the analytic model:
//  * classical Boltzmann sampling of two atoms in their own harmonic traps,
//    transformed to relative / centre-of-mass coordinates with the mean
//    frequencies, and chi-square tests of the resulting energy marginals;
//  * a reference evaluation of the molecule-number integral by a different
//    quadrature family (adaptive Romberg in sqrt(energy)) than the engine.
//
// The s-wave restriction (constant g_r) is a quantum selection and is not
// classically samplable; the sampled relative energy follows the full
// all-partial-wave density e^2 exp(-e/kT) / (2 (kT)^3).

#include <cstdint>
#include <span>
#include <vector>

#include "feshrf/quantities.hpp"
#include "feshrf/spectrum_engine.hpp"
#include "feshrf/trap_statistics.hpp"

namespace feshrf {

// SplitMix64 (Steele, Lea, Flood 2014). Used to derive per-chunk seeds and as the
// sampling generator itself; fully specified, so streams are platform independent.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}
  std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  // Uniform in (0, 1), 53-bit resolution.
  double uniform() noexcept { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

// Standard normal pairs by the Box-Muller transform.
class NormalSource {
 public:
  explicit NormalSource(std::uint64_t seed) noexcept : rng_(seed) {}
  double next() noexcept;

 private:
  SplitMix64 rng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

struct SamplingConfig {
  TrapConfig trap;
  SpeciesPair pair = potassium_rubidium_pair();
  double temperature = 0.0;  // K
};

struct PairSample {
  double eps_rel = 0.0;    // p^2/2mu + (mu/2) sum omega_bar_i^2 r_i^2
  double eps_cm = 0.0;     // P^2/2M + (M/2) sum omega_bar_i^2 R_i^2
  double eps_total = 0.0;  // eps_rel + eps_cm
  double eps_atoms = 0.0;  // eps_a + eps_b in the original two-oscillator form
};

// Samples per independently seeded chunk; fixed, so results do not depend on threads.
inline constexpr std::size_t sample_chunk_size = 1u << 15;

// Deterministic for fixed (n, cfg, seed) regardless of `threads`.
std::vector<PairSample> sample_pairs(std::size_t n, const SamplingConfig& cfg, std::uint64_t seed,
                                     unsigned threads = 1);

struct HistogramReport {
  std::vector<double> bin_edges;  // J; last edge is +inf
  std::vector<double> observed;
  std::vector<double> expected;
  double chi_square = 0.0;
  int degrees_of_freedom = 0;
  double p_value = 0.0;
  std::size_t samples = 0;
};

inline constexpr std::size_t min_gof_samples = 10000;

// Chi-square test of energies against the Gamma(3, k_B T) density
// e^2 exp(-e/kT) / (2 (kT)^3), with equal-probability bins.
HistogramReport gamma3_energy_gof(std::span<const double> energies, double temperature, int bins);
HistogramReport relative_energy_gof(std::span<const PairSample> samples, double temperature, int bins);
HistogramReport center_of_mass_energy_gof(std::span<const PairSample> samples, double temperature, int bins);

struct SampleMoments {
  double mean_rel = 0.0;
  double mean_cm = 0.0;
  double mean_atom = 0.0;  // (eps_a + eps_b)/2
  double sem_atom = 0.0;   // standard error of mean_atom
  double pearson_rel_cm = 0.0;
  double max_identity_error = 0.0;  // max |eps_atoms - eps_total| / eps_atoms
};

SampleMoments sample_moments(std::span<const PairSample> samples);

// Reference value of the molecule number at `frequency`; rel_tol in [1e-12, 1e-4].
// Throws NumericalError carrying the last estimate on non-convergence.
MoleculeEvaluation reference_integral(double frequency, const ModelConfig& cfg, double rel_tol);

}  // namespace feshrf
