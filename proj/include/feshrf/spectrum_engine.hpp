#pragma once

// Molecule number after a Gaussian RF pulse of duration tau,
//
//   N(nu) = lambda (pi/2) Omega^2 tau^2 Int_0^inf h(e) exp(-(h nu - E_b - E0 - e)^2 tau^2 / hbar^2) F_f(e) de,
//
// evaluated by adaptive quadrature over the relative collision energy e. The
// integrand is a Gaussian of width ~hbar/tau centred at delta = h nu - E0 - E_b
// times a thermal envelope of width k_B T; both scales are given explicit
// breakpoints so that neither is missed when they differ by orders of magnitude.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "feshrf/errors.hpp"
#include "feshrf/quadrature.hpp"
#include "feshrf/resonance_model.hpp"
#include "feshrf/trap_statistics.hpp"

namespace feshrf {

struct PulseParams {
  double rabi = 0.0;           // Omega, rad/s
  double tau = 0.0;            // s
  double atomic_energy = 0.0;  // E0, J

  double atomic_line_hz() const noexcept;
  void validate() const;
};

enum class QuadratureMethod { GaussKronrod, FixedGaussLegendre };

struct QuadratureSettings {
  QuadratureMethod method = QuadratureMethod::GaussKronrod;
  double rel_tol = 1e-9;
  double abs_tol = 0.0;  // in molecules
  std::size_t max_intervals = 4000;
  std::size_t fixed_panels = 64;  // per segment, FixedGaussLegendre only
};

struct ModelConfig {
  MixtureState mix;
  EffectiveTrap trap;
  PulseParams pulse;
  BoundStateInfo bound;
  double lambda = 1.0;
  QuadratureSettings quadrature;

  void validate() const;
};

struct SpectrumPoint {
  double frequency = 0.0;  // Hz
  double molecules = 0.0;
  std::optional<double> uncertainty;
};

struct Spectrum {
  std::vector<SpectrumPoint> points;

  // Throws DomainError unless frequencies are strictly increasing and finite.
  void validate() const;
  std::vector<double> frequencies() const;
  std::vector<double> counts() const;
};

struct MoleculeEvaluation {
  double value = 0.0;
  double abs_error = 0.0;
  std::size_t evaluations = 0;
};

// Point failure inside compute_spectrum.
class SpectrumPointError : public NumericalError {
 public:
  SpectrumPointError(const NumericalError& cause, std::size_t index)
      : NumericalError("grid point " + std::to_string(index) + ": " + cause.what(), cause.estimate(),
                       cause.achieved_error()),
        index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

// Energy-axis pieces actually integrated, in units of k_B T.
std::vector<Segment> integration_segments(double frequency, const ModelConfig& cfg);

MoleculeEvaluation evaluate_molecule_number(double frequency, const ModelConfig& cfg);
double molecule_number(double frequency, const ModelConfig& cfg);

// Grid must be non-empty and strictly increasing. threads = 0 uses all cores;
// the output does not depend on the thread count.
Spectrum compute_spectrum(std::span<const double> grid, const ModelConfig& cfg, unsigned threads = 1);

// nu0 + E_b/h: the threshold frequency for e = 0.
double spectral_edge(const ModelConfig& cfg);

// Omega sqrt(max F_f) tau. Values above perturbative_limit flag a breakdown of the
// small-depletion treatment.
double perturbative_parameter(const ModelConfig& cfg);
inline constexpr double perturbative_limit = 0.5;

// Half-width of the explicit Gaussian window, in units of hbar/tau.
inline constexpr double gaussian_window_widths = 8.0;
// Upper end of the thermal window, in units of k_B T.
inline constexpr double thermal_window_kt = 30.0;

}  // namespace feshrf
