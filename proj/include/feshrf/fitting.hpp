#pragma once

// The two analysis pipelines:
//  * fit_spectrum: binding energy E_b and scale factor lambda from one RF
//    association spectrum (lambda is linear and profiled out in closed form);
//  * fit_resonance: resonance position B0 and width DeltaB from binding energies
//    measured at several fields;
// plus the alternation of both that makes chi (which depends on DeltaB)
// self-consistent.

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <vector>

#include "feshrf/least_squares.hpp"
#include "feshrf/resonance_model.hpp"
#include "feshrf/spectrum_engine.hpp"

namespace feshrf {

// Everything needed to evaluate a spectrum except E_b and lambda.
struct SpectrumModel {
  MixtureState mix;
  EffectiveTrap trap;
  PulseParams pulse;
  ResonanceParams resonance;
  QuadratureSettings quadrature;

  // Bound state built from E_b through the resonance parameters (chi depends on E_b and DeltaB).
  ModelConfig at(double binding_energy, double lambda) const;
};

inline constexpr double max_fit_binding_energy_hz = 10e6;
inline constexpr double max_fit_lambda = 1e3;
// Offset of the spectral peak above the edge used by initial_guess, in k_B T.
inline constexpr double peak_thermal_shift = 0.5;

struct SpectrumGuess {
  double binding_energy = 0.0;  // J
  double lambda = 0.0;
};

// E_b = h (nu_peak - nu0) - 0.5 k_B T and lambda = peak height ratio data/model.
// Throws DegenerateDataError for fewer than 5 points or no strict interior maximum.
SpectrumGuess initial_guess(const Spectrum& data, const SpectrumModel& model);

struct FitOptions {
  LeastSquaresOptions solver;
  unsigned threads = 1;
};

struct SpectrumFitResult {
  double binding_energy = 0.0;  // J
  double binding_energy_sigma = 0.0;
  double lambda = 0.0;
  double lambda_sigma = 0.0;
  Eigen::Matrix2d covariance = Eigen::Matrix2d::Zero();  // (E_b [J], lambda)
  double residual_norm = 0.0;
  double reduced_chi_square = 0.0;
  int n_iterations = 0;
  bool converged = false;
  FitStatus status = FitStatus::MaxIterations;
  bool poisson_weights = false;
  std::vector<double> sigmas;     // per-point uncertainties actually used
  std::vector<double> residuals;  // (data - model) / sigma
};

// Weighted least squares over (E_b, lambda). Uses the count_uncertainty of every
// point when all are present, Poisson-style sqrt(max(count, 1)) otherwise.
SpectrumFitResult fit_spectrum(const Spectrum& data, const SpectrumModel& model,
                               std::optional<SpectrumGuess> init = std::nullopt, const FitOptions& options = {});

struct ResonancePoint {
  double field = 0.0;           // T
  double binding_energy = 0.0;  // J
  double sigma = 0.0;           // J
};

struct ResonanceFitResult {
  double b0 = 0.0;  // T
  double b0_sigma = 0.0;
  double delta_b = 0.0;  // T
  double delta_b_sigma = 0.0;
  Eigen::Matrix2d covariance = Eigen::Matrix2d::Zero();  // (B0, DeltaB) in T^2
  double residual_norm = 0.0;
  double reduced_chi_square = 0.0;
  int n_iterations = 0;
  bool converged = false;
  FitStatus status = FitStatus::MaxIterations;
  std::vector<double> residuals;
};

// Closed-form estimate from 1/(a/a_bg - 1) = (B0 - B)/DeltaB, linear in B. Exact for noiseless data.
std::optional<std::pair<double, double>> linearized_resonance_guess(std::span<const ResonancePoint> points,
                                                                    const ResonanceParams& params);

// Fits B0 and DeltaB (a_bg, mu fixed from `params`). Requires >= 3 points, all with
// a(B) > 0 and on one side of B0 for the template; the same must hold for the fit.
// Throws DegenerateDataError / InvalidBranchError.
ResonanceFitResult fit_resonance(std::span<const ResonancePoint> points, const ResonanceParams& params,
                                 const FitOptions& options = {});

struct FieldSpectrum {
  double field = 0.0;  // T
  Spectrum data;
};

struct SelfConsistentOptions {
  FitOptions fit;
  int max_rounds = 20;
  double delta_b_tol = 1e-7;  // T (1 mG)
};

struct SelfConsistentResult {
  ResonanceParams params;
  ResonanceFitResult resonance;
  std::vector<SpectrumFitResult> spectrum_fits;
  std::vector<double> delta_b_trace;  // seed first, then one entry per round
  int rounds = 0;
};

// Alternates per-field spectrum fits (chi evaluated with the current DeltaB) and a
// resonance fit until DeltaB moves by less than delta_b_tol. Needs >= 2 spectra at
// distinct fields. Throws IterationError with the DeltaB trace on non-convergence.
SelfConsistentResult self_consistent_chi_iteration(std::span<const FieldSpectrum> spectra, const SpectrumModel& seed,
                                                   const SelfConsistentOptions& options = {});

}  // namespace feshrf
