#include "feshrf/spectrum_engine.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "feshrf/parallel.hpp"
#include "feshrf/quadrature.hpp"
#include "feshrf/quantities.hpp"

namespace feshrf {

double PulseParams::atomic_line_hz() const noexcept { return energy_to_hz(atomic_energy); }

void PulseParams::validate() const {
  if (!(rabi >= 0.0) || !std::isfinite(rabi)) throw DomainError("pulse: Rabi frequency must be non-negative");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw DomainError("pulse: duration must be positive");
  if (!std::isfinite(atomic_energy)) throw DomainError("pulse: atomic transition energy must be finite");
}

void ModelConfig::validate() const {
  mix.validate();
  pulse.validate();
  if (!(trap.omega_tilde > 0.0)) throw DomainError("model: effective trap frequency must be positive");
  if (!(bound.binding_energy > 0.0) || !(bound.binding_energy_prime > 0.0) || !(bound.scattering_length > 0.0)) {
    throw DomainError("model: bound state must have positive binding energies and scattering length");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw DomainError("model: lambda must be non-negative");
  if (!(quadrature.rel_tol > 0.0) || !(quadrature.abs_tol >= 0.0)) {
    throw DomainError("model: quadrature tolerances must be positive");
  }
}

void Spectrum::validate() const {
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!std::isfinite(points[i].frequency) || !std::isfinite(points[i].molecules)) {
      throw DomainError("spectrum: non-finite entry at index " + std::to_string(i));
    }
    if (i > 0 && !(points[i].frequency > points[i - 1].frequency)) {
      throw DomainError("spectrum: frequencies must be strictly increasing (index " + std::to_string(i) + ")");
    }
  }
}

std::vector<double> Spectrum::frequencies() const {
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(p.frequency);
  return out;
}

std::vector<double> Spectrum::counts() const {
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(p.molecules);
  return out;
}

namespace {

struct ReducedIntegrand {
  // All energies in units of k_B T.
  double centre;       // (h nu - E0 - E_b) / k_B T
  double sharpness;    // k_B T tau / hbar
  double eb;           // E_b / k_B T
  double ebp;          // E_b' / k_B T

  double operator()(double x) const {
    const double g = (centre - x) * sharpness;
    const double shape = std::sqrt(x * eb) * ebp / ((x + eb) * (x + eb) * (x + ebp));
    return std::exp(-x - g * g) * shape;
  }
};

ReducedIntegrand make_integrand(double frequency, const ModelConfig& cfg, double kt) {
  const double delta = hz_to_energy(frequency) - cfg.pulse.atomic_energy - cfg.bound.binding_energy;
  return {delta / kt, kt * cfg.pulse.tau / constants::hbar, cfg.bound.binding_energy / kt,
          cfg.bound.binding_energy_prime / kt};
}

// lambda (pi/2) Omega^2 tau^2 * h(0) * [hbar w~ chi (2/pi) (1 - a'/a)^2]; the reduced
// integral is dimensionless once the 1/k_B T of F_f cancels the k_B T of de.
double prefactor(const ModelConfig& cfg) {
  const double omega_tau = cfg.pulse.rabi * cfg.pulse.tau;
  const double overlap = 1.0 - cfg.bound.pair_scattering_length / cfg.bound.scattering_length;
  const double fc_scale = cfg.trap.level_spacing() * cfg.bound.chi.value * (2.0 / std::numbers::pi) * overlap * overlap;
  return cfg.lambda * (std::numbers::pi / 2.0) * omega_tau * omega_tau * pair_energy_density(0.0, cfg.mix, cfg.trap) *
         fc_scale;
}

}  // namespace

std::vector<Segment> integration_segments(double frequency, const ModelConfig& cfg) {
  const double kt = thermal_energy(cfg.mix.temperature);
  const auto integrand = make_integrand(frequency, cfg, kt);
  const double d = integrand.centre;
  const double w = gaussian_window_widths / integrand.sharpness;

  std::vector<Segment> pieces{{0.0, thermal_window_kt}};
  if (d + w > 0.0) pieces.push_back({std::max(0.0, d - w), d + w});
  std::sort(pieces.begin(), pieces.end(), [](const Segment& a, const Segment& b) { return a.lo < b.lo; });

  std::vector<Segment> merged;
  for (const auto& p : pieces) {
    if (!merged.empty() && p.lo <= merged.back().hi) {
      merged.back().hi = std::max(merged.back().hi, p.hi);
    } else {
      merged.push_back(p);
    }
  }
  // Split at the Gaussian centre and at the thermal cut so each piece is one-scale.
  std::vector<Segment> out;
  for (const auto& seg : merged) {
    std::vector<double> cuts{seg.lo, seg.hi};
    for (double c : {d, d - w, d + w, thermal_window_kt}) {
      if (c > seg.lo && c < seg.hi) cuts.push_back(c);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) out.push_back({cuts[i], cuts[i + 1]});
  }
  return out;
}

MoleculeEvaluation evaluate_molecule_number(double frequency, const ModelConfig& cfg) {
  cfg.validate();
  MoleculeEvaluation eval;
  const double scale = prefactor(cfg);
  if (scale == 0.0) return eval;

  const double kt = thermal_energy(cfg.mix.temperature);
  const auto integrand = make_integrand(frequency, cfg, kt);
  const auto segments = integration_segments(frequency, cfg);

  QuadratureResult q;
  if (cfg.quadrature.method == QuadratureMethod::FixedGaussLegendre) {
    // The integrand goes like sqrt(x) at 0; x = t^2 on the first piece keeps the fixed rule convergent.
    std::vector<Segment> rest;
    for (const auto& seg : segments) {
      if (seg.lo == 0.0) {
        const std::array<Segment, 1> root{{{0.0, std::sqrt(seg.hi)}}};
        const auto head = integrate_gauss_legendre([&](double t) { return 2.0 * t * integrand(t * t); }, root,
                                                   cfg.quadrature.fixed_panels);
        q.value += head.value;
        q.evaluations += head.evaluations;
        q.intervals += head.intervals;
      } else {
        rest.push_back(seg);
      }
    }
    const auto tail = integrate_gauss_legendre(integrand, rest, cfg.quadrature.fixed_panels);
    q.value += tail.value;
    q.evaluations += tail.evaluations;
    q.intervals += tail.intervals;
    q.abs_error = tail.abs_error;
    q.converged = true;
  } else {
    q = integrate_gk21(integrand, segments, cfg.quadrature.abs_tol / scale, cfg.quadrature.rel_tol,
                       cfg.quadrature.max_intervals);
    if (!q.converged) {
      throw NumericalError("molecule_number: quadrature did not reach rel_tol " +
                               std::to_string(cfg.quadrature.rel_tol),
                           q.value * scale, q.abs_error * scale);
    }
  }
  eval.value = q.value * scale;
  eval.abs_error = q.abs_error * scale;
  eval.evaluations = q.evaluations;
  return eval;
}

double molecule_number(double frequency, const ModelConfig& cfg) {
  return evaluate_molecule_number(frequency, cfg).value;
}

Spectrum compute_spectrum(std::span<const double> grid, const ModelConfig& cfg, unsigned threads) {
  if (grid.empty()) throw DomainError("compute_spectrum: grid is empty");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw DomainError("compute_spectrum: grid must be strictly increasing");
  }
  cfg.validate();
  Spectrum out;
  out.points.resize(grid.size());
  parallel_for(grid.size(), threads, [&](std::size_t i) {
    try {
      out.points[i] = {grid[i], molecule_number(grid[i], cfg), std::nullopt};
    } catch (const NumericalError& e) {
      throw SpectrumPointError(e, i);
    }
  });
  return out;
}

double spectral_edge(const ModelConfig& cfg) {
  return energy_to_hz(cfg.pulse.atomic_energy + cfg.bound.binding_energy);
}

double perturbative_parameter(const ModelConfig& cfg) {
  return cfg.pulse.rabi * std::sqrt(franck_condon_max(cfg.bound, cfg.trap)) * cfg.pulse.tau;
}

}  // namespace feshrf
