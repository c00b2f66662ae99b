#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "feshrf/fitting.hpp"
#include "feshrf/oracle.hpp"
#include "feshrf/run_config.hpp"

namespace feshrf::testing {

// 40K in 335 Hz, 87Rb in 244 Hz, 5e5 / 2.5e5 atoms, 730 nK, 45 kHz, 25 us, 545.994 G.
inline RunConfig lab_config() { return RunConfig{}; }

inline double kt_hz(const MixtureState& mix) { return energy_to_hz(thermal_energy(mix.temperature)); }

inline std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Edge - 2 kT/h to edge + 8 kT/h.
inline std::vector<double> spectrum_grid(const SpectrumModel& m, double eb_hz, std::size_t n) {
  const double edge = m.pulse.atomic_line_hz() + eb_hz;
  const double kt = kt_hz(m.mix);
  return linspace(edge - 2.0 * kt, edge + 8.0 * kt, n);
}

// Model counts times (1 + rel_noise * g); uncertainties rel_noise * model when requested.
inline Spectrum synthetic_spectrum(const SpectrumModel& m, double eb_hz, double lambda, const std::vector<double>& grid,
                                   double rel_noise, std::uint64_t seed, bool with_sigma) {
  Spectrum truth = compute_spectrum(grid, m.at(hz_to_energy(eb_hz), lambda));
  NormalSource noise(seed);
  for (auto& p : truth.points) {
    const double clean = p.molecules;
    if (rel_noise > 0.0) p.molecules = clean * (1.0 + rel_noise * noise.next());
    if (with_sigma) p.uncertainty = rel_noise > 0.0 ? rel_noise * clean : 1.0;
  }
  return truth;
}

// Six fields evenly spaced over 545.73 ... 546.19 G, in T.
inline std::vector<double> measurement_fields() {
  std::vector<double> f;
  for (double g : linspace(545.73, 546.19, 6)) f.push_back(to_si(g, Unit::Gauss));
  return f;
}

inline std::vector<ResonancePoint> synthetic_points(const ResonanceParams& truth, const std::vector<double>& fields,
                                                    double rel_noise, std::uint64_t seed) {
  NormalSource noise(seed);
  std::vector<ResonancePoint> pts;
  for (double b : fields) {
    const double eb = binding_energy_from_field(b, truth);
    const double sigma = rel_noise > 0.0 ? rel_noise * eb : 1e-3 * eb;
    pts.push_back({b, eb * (1.0 + rel_noise * noise.next()), sigma});
  }
  return pts;
}

}  // namespace feshrf::testing
