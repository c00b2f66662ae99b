#include "feshrf/oracle.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "feshrf/errors.hpp"
#include "feshrf/parallel.hpp"
#include "feshrf/resonance_model.hpp"

namespace feshrf {

double NormalSource::next() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = rng_.uniform();
  const double u2 = rng_.uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

namespace {

std::uint64_t chunk_seed(std::uint64_t master, std::uint64_t chunk) {
  SplitMix64 mix(master ^ (chunk * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL));
  mix.next();
  return mix.next();
}

}  // namespace

std::vector<PairSample> sample_pairs(std::size_t n, const SamplingConfig& cfg, std::uint64_t seed, unsigned threads) {
  cfg.trap.validate();
  const double kt = thermal_energy(cfg.temperature);
  const double ma = cfg.pair.mass_a();
  const double mb = cfg.pair.mass_b();
  const double big_m = cfg.pair.total_mass();
  const double mu = cfg.pair.reduced_mass();
  const EffectiveTrap eff = effective_trap(cfg.trap);

  std::vector<PairSample> out(n);
  const std::size_t chunks = (n + sample_chunk_size - 1) / sample_chunk_size;
  parallel_for(chunks, threads, [&](std::size_t c) {
    NormalSource normal(chunk_seed(seed, c));
    const std::size_t lo = c * sample_chunk_size;
    const std::size_t hi = std::min(n, lo + sample_chunk_size);
    for (std::size_t s = lo; s < hi; ++s) {
      PairSample sample;
      for (std::size_t i = 0; i < 3; ++i) {
        const double wa = cfg.trap.omega_a[i];
        const double wb = cfg.trap.omega_b[i];
        const double xa = std::sqrt(kt / ma) / wa * normal.next();
        const double pa = std::sqrt(ma * kt) * normal.next();
        const double xb = std::sqrt(kt / mb) / wb * normal.next();
        const double pb = std::sqrt(mb * kt) * normal.next();
        sample.eps_atoms += pa * pa / (2.0 * ma) + 0.5 * ma * wa * wa * xa * xa + pb * pb / (2.0 * mb) +
                            0.5 * mb * wb * wb * xb * xb;

        const double big_r = (ma * xa + mb * xb) / big_m;
        const double big_p = pa + pb;
        const double r = xa - xb;
        const double p = (mb * pa - ma * pb) / big_m;
        const double w2 = eff.omega_bar[i] * eff.omega_bar[i];
        sample.eps_cm += big_p * big_p / (2.0 * big_m) + 0.5 * big_m * w2 * big_r * big_r;
        sample.eps_rel += p * p / (2.0 * mu) + 0.5 * mu * w2 * r * r;
      }
      sample.eps_total = sample.eps_rel + sample.eps_cm;
      out[s] = sample;
    }
  });
  return out;
}

HistogramReport gamma3_energy_gof(std::span<const double> energies, double temperature, int bins) {
  if (energies.size() < min_gof_samples) {
    throw DegenerateDataError("goodness of fit: need at least " + std::to_string(min_gof_samples) + " samples");
  }
  if (bins < 2) throw DomainError("goodness of fit: need at least 2 bins");
  const double kt = thermal_energy(temperature);
  HistogramReport rep;
  rep.samples = energies.size();
  rep.bin_edges.resize(static_cast<std::size_t>(bins) + 1);
  rep.bin_edges.front() = 0.0;
  rep.bin_edges.back() = std::numeric_limits<double>::infinity();
  for (int k = 1; k < bins; ++k) {
    rep.bin_edges[static_cast<std::size_t>(k)] = kt * boost::math::gamma_p_inv(3.0, static_cast<double>(k) / bins);
  }
  rep.observed.assign(static_cast<std::size_t>(bins), 0.0);
  rep.expected.assign(static_cast<std::size_t>(bins), static_cast<double>(energies.size()) / bins);
  for (double e : energies) {
    const auto it = std::upper_bound(rep.bin_edges.begin() + 1, rep.bin_edges.end() - 1, e);
    rep.observed[static_cast<std::size_t>(it - (rep.bin_edges.begin() + 1))] += 1.0;
  }
  for (int k = 0; k < bins; ++k) {
    const double d = rep.observed[static_cast<std::size_t>(k)] - rep.expected[static_cast<std::size_t>(k)];
    rep.chi_square += d * d / rep.expected[static_cast<std::size_t>(k)];
  }
  rep.degrees_of_freedom = bins - 1;
  rep.p_value = boost::math::gamma_q(0.5 * rep.degrees_of_freedom, 0.5 * rep.chi_square);
  return rep;
}

HistogramReport relative_energy_gof(std::span<const PairSample> samples, double temperature, int bins) {
  std::vector<double> e;
  e.reserve(samples.size());
  for (const auto& s : samples) e.push_back(s.eps_rel);
  return gamma3_energy_gof(e, temperature, bins);
}

HistogramReport center_of_mass_energy_gof(std::span<const PairSample> samples, double temperature, int bins) {
  std::vector<double> e;
  e.reserve(samples.size());
  for (const auto& s : samples) e.push_back(s.eps_cm);
  return gamma3_energy_gof(e, temperature, bins);
}

SampleMoments sample_moments(std::span<const PairSample> samples) {
  SampleMoments m;
  if (samples.empty()) return m;
  const auto n = static_cast<double>(samples.size());
  for (const auto& s : samples) {
    m.mean_rel += s.eps_rel;
    m.mean_cm += s.eps_cm;
    m.mean_atom += 0.5 * s.eps_atoms;
    if (s.eps_atoms > 0.0) {
      m.max_identity_error = std::max(m.max_identity_error, std::abs(s.eps_atoms - s.eps_total) / s.eps_atoms);
    }
  }
  m.mean_rel /= n;
  m.mean_cm /= n;
  m.mean_atom /= n;
  double srr = 0.0, scc = 0.0, src = 0.0, saa = 0.0;
  for (const auto& s : samples) {
    const double dr = s.eps_rel - m.mean_rel;
    const double dc = s.eps_cm - m.mean_cm;
    const double da = 0.5 * s.eps_atoms - m.mean_atom;
    srr += dr * dr;
    scc += dc * dc;
    src += dr * dc;
    saa += da * da;
  }
  m.pearson_rel_cm = (srr > 0.0 && scc > 0.0) ? src / std::sqrt(srr * scc) : 0.0;
  m.sem_atom = n > 1.0 ? std::sqrt(saa / (n - 1.0) / n) : 0.0;
  return m;
}

namespace {

struct RombergEstimate {
  double value;
  double error;
};

template <class F>
RombergEstimate romberg(const F& f, double a, double b, int levels) {
  std::vector<double> prev, cur;
  double h = b - a;
  double trap = 0.5 * h * (f(a) + f(b));
  prev.push_back(trap);
  RombergEstimate est{trap, std::numeric_limits<double>::infinity()};
  std::size_t points = 1;
  for (int k = 1; k <= levels; ++k) {
    h *= 0.5;
    double sum = 0.0;
    for (std::size_t i = 0; i < points; ++i) sum += f(a + (2.0 * static_cast<double>(i) + 1.0) * h);
    points *= 2;
    cur.assign(static_cast<std::size_t>(k) + 1, 0.0);
    cur[0] = 0.5 * prev[0] + h * sum;
    double factor = 1.0;
    for (int j = 1; j <= k; ++j) {
      factor *= 4.0;
      cur[static_cast<std::size_t>(j)] =
          cur[static_cast<std::size_t>(j) - 1] +
          (cur[static_cast<std::size_t>(j) - 1] - prev[static_cast<std::size_t>(j) - 1]) / (factor - 1.0);
    }
    est = {cur.back(), std::abs(cur.back() - prev.back())};
    prev.swap(cur);
  }
  return est;
}

template <class F>
bool adaptive_romberg(const F& f, double a, double b, double tol, int depth, double& sum, double& err) {
  const auto est = romberg(f, a, b, 6);
  const double floor = 1e-14 * std::abs(est.value);
  if (est.error <= std::max(tol, floor)) {
    sum += est.value;
    err += est.error;
    return true;
  }
  if (depth >= 48) {
    sum += est.value;
    err += est.error;
    return false;
  }
  const double mid = 0.5 * (a + b);
  const bool left = adaptive_romberg(f, a, mid, 0.5 * tol, depth + 1, sum, err);
  const bool right = adaptive_romberg(f, mid, b, 0.5 * tol, depth + 1, sum, err);
  return left && right;
}

}  // namespace

MoleculeEvaluation reference_integral(double frequency, const ModelConfig& cfg, double rel_tol) {
  if (!(rel_tol >= 1e-12 && rel_tol <= 1e-4)) throw DomainError("reference_integral: rel_tol must lie in [1e-12, 1e-4]");
  cfg.validate();
  MoleculeEvaluation eval;
  const double omega_tau = cfg.pulse.rabi * cfg.pulse.tau;
  const double scale = cfg.lambda * (std::numbers::pi / 2.0) * omega_tau * omega_tau;
  if (scale == 0.0) return eval;

  const double kt = thermal_energy(cfg.mix.temperature);
  const double centre = hz_to_energy(frequency) - cfg.pulse.atomic_energy - cfg.bound.binding_energy;
  const double width = constants::hbar / cfg.pulse.tau;

  // e = kT u^2, de = 2 kT u du; the substitution removes the sqrt(e) edge of F_f.
  auto integrand = [&](double u) {
    const double e = kt * u * u;
    const double g = (centre - e) / width;
    return 2.0 * kt * u * pair_energy_density(e, cfg.mix, cfg.trap) * std::exp(-g * g) *
           franck_condon(e, cfg.bound, cfg.trap);
  };

  const double e_max = std::max(45.0 * kt, centre + 11.0 * width);
  std::vector<double> cuts{0.0, e_max};
  for (double c : {centre - 11.0 * width, centre, centre + 11.0 * width, 45.0 * kt}) {
    if (c > 0.0 && c < e_max) cuts.push_back(c);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  std::vector<double> u_cuts;
  for (double c : cuts) u_cuts.push_back(std::sqrt(c / kt));

  double coarse = 0.0;
  for (std::size_t i = 0; i + 1 < u_cuts.size(); ++i) coarse += romberg(integrand, u_cuts[i], u_cuts[i + 1], 7).value;
  if (coarse == 0.0) return eval;

  const double tol = 0.25 * rel_tol * std::abs(coarse);
  const double total_len = u_cuts.back() - u_cuts.front();
  double sum = 0.0;
  double err = 0.0;
  bool ok = true;
  for (std::size_t i = 0; i + 1 < u_cuts.size(); ++i) {
    const double share = (u_cuts[i + 1] - u_cuts[i]) / total_len;
    ok = adaptive_romberg(integrand, u_cuts[i], u_cuts[i + 1], tol * share, 0, sum, err) && ok;
  }
  eval.value = scale * sum;
  eval.abs_error = scale * err;
  if (!ok) throw NumericalError("reference_integral: subdivision limit reached", eval.value, eval.abs_error);
  return eval;
}

}  // namespace feshrf
