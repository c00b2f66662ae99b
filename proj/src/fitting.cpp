#include "feshrf/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "feshrf/errors.hpp"
#include "feshrf/quantities.hpp"

namespace feshrf {

ModelConfig SpectrumModel::at(double binding_energy, double lambda) const {
  ModelConfig cfg;
  cfg.mix = mix;
  cfg.trap = trap;
  cfg.pulse = pulse;
  cfg.bound = bound_state_from_energy(binding_energy, resonance);
  cfg.lambda = lambda;
  cfg.quadrature = quadrature;
  return cfg;
}

namespace {

std::vector<double> model_counts(const std::vector<double>& freqs, const SpectrumModel& model, double binding_energy,
                                 unsigned threads) {
  return compute_spectrum(freqs, model.at(binding_energy, 1.0), threads).counts();
}

struct WeightedData {
  std::vector<double> freqs;
  Eigen::VectorXd y;
  Eigen::VectorXd sigma;
  bool poisson = false;
};

WeightedData weigh(const Spectrum& data) {
  WeightedData w;
  const std::size_t n = data.points.size();
  w.freqs = data.frequencies();
  w.y.resize(static_cast<Eigen::Index>(n));
  w.sigma.resize(static_cast<Eigen::Index>(n));
  const auto with_sigma = std::count_if(data.points.begin(), data.points.end(),
                                        [](const SpectrumPoint& p) { return p.uncertainty.has_value(); });
  if (with_sigma != 0 && static_cast<std::size_t>(with_sigma) != n) {
    throw DomainError("fit_spectrum: count uncertainties must be given for all points or none");
  }
  w.poisson = with_sigma == 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = data.points[i];
    const auto k = static_cast<Eigen::Index>(i);
    w.y[k] = p.molecules;
    if (w.poisson) {
      w.sigma[k] = std::sqrt(std::max(p.molecules, 1.0));
    } else {
      if (!(*p.uncertainty > 0.0)) {
        throw DomainError("fit_spectrum: count uncertainty must be positive (point " + std::to_string(i) + ")");
      }
      w.sigma[k] = *p.uncertainty;
    }
  }
  return w;
}

// Weighted linear least-squares amplitude, clamped to the allowed range.
struct Amplitude {
  double value;
  bool clamped;
};

Amplitude profile_lambda(const Eigen::VectorXd& y, const Eigen::VectorXd& m, const Eigen::VectorXd& sigma) {
  const Eigen::VectorXd w = sigma.array().square().inverse();
  const double num = (w.array() * y.array() * m.array()).sum();
  const double den = (w.array() * m.array().square()).sum();
  if (!(den > 0.0)) return {0.0, true};
  const double raw = num / den;
  const double value = std::clamp(raw, 0.0, max_fit_lambda);
  return {value, value != raw};
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

SpectrumGuess initial_guess(const Spectrum& data, const SpectrumModel& model) {
  data.validate();
  const auto& pts = data.points;
  if (pts.size() < 5) throw DegenerateDataError("initial_guess: need at least 5 points");
  const auto peak = std::max_element(pts.begin(), pts.end(),
                                     [](const SpectrumPoint& a, const SpectrumPoint& b) { return a.molecules < b.molecules; });
  if (peak == pts.begin() || peak == pts.end() - 1 || !(peak->molecules > pts.front().molecules) ||
      !(peak->molecules > pts.back().molecules)) {
    throw DegenerateDataError("initial_guess: data has no interior maximum");
  }
  const double kt = thermal_energy(model.mix.temperature);
  double eb = hz_to_energy(peak->frequency) - model.pulse.atomic_energy - peak_thermal_shift * kt;
  if (!(eb > 0.0)) {
    throw DegenerateDataError("initial_guess: spectral peak lies below the atomic line plus thermal shift");
  }
  SpectrumGuess guess;
  guess.binding_energy = eb;
  const double m = molecule_number(peak->frequency, model.at(eb, 1.0));
  guess.lambda = m > 0.0 ? peak->molecules / m : 0.0;
  return guess;
}

SpectrumFitResult fit_spectrum(const Spectrum& data, const SpectrumModel& model, std::optional<SpectrumGuess> init,
                               const FitOptions& options) {
  data.validate();
  if (data.points.size() < 3) throw DegenerateDataError("fit_spectrum: need at least 3 points");
  const WeightedData w = weigh(data);
  const SpectrumGuess guess = init ? *init : initial_guess(data, model);
  const double eb0_hz = energy_to_hz(guess.binding_energy);
  if (!(eb0_hz > 0.0) || !(eb0_hz <= max_fit_binding_energy_hz)) {
    throw DomainError("fit_spectrum: initial binding energy outside (0, 10 MHz]");
  }

  // Solver parameter: E_b/h in Hz; lambda is eliminated at every evaluation.
  const ResidualFunction residual = [&](const Eigen::VectorXd& p) -> std::optional<Eigen::VectorXd> {
    const Eigen::VectorXd m = to_vector(model_counts(w.freqs, model, hz_to_energy(p[0]), options.threads));
    const Amplitude lam = profile_lambda(w.y, m, w.sigma);
    return ((w.y - lam.value * m).array() / w.sigma.array()).matrix();
  };

  Eigen::VectorXd p0(1);
  p0[0] = eb0_hz;
  Eigen::VectorXd lower(1), upper(1), scale(1);
  lower[0] = 0.0;
  upper[0] = max_fit_binding_energy_hz;
  scale[0] = eb0_hz;
  const LeastSquaresResult lm = levenberg_marquardt(residual, p0, lower, upper, scale, options.solver);

  SpectrumFitResult out;
  const double eb_hz = lm.params[0];
  out.binding_energy = hz_to_energy(eb_hz);
  const Eigen::VectorXd m = to_vector(model_counts(w.freqs, model, out.binding_energy, options.threads));
  const Amplitude lam = profile_lambda(w.y, m, w.sigma);
  out.lambda = lam.value;

  // Full two-parameter Jacobian at the optimum: d/dE_b at fixed lambda, d/dlambda exact.
  const double h = options.solver.fd_rel_step * eb_hz;
  const Eigen::VectorXd m_up = to_vector(model_counts(w.freqs, model, hz_to_energy(eb_hz + h), options.threads));
  const Eigen::VectorXd m_dn = to_vector(model_counts(w.freqs, model, hz_to_energy(eb_hz - h), options.threads));
  Eigen::MatrixXd jac(w.y.size(), 2);
  jac.col(0) = (-out.lambda * (m_up - m_dn) / (2.0 * h)).array() / w.sigma.array();
  jac.col(1) = (-m).array() / w.sigma.array();
  const Eigen::VectorXd r = ((w.y - out.lambda * m).array() / w.sigma.array()).matrix();

  const auto n = static_cast<double>(w.y.size());
  out.residual_norm = r.norm();
  out.reduced_chi_square = r.squaredNorm() / (n - 2.0);
  Eigen::Matrix2d cov_hz = (jac.transpose() * jac).inverse() * out.reduced_chi_square;
  Eigen::Matrix2d to_joule = Eigen::Matrix2d::Identity();
  to_joule(0, 0) = constants::planck_h;
  out.covariance = to_joule * cov_hz * to_joule;
  out.covariance(0, 1) = out.covariance(1, 0) = 0.5 * (out.covariance(0, 1) + out.covariance(1, 0));
  out.binding_energy_sigma = std::sqrt(std::max(out.covariance(0, 0), 0.0));
  out.lambda_sigma = std::sqrt(std::max(out.covariance(1, 1), 0.0));
  out.n_iterations = lm.iterations;
  out.poisson_weights = w.poisson;
  out.sigmas.assign(w.sigma.data(), w.sigma.data() + w.sigma.size());
  out.residuals.assign(r.data(), r.data() + r.size());

  out.status = lm.status;
  if (out.status == FitStatus::Converged && lam.clamped) out.status = FitStatus::AtBoundary;
  if (out.status == FitStatus::Converged && !(out.lambda > 3.0 * out.lambda_sigma)) {
    out.status = FitStatus::Unidentifiable;
  }
  out.converged = out.status == FitStatus::Converged;
  return out;
}

std::optional<std::pair<double, double>> linearized_resonance_guess(std::span<const ResonancePoint> points,
                                                                    const ResonanceParams& params) {
  if (points.size() < 2) return std::nullopt;
  std::vector<double> x, y;
  for (const auto& p : points) {
    if (!(p.binding_energy > 0.0)) return std::nullopt;
    const double s = length_from_binding_energy(p.binding_energy, params.pair) / params.a_bg - 1.0;
    if (s == 0.0) return std::nullopt;
    x.push_back(p.field);
    y.push_back(1.0 / s);
  }
  const auto n = static_cast<double>(x.size());
  double xm = 0.0, ym = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xm += x[i] / n;
    ym += y[i] / n;
  }
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - xm) * (x[i] - xm);
    sxy += (x[i] - xm) * (y[i] - ym);
  }
  if (!(sxx > 0.0) || sxy == 0.0) return std::nullopt;
  const double slope = sxy / sxx;  // -1/DeltaB
  const double delta_b = -1.0 / slope;
  const double b0 = xm + ym * delta_b;  // y = (B0 - B)/DeltaB at the centroid
  if (!std::isfinite(b0) || !std::isfinite(delta_b)) return std::nullopt;
  return std::make_pair(b0, delta_b);
}

namespace {

// All points must have a(B) > 0 and lie strictly on one side of B0.
bool on_single_bound_branch(std::span<const ResonancePoint> points, const ResonanceParams& params) {
  int side = 0;
  for (const auto& p : points) {
    const double d = p.field - params.b0;
    if (d == 0.0) return false;
    const int s = d > 0.0 ? 1 : -1;
    if (side != 0 && s != side) return false;
    side = s;
    if (!(params.a_bg * (1.0 - params.delta_b / d) > 0.0)) return false;
  }
  return true;
}

ResonanceFitResult fit_resonance_impl(std::span<const ResonancePoint> points, const ResonanceParams& params,
                                      const FitOptions& options, std::size_t min_points) {
  if (points.size() < min_points) {
    throw DegenerateDataError("fit_resonance: need at least " + std::to_string(min_points) + " points");
  }
  params.validate();
  for (const auto& p : points) {
    if (!(p.sigma > 0.0) || !(p.binding_energy > 0.0) || !std::isfinite(p.field)) {
      throw DomainError("fit_resonance: every point needs E_b > 0 and sigma > 0");
    }
  }
  if (!on_single_bound_branch(points, params)) {
    throw InvalidBranchError("fit_resonance: points are not all on the bound-state branch (a > 0, one side of B0 = " +
                             std::to_string(from_si(params.b0, Unit::Gauss)) + " G)");
  }

  ResonanceParams start = params;
  if (const auto guess = linearized_resonance_guess(points, params)) {
    ResonanceParams trial = params;
    trial.b0 = guess->first;
    trial.delta_b = guess->second;
    if (on_single_bound_branch(points, trial)) start = trial;
  }

  // Solve for (B0 - B_ref, DeltaB) so the relative finite-difference step is taken on
  // the detuning scale rather than on |B0|.
  double b_ref = points.front().field;
  for (const auto& p : points) {
    if (std::abs(p.field - start.b0) < std::abs(b_ref - start.b0)) b_ref = p.field;
  }

  auto with = [&](const Eigen::VectorXd& q) {
    ResonanceParams trial = params;
    trial.b0 = b_ref + q[0];
    trial.delta_b = q[1];
    return trial;
  };
  const ResidualFunction residual = [&](const Eigen::VectorXd& q) -> std::optional<Eigen::VectorXd> {
    const ResonanceParams trial = with(q);
    if (!(trial.delta_b != 0.0) || !on_single_bound_branch(points, trial)) return std::nullopt;
    Eigen::VectorXd r(static_cast<Eigen::Index>(points.size()));
    for (std::size_t i = 0; i < points.size(); ++i) {
      r[static_cast<Eigen::Index>(i)] =
          (binding_energy_from_field(points[i].field, trial) - points[i].binding_energy) / points[i].sigma;
    }
    return r;
  };

  Eigen::VectorXd q0(2);
  q0 << start.b0 - b_ref, start.delta_b;
  const double inf = std::numeric_limits<double>::infinity();
  Eigen::VectorXd lower(2), upper(2), scale(2);
  lower << -inf, -inf;
  upper << inf, inf;
  scale << std::max(std::abs(q0[0]), 1e-9), std::max(std::abs(q0[1]), 1e-9);
  const LeastSquaresResult lm = levenberg_marquardt(residual, q0, lower, upper, scale, options.solver);

  ResonanceFitResult out;
  const ResonanceParams fitted = with(lm.params);
  if (!on_single_bound_branch(points, fitted)) {
    throw InvalidBranchError("fit_resonance: fitted pole falls between the data fields, so no single bound branch");
  }
  out.b0 = fitted.b0;
  out.delta_b = fitted.delta_b;
  out.residuals.assign(lm.residuals.data(), lm.residuals.data() + lm.residuals.size());
  out.residual_norm = lm.residuals.norm();
  const auto dof = static_cast<double>(points.size()) - 2.0;
  out.reduced_chi_square = dof > 0.0 ? lm.residuals.squaredNorm() / dof : 1.0;
  out.covariance = (lm.jacobian.transpose() * lm.jacobian).inverse() * (dof > 0.0 ? out.reduced_chi_square : 1.0);
  out.covariance(0, 1) = out.covariance(1, 0) = 0.5 * (out.covariance(0, 1) + out.covariance(1, 0));
  out.b0_sigma = std::sqrt(std::max(out.covariance(0, 0), 0.0));
  out.delta_b_sigma = std::sqrt(std::max(out.covariance(1, 1), 0.0));
  out.n_iterations = lm.iterations;
  out.status = lm.status;
  out.converged = lm.status == FitStatus::Converged;
  return out;
}

}  // namespace

ResonanceFitResult fit_resonance(std::span<const ResonancePoint> points, const ResonanceParams& params,
                                 const FitOptions& options) {
  return fit_resonance_impl(points, params, options, 3);
}

SelfConsistentResult self_consistent_chi_iteration(std::span<const FieldSpectrum> spectra, const SpectrumModel& seed,
                                                   const SelfConsistentOptions& options) {
  if (spectra.size() < 2) throw DegenerateDataError("self-consistent iteration: need at least 2 spectra");
  for (std::size_t i = 0; i < spectra.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (spectra[i].field == spectra[j].field) {
        throw DegenerateDataError("self-consistent iteration: spectra must be at distinct fields");
      }
    }
  }

  SelfConsistentResult out;
  out.params = seed.resonance;
  out.delta_b_trace.push_back(out.params.delta_b);
  SpectrumModel model = seed;
  std::vector<std::optional<SpectrumGuess>> warm(spectra.size());

  for (int round = 1; round <= options.max_rounds; ++round) {
    model.resonance = out.params;
    out.spectrum_fits.clear();
    std::vector<ResonancePoint> points;
    for (std::size_t i = 0; i < spectra.size(); ++i) {
      auto fit = fit_spectrum(spectra[i].data, model, warm[i], options.fit);
      if (fit.status != FitStatus::Converged) {
        throw IterationError("self-consistent iteration: spectrum fit at field index " + std::to_string(i) +
                                 " failed (" + to_string(fit.status) + ")",
                             out.delta_b_trace);
      }
      warm[i] = SpectrumGuess{fit.binding_energy, fit.lambda};
      const double sigma = std::max(fit.binding_energy_sigma, 1e-9 * fit.binding_energy);
      points.push_back({spectra[i].field, fit.binding_energy, sigma});
      out.spectrum_fits.push_back(std::move(fit));
    }
    out.resonance = fit_resonance_impl(points, out.params, options.fit, 2);
    const double previous = out.params.delta_b;
    out.params.b0 = out.resonance.b0;
    out.params.delta_b = out.resonance.delta_b;
    out.delta_b_trace.push_back(out.params.delta_b);
    out.rounds = round;
    if (std::abs(out.params.delta_b - previous) < options.delta_b_tol) return out;
  }
  throw IterationError("self-consistent iteration: DeltaB did not settle within " +
                           std::to_string(options.max_rounds) + " rounds",
                       out.delta_b_trace);
}

}  // namespace feshrf
