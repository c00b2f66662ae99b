#include "feshrf/commands.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "feshrf/csv_io.hpp"
#include "feshrf/errors.hpp"
#include "feshrf/oracle.hpp"
#include "feshrf/parallel.hpp"

#ifndef FESHRF_VERSION
#define FESHRF_VERSION "0.0.0"
#endif

namespace feshrf::cli {

using nlohmann::json;

std::string tool_version() { return FESHRF_VERSION; }

Range parse_range(std::string_view text, std::string_view flag) {
  const std::string f(flag);
  std::vector<double> parts;
  std::size_t start = 0;
  for (;;) {
    const auto colon = text.find(':', start);
    const std::string piece(text.substr(start, colon == std::string_view::npos ? std::string_view::npos : colon - start));
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(piece, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (piece.empty() || used != piece.size() || !std::isfinite(v)) {
      throw ConfigError(f + ": expected start:stop:step, got '" + std::string(text) + "'");
    }
    parts.push_back(v);
    if (colon == std::string_view::npos) break;
    start = colon + 1;
  }
  if (parts.size() != 3) throw ConfigError(f + ": expected start:stop:step, got '" + std::string(text) + "'");
  Range r{parts[0], parts[1], parts[2]};
  if (!(r.step > 0.0)) throw ConfigError(f + ": step must be positive");
  if (!(r.stop >= r.start)) throw ConfigError(f + ": stop must not be below start");
  if ((r.stop - r.start) / r.step > 1e7) throw ConfigError(f + ": more than 1e7 grid points");
  return r;
}

std::vector<double> expand(const Range& r) {
  const auto n = static_cast<std::size_t>(std::floor((r.stop - r.start) / r.step + 1e-9)) + 1;
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = r.start + static_cast<double>(i) * r.step;
  return g;
}

namespace {

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json report_header(const std::string& command, const RunConfig& cfg) {
  json j;
  j["schema_version"] = report_schema_version;
  j["tool"] = "feshrf";
  j["tool_version"] = tool_version();
  j["timestamp"] = utc_timestamp();
  j["command"] = command;
  j["config"] = to_json(cfg);
  return j;
}

json chi_json(const ChannelFactor& chi) {
  return {{"value", chi.value}, {"unclamped", chi.unclamped}, {"clamped", chi.clamped}};
}

void write_text(const std::optional<std::string>& path, std::ostream& fallback, const std::string& text) {
  if (!path) {
    fallback << text;
    return;
  }
  std::ofstream f(*path, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + *path + "'");
  f << text;
  if (!f) throw ConfigError("write failed for '" + *path + "'");
}

void write_report(const std::optional<std::string>& path, const json& report) {
  if (path) write_text(path, std::cout, report.dump(2) + "\n");
}

RunConfig load_config(const std::optional<std::string>& flag) {
  const auto path = resolve_config_path(flag);
  return path ? load_run_config(*path) : RunConfig{};
}

void model_warnings(const ModelConfig& m, std::ostream& err) {
  if (m.bound.chi.clamped) err << "warning: chi clamped to [0, 1] (unclamped " << m.bound.chi.unclamped << ")\n";
  const double p = perturbative_parameter(m);
  if (p > perturbative_limit) {
    err << "warning: perturbative parameter Omega tau sqrt(F_max) = " << p << " exceeds " << perturbative_limit << "\n";
  }
}

struct Common {
  std::optional<std::string> config;
  std::optional<std::string> out;
  unsigned threads = 0;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "JSON run configuration (default: $FESHRF_CONFIG, else built-in)");
  sub->add_option("--out", c.out, "output file (default: standard output for CSV)");
  sub->add_option("--threads", c.threads, "worker threads, 0 = all cores")->capture_default_str();
}

int cmd_spectrum(const Common& c, const std::string& grid_text, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = load_config(c.config);
  const auto grid = expand(parse_range(grid_text, "--grid"));
  const ModelConfig model = cfg.model();
  model_warnings(model, err);
  const Spectrum s = compute_spectrum(grid, model, c.threads);
  std::ostringstream csv;
  write_model_spectrum_csv(csv, s);
  write_text(c.out, out, csv.str());
  return Ok;
}

int cmd_fit_spectrum(const Common& c, const std::string& data_path, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = load_config(c.config);
  const Spectrum data = read_spectrum_csv(std::filesystem::path(data_path));
  const SpectrumModel model = cfg.spectrum_model();
  FitOptions opts;
  opts.threads = c.threads;
  const SpectrumFitResult fit = fit_spectrum(data, model, std::nullopt, opts);

  const ModelConfig best = model.at(fit.binding_energy, fit.lambda);
  model_warnings(best, err);
  double worst_rel_error = 0.0;
  for (const auto& p : data.points) {
    const auto e = evaluate_molecule_number(p.frequency, best);
    if (e.value > 0.0) worst_rel_error = std::max(worst_rel_error, e.abs_error / e.value);
  }

  const double khz = energy_to_khz(1.0);
  json report = report_header("fit-spectrum", cfg);
  json pts = json::array();
  for (const auto& p : data.points) {
    pts.push_back({p.frequency, p.molecules, p.uncertainty ? json(*p.uncertainty) : json(nullptr)});
  }
  report["data"] = {{"path", data_path}, {"columns", {"rf_frequency_hz", "molecule_count", "count_uncertainty"}},
                    {"points", pts}};
  report["results"] = {
      {"binding_energy_khz", energy_to_khz(fit.binding_energy)},
      {"binding_energy_sigma_khz", energy_to_khz(fit.binding_energy_sigma)},
      {"lambda", fit.lambda},
      {"lambda_sigma", fit.lambda_sigma},
      {"covariance", {{fit.covariance(0, 0) * khz * khz, fit.covariance(0, 1) * khz},
                      {fit.covariance(1, 0) * khz, fit.covariance(1, 1)}}},
      {"covariance_order", {"binding_energy_khz", "lambda"}},
      {"residual_norm", fit.residual_norm},
      {"reduced_chi_square", fit.reduced_chi_square},
      {"iterations", fit.n_iterations},
      {"converged", fit.converged},
      {"status", to_string(fit.status)},
      {"weights", fit.poisson_weights ? "poisson" : "data"},
      {"residuals", fit.residuals}};
  report["diagnostics"] = {{"chi", chi_json(best.bound.chi)},
                           {"perturbative_parameter", perturbative_parameter(best)},
                           {"perturbative_warning", perturbative_parameter(best) > perturbative_limit},
                           {"quadrature_rel_tol", best.quadrature.rel_tol},
                           {"quadrature_max_rel_error", worst_rel_error}};
  write_report(c.out, report);

  out << "E_b = " << format_number(energy_to_khz(fit.binding_energy)) << " +- "
      << format_number(energy_to_khz(fit.binding_energy_sigma)) << " kHz\n";
  out << "lambda = " << format_number(fit.lambda) << " +- " << format_number(fit.lambda_sigma) << "\n";
  if (!fit.converged) {
    err << "fit did not converge: " << to_string(fit.status) << "\n";
    return FitFailure;
  }
  return Ok;
}

int cmd_fit_resonance(const Common& c, const std::string& points_path, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = load_config(c.config);
  const auto points = read_points_csv(std::filesystem::path(points_path));
  FitOptions opts;
  opts.threads = c.threads;
  const ResonanceFitResult fit = fit_resonance(points, cfg.resonance(), opts);

  const double g = from_si(1.0, Unit::Gauss);
  json report = report_header("fit-resonance", cfg);
  json pts = json::array();
  for (const auto& p : points) {
    pts.push_back({from_si(p.field, Unit::Gauss), energy_to_khz(p.binding_energy), energy_to_khz(p.sigma)});
  }
  report["data"] = {{"path", points_path}, {"columns", {"b_field_gauss", "binding_energy_khz", "sigma_khz"}},
                    {"points", pts}};
  report["results"] = {
      {"b0_gauss", fit.b0 * g},
      {"b0_sigma_gauss", fit.b0_sigma * g},
      {"delta_b_gauss", fit.delta_b * g},
      {"delta_b_sigma_gauss", fit.delta_b_sigma * g},
      {"covariance", {{fit.covariance(0, 0) * g * g, fit.covariance(0, 1) * g * g},
                      {fit.covariance(1, 0) * g * g, fit.covariance(1, 1) * g * g}}},
      {"covariance_order", {"b0_gauss", "delta_b_gauss"}},
      {"residual_norm", fit.residual_norm},
      {"reduced_chi_square", fit.reduced_chi_square},
      {"iterations", fit.n_iterations},
      {"converged", fit.converged},
      {"status", to_string(fit.status)},
      {"residuals", fit.residuals}};
  report["diagnostics"] = json::object();
  write_report(c.out, report);

  out << "B0 = " << format_number(fit.b0 * g) << " +- " << format_number(fit.b0_sigma * g) << " G\n";
  out << "DeltaB = " << format_number(fit.delta_b * g) << " +- " << format_number(fit.delta_b_sigma * g) << " G\n";
  if (!fit.converged) {
    err << "fit did not converge: " << to_string(fit.status) << "\n";
    return FitFailure;
  }
  return Ok;
}

int cmd_binding_curve(const Common& c, const std::string& range_text, std::ostream& out) {
  const RunConfig cfg = load_config(c.config);
  const Range range = parse_range(range_text, "--field-range");
  const ResonanceParams res = cfg.resonance();
  const double b0_g = from_si(res.b0, Unit::Gauss);
  if (range.start <= b0_g && b0_g <= range.stop) {
    throw PoleError("--field-range: range crosses the resonance pole at B0 = " + format_number(b0_g) + " G");
  }
  std::vector<BindingCurveRow> rows;
  for (double b : expand(range)) {
    const double field = to_si(b, Unit::Gauss);
    const auto bound = bound_state_from_field(field, res);
    rows.push_back({field, bound.binding_energy, bound.chi.value});
  }
  std::ostringstream csv;
  write_binding_curve_csv(csv, rows);
  write_text(c.out, out, csv.str());
  return Ok;
}

json check(const std::string& name, bool passed, double value, const std::string& criterion) {
  return {{"name", name}, {"passed", passed}, {"value", value}, {"criterion", criterion}};
}

}  // namespace

ValidationOutcome run_validation(const RunConfig& cfg, const ValidationOptions& options) {
  if (options.samples < min_gof_samples) {
    throw DegenerateDataError("oracle: need at least " + std::to_string(min_gof_samples) + " samples");
  }
  ValidationOutcome outcome;
  json& rep = outcome.report;
  json checks = json::array();

  const EffectiveTrap eff = effective_trap(cfg.trap());
  SamplingConfig sc;
  sc.trap.omega_a = eff.omega_bar;
  sc.trap.omega_b = eff.omega_bar;
  sc.pair = cfg.pair();
  sc.temperature = to_si(cfg.temperature_nk, Unit::NanoKelvin);
  const double t_expected = sc.temperature * options.temperature_corruption;

  const auto samples = sample_pairs(options.samples, sc, options.seed, options.threads);
  const auto rel = relative_energy_gof(samples, t_expected, options.bins);
  const auto cm = center_of_mass_energy_gof(samples, t_expected, options.bins);
  const auto wrong = relative_energy_gof(samples, 1.5 * t_expected, options.bins);
  const auto mom = sample_moments(samples);
  const double n = static_cast<double>(options.samples);
  const double kt = thermal_energy(t_expected);

  checks.push_back(check("relative_energy_gamma3", rel.p_value > 0.01, rel.p_value, "p > 0.01"));
  checks.push_back(check("center_of_mass_energy_gamma3", cm.p_value > 0.01, cm.p_value, "p > 0.01"));
  checks.push_back(check("negative_control_1.5T", wrong.p_value < 1e-6, wrong.p_value, "p < 1e-6"));
  checks.push_back(
      check("energy_identity", mom.max_identity_error < 1e-12, mom.max_identity_error, "max relative error < 1e-12"));
  const double r_bound = 3.0 / std::sqrt(n);
  checks.push_back(check("relative_cm_independence", std::abs(mom.pearson_rel_cm) < r_bound, mom.pearson_rel_cm,
                         "|pearson r| < 3/sqrt(n)"));
  const double z = (mom.mean_atom - 3.0 * kt) / mom.sem_atom;
  checks.push_back(check("equipartition", std::abs(z) < 3.0, z, "|mean atom energy - 3 kT| < 3 standard errors"));

  rep["sampling"] = {{"samples", options.samples},
                     {"seed", options.seed},
                     {"bins", options.bins},
                     {"temperature_nk", cfg.temperature_nk},
                     {"expected_temperature_nk", from_si(t_expected, Unit::NanoKelvin)},
                     {"relative", {{"chi_square", rel.chi_square}, {"dof", rel.degrees_of_freedom}, {"p_value", rel.p_value}}},
                     {"center_of_mass", {{"chi_square", cm.chi_square}, {"dof", cm.degrees_of_freedom}, {"p_value", cm.p_value}}},
                     {"mean_relative_over_kt", mom.mean_rel / kt},
                     {"mean_cm_over_kt", mom.mean_cm / kt},
                     {"pearson_rel_cm", mom.pearson_rel_cm},
                     {"max_identity_error", mom.max_identity_error}};

  // Engine vs reference quadrature across the line.
  const ModelConfig model = cfg.model();
  const double edge = spectral_edge(model);
  const double kt_hz = energy_to_hz(thermal_energy(model.mix.temperature));
  const double rel_tol = std::clamp(model.quadrature.rel_tol, 1e-12, 1e-4);
  std::vector<double> grid(options.grid_points);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid[i] = edge - 2.0 * kt_hz + 14.0 * kt_hz * static_cast<double>(i) / static_cast<double>(grid.size() - 1);
  }
  std::vector<double> engine(grid.size()), reference(grid.size());
  parallel_for(grid.size(), options.threads, [&](std::size_t i) {
    engine[i] = molecule_number(grid[i], model);
    reference[i] = reference_integral(grid[i], model, rel_tol).value;
  });
  double worst = 0.0;
  bool agree = true;
  double peak = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double diff = std::abs(engine[i] - reference[i]);
    const double scale = std::abs(reference[i]);
    if (scale > 0.0) worst = std::max(worst, diff / scale);
    if (diff > 2.0 * rel_tol * scale) agree = false;
    peak = std::max(peak, engine[i]);
  }
  checks.push_back(check("engine_vs_reference_quadrature", agree, worst, "pointwise relative difference <= 2 rel_tol"));
  rep["quadrature"] = {{"rel_tol", rel_tol},
                       {"grid_hz", grid},
                       {"engine", engine},
                       {"reference", reference},
                       {"max_relative_difference", worst}};

  const double ratio = peak / reference_peak_molecules;
  const bool scale_ok = ratio < absolute_scale_factor && ratio > 1.0 / absolute_scale_factor;
  checks.push_back(check("absolute_scale", scale_ok, ratio, "peak / 5e4 within a factor 30"));

  json scale = {{"peak_molecules", peak}, {"reference_molecules", reference_peak_molecules}, {"ratio", ratio}};
  try {
    const double eb_formula =
        energy_to_khz(binding_energy_from_field(to_si(spectroscopic_field_gauss, Unit::Gauss), cfg.resonance()));
    scale["binding_energy_note"] = {
        {"field_gauss", spectroscopic_field_gauss},
        {"from_resonance_formula_khz", eb_formula},
        {"spectroscopic_khz", spectroscopic_binding_energy_khz},
        {"note", "E_b(B) from the resonance formula with the fitted B0 and DeltaB differs from the spectroscopic "
                 "binding energy at this field; the model uses the formula as written"}};
  } catch (const Error&) {
    scale["binding_energy_note"] = nullptr;
  }
  rep["absolute_scale"] = scale;

  outcome.passed = true;
  for (const auto& c : checks) outcome.passed = outcome.passed && c["passed"].get<bool>();
  rep["checks"] = checks;
  rep["passed"] = outcome.passed;
  return outcome;
}

namespace {

int cmd_oracle(const Common& c, ValidationOptions opts, bool seed_given, std::ostream& out) {
  const RunConfig cfg = load_config(c.config);
  if (!seed_given) opts.seed = cfg.seed;
  opts.threads = c.threads;
  const ValidationOutcome v = run_validation(cfg, opts);
  json report = report_header("oracle", cfg);
  report["results"] = v.report;
  report["diagnostics"] = {{"temperature_corruption", opts.temperature_corruption}};
  write_report(c.out, report);
  for (const auto& chk : v.report["checks"]) {
    out << (chk["passed"].get<bool>() ? "PASS " : "FAIL ") << chk["name"].get<std::string>() << " value="
        << format_number(chk["value"].get<double>()) << " (" << chk["criterion"].get<std::string>() << ")\n";
  }
  const auto& note = v.report["absolute_scale"];
  out << "peak/5e4 ratio = " << format_number(note["ratio"].get<double>()) << "\n";
  if (!note["binding_energy_note"].is_null()) {
    out << "E_b(" << spectroscopic_field_gauss
        << " G): resonance formula " << format_number(note["binding_energy_note"]["from_resonance_formula_khz"].get<double>())
        << " kHz vs spectroscopic " << spectroscopic_binding_energy_khz << " kHz\n";
  }
  return v.passed ? Ok : FitFailure;
}

}  // namespace

int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"RF association spectra of heteronuclear Feshbach molecules", "feshrf"};
  app.set_version_flag("--version", tool_version());
  app.require_subcommand(1);

  Common common;
  std::string grid, field_range, data_path, points_path;
  ValidationOptions vopts;

  auto* spectrum = app.add_subcommand("spectrum", "model spectrum on a frequency grid (CSV)");
  add_common(spectrum, common);
  spectrum->add_option("--grid", grid, "start:stop:step in Hz")->required();

  auto* fit_spec = app.add_subcommand("fit-spectrum", "fit E_b and lambda to a measured spectrum");
  add_common(fit_spec, common);
  fit_spec->add_option("data", data_path, "spectrum CSV")->required();

  auto* fit_res = app.add_subcommand("fit-resonance", "fit B0 and DeltaB to binding energies");
  add_common(fit_res, common);
  fit_res->add_option("points", points_path, "points CSV")->required();

  auto* oracle = app.add_subcommand("oracle", "Monte Carlo and reference-quadrature validation");
  add_common(oracle, common);
  oracle->add_option("--samples", vopts.samples, "Monte Carlo samples (>= 1e4)")->capture_default_str();
  auto* seed_opt = oracle->add_option("--seed", vopts.seed, "RNG seed (default: config seed)");
  oracle->add_option("--corrupt-temperature", vopts.temperature_corruption)->group("");

  auto* curve = app.add_subcommand("binding-curve", "E_b(B) and chi(B) table (CSV)");
  add_common(curve, common);
  curve->add_option("--field-range", field_range, "start:stop:step in G")->required();

  std::vector<std::string> argv_store;
  argv_store.emplace_back("feshrf");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? Ok : InputError;
  }

  try {
    if (*spectrum) return cmd_spectrum(common, grid, out, err);
    if (*fit_spec) return cmd_fit_spectrum(common, data_path, out, err);
    if (*fit_res) return cmd_fit_resonance(common, points_path, out, err);
    if (*oracle) return cmd_oracle(common, vopts, seed_opt->count() > 0, out);
    if (*curve) return cmd_binding_curve(common, field_range, out);
  } catch (const IterationError& e) {
    err << "error: " << e.what() << "\n";
    return FitFailure;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return NumericalFailure;
  } catch (const Error& e) {
    // ConfigError, SchemaError, DomainError (pole, branch, bound state), DegenerateDataError.
    err << "error: " << e.what() << "\n";
    return InputError;
  }
  return InputError;
}

}  // namespace feshrf::cli
