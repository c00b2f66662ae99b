#include "feshrf/run_config.hpp"

#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <set>

#include "feshrf/errors.hpp"

namespace feshrf {

using nlohmann::json;

SpeciesPair RunConfig::pair() const {
  return SpeciesPair(label_a, mass_a_amu * constants::amu, label_b, mass_b_amu * constants::amu);
}

TrapConfig RunConfig::trap() const {
  TrapConfig t;
  for (std::size_t i = 0; i < 3; ++i) {
    t.omega_a[i] = angular_from_hz(freq_a_hz[i]);
    t.omega_b[i] = angular_from_hz(freq_b_hz[i]);
  }
  return t;
}

MixtureState RunConfig::mixture() const { return {n_a, n_b, to_si(temperature_nk, Unit::NanoKelvin)}; }

ResonanceParams RunConfig::resonance() const {
  ResonanceParams p;
  p.a_bg = to_si(a_bg_nm, Unit::Nanometer);
  p.b0 = to_si(b0_gauss, Unit::Gauss);
  p.delta_b = to_si(delta_b_gauss, Unit::Gauss);
  p.delta_mu = to_si(delta_mu_bohr, Unit::BohrMagneton);
  p.a_prime = to_si(a_prime_nm, Unit::Nanometer);
  p.pair = pair();
  return p;
}

PulseParams RunConfig::pulse() const {
  return {angular_from_hz(rabi_khz * 1e3), to_si(tau_us, Unit::Microsecond), hz_to_energy(atomic_line_hz)};
}

BoundStateInfo RunConfig::bound_state() const {
  if (binding_energy_khz) return bound_state_from_energy(khz_to_energy(*binding_energy_khz), resonance());
  return bound_state_from_field(to_si(field_gauss, Unit::Gauss), resonance());
}

ModelConfig RunConfig::model() const {
  ModelConfig m;
  m.mix = mixture();
  m.trap = effective_trap(trap());
  m.pulse = pulse();
  m.bound = bound_state();
  m.lambda = lambda;
  m.quadrature = quadrature;
  return m;
}

SpectrumModel RunConfig::spectrum_model() const {
  return {mixture(), effective_trap(trap()), pulse(), resonance(), quadrature};
}

void RunConfig::validate() const {
  try {
    trap().validate();
    mixture().validate();
    resonance().validate();
    model().validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

namespace {

class ObjectReader {
 public:
  ObjectReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  void allow(std::initializer_list<const char*> keys) {
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [key, value] : j_.items()) {
      if (!allowed.count(key)) throw ConfigError(where_ + ": unknown key '" + key + "'");
    }
  }

  bool has(const char* key) const { return j_.contains(key); }
  const json& at(const char* key) const { return j_.at(key); }
  std::string path(const char* key) const { return where_.empty() ? key : where_ + "." + key; }

  void number(const char* key, double& out) const {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number()) throw ConfigError(path(key) + ": expected a number");
    out = v.get<double>();
  }
  void string(const char* key, std::string& out) const {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_string()) throw ConfigError(path(key) + ": expected a string");
    out = v.get<std::string>();
  }
  void axes(const char* key, AxisFrequencies& out) const {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (v.is_number()) {
      out.fill(v.get<double>());
    } else if (v.is_array() && v.size() == 3 && v[0].is_number() && v[1].is_number() && v[2].is_number()) {
      for (std::size_t i = 0; i < 3; ++i) out[i] = v[i].get<double>();
    } else {
      throw ConfigError(path(key) + ": expected a number or an array of 3 numbers");
    }
  }

 private:
  const json& j_;
  std::string where_;
};

}  // namespace

RunConfig parse_run_config(const json& j) {
  RunConfig c;
  ObjectReader top(j, "");
  top.allow({"species", "trap", "atoms", "temperature_nk", "resonance", "pulse", "field_gauss", "binding_energy_khz",
             "lambda", "quadrature", "seed"});

  if (top.has("species")) {
    ObjectReader r(top.at("species"), "species");
    r.allow({"label_a", "mass_a_amu", "label_b", "mass_b_amu"});
    r.string("label_a", c.label_a);
    r.number("mass_a_amu", c.mass_a_amu);
    r.string("label_b", c.label_b);
    r.number("mass_b_amu", c.mass_b_amu);
  }
  if (top.has("trap")) {
    ObjectReader r(top.at("trap"), "trap");
    r.allow({"freq_a_hz", "freq_b_hz"});
    r.axes("freq_a_hz", c.freq_a_hz);
    r.axes("freq_b_hz", c.freq_b_hz);
  }
  if (top.has("atoms")) {
    ObjectReader r(top.at("atoms"), "atoms");
    r.allow({"n_a", "n_b"});
    r.number("n_a", c.n_a);
    r.number("n_b", c.n_b);
  }
  top.number("temperature_nk", c.temperature_nk);
  if (top.has("resonance")) {
    ObjectReader r(top.at("resonance"), "resonance");
    r.allow({"a_bg_nm", "b0_gauss", "delta_b_gauss", "delta_mu_bohr", "a_prime_nm"});
    r.number("a_bg_nm", c.a_bg_nm);
    r.number("b0_gauss", c.b0_gauss);
    r.number("delta_b_gauss", c.delta_b_gauss);
    r.number("delta_mu_bohr", c.delta_mu_bohr);
    r.number("a_prime_nm", c.a_prime_nm);
  }
  if (top.has("pulse")) {
    ObjectReader r(top.at("pulse"), "pulse");
    r.allow({"rabi_khz", "tau_us", "atomic_line_hz"});
    r.number("rabi_khz", c.rabi_khz);
    r.number("tau_us", c.tau_us);
    r.number("atomic_line_hz", c.atomic_line_hz);
  }
  top.number("field_gauss", c.field_gauss);
  if (top.has("binding_energy_khz") && !top.at("binding_energy_khz").is_null()) {
    double eb = 0.0;
    top.number("binding_energy_khz", eb);
    c.binding_energy_khz = eb;
  }
  top.number("lambda", c.lambda);
  if (top.has("quadrature")) {
    ObjectReader r(top.at("quadrature"), "quadrature");
    r.allow({"method", "rel_tol", "abs_tol", "max_intervals", "fixed_panels"});
    std::string method = "gauss_kronrod";
    r.string("method", method);
    if (method == "gauss_kronrod") {
      c.quadrature.method = QuadratureMethod::GaussKronrod;
    } else if (method == "gauss_legendre") {
      c.quadrature.method = QuadratureMethod::FixedGaussLegendre;
    } else {
      throw ConfigError("quadrature.method: expected 'gauss_kronrod' or 'gauss_legendre'");
    }
    r.number("rel_tol", c.quadrature.rel_tol);
    r.number("abs_tol", c.quadrature.abs_tol);
    for (const char* key : {"max_intervals", "fixed_panels"}) {
      if (!r.has(key)) continue;
      const json& v = r.at(key);
      if (!v.is_number_integer() || v.get<long long>() < 1) throw ConfigError(r.path(key) + ": expected a positive integer");
      (std::string(key) == "max_intervals" ? c.quadrature.max_intervals : c.quadrature.fixed_panels) =
          v.get<std::size_t>();
    }
  }
  if (top.has("seed")) {
    const json& v = top.at("seed");
    if (!v.is_number_unsigned()) {
      throw ConfigError("seed: expected a non-negative integer");
    }
    c.seed = v.get<std::uint64_t>();
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "': " + e.what());
  }
  return parse_run_config(j);
}

json to_json(const RunConfig& c) {
  json j;
  j["species"] = {{"label_a", c.label_a}, {"mass_a_amu", c.mass_a_amu}, {"label_b", c.label_b}, {"mass_b_amu", c.mass_b_amu}};
  j["trap"] = {{"freq_a_hz", c.freq_a_hz}, {"freq_b_hz", c.freq_b_hz}};
  j["atoms"] = {{"n_a", c.n_a}, {"n_b", c.n_b}};
  j["temperature_nk"] = c.temperature_nk;
  j["resonance"] = {{"a_bg_nm", c.a_bg_nm},
                    {"b0_gauss", c.b0_gauss},
                    {"delta_b_gauss", c.delta_b_gauss},
                    {"delta_mu_bohr", c.delta_mu_bohr},
                    {"a_prime_nm", c.a_prime_nm}};
  j["pulse"] = {{"rabi_khz", c.rabi_khz}, {"tau_us", c.tau_us}, {"atomic_line_hz", c.atomic_line_hz}};
  j["field_gauss"] = c.field_gauss;
  j["binding_energy_khz"] = c.binding_energy_khz ? json(*c.binding_energy_khz) : json(nullptr);
  j["lambda"] = c.lambda;
  j["quadrature"] = {
      {"method", c.quadrature.method == QuadratureMethod::GaussKronrod ? "gauss_kronrod" : "gauss_legendre"},
      {"rel_tol", c.quadrature.rel_tol},
      {"abs_tol", c.quadrature.abs_tol},
      {"max_intervals", c.quadrature.max_intervals},
      {"fixed_panels", c.quadrature.fixed_panels}};
  j["seed"] = c.seed;
  return j;
}

std::optional<std::filesystem::path> resolve_config_path(const std::optional<std::string>& flag) {
  if (flag && !flag->empty()) return std::filesystem::path(*flag);
  if (const char* env = std::getenv(config_env_var); env && *env) return std::filesystem::path(env);
  return std::nullopt;
}

}  // namespace feshrf
