#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "feshrf/commands.hpp"
#include "feshrf/csv_io.hpp"
#include "feshrf/errors.hpp"
#include "support.hpp"

using namespace feshrf;
using namespace feshrf::testing;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("feshrf_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run_tool(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  f << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

json read_json(const fs::path& p) { return json::parse(read_file(p)); }

void write_config(const fs::path& p, const json& j) { write_file(p, j.dump(2)); }

std::size_t data_rows(const std::string& csv) {
  std::size_t n = 0;
  std::istringstream in(csv);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    ++n;
  }
  return n;
}

}  // namespace

// --- configuration --------------------------------------------------------

TEST(RunConfig, DefaultsAreTheLabSetup) {
  const RunConfig c = parse_run_config(json::object());
  const ModelConfig m = c.model();
  EXPECT_NEAR(m.trap.omega_tilde / angular_from_hz(1.0), 285.90208113967971, 1e-9);
  EXPECT_NEAR(spectral_edge(m), 54852.546633948203, 1e-5);
  EXPECT_NEAR(m.pulse.rabi, angular_from_hz(45e3), 1e-9);
  EXPECT_NEAR(m.pulse.tau, 25e-6, 1e-18);
  EXPECT_NEAR(m.mix.temperature, 730e-9, 1e-20);
}

TEST(RunConfig, UnknownKeysRejected) {
  EXPECT_THROW(parse_run_config(json{{"temperature_nK", 730}}), ConfigError);
  EXPECT_THROW(parse_run_config(json{{"pulse", {{"rabi", 45}}}}), ConfigError);
}

TEST(RunConfig, InvalidValuesRejected) {
  EXPECT_THROW(parse_run_config(json{{"temperature_nk", -1.0}}), ConfigError);
  EXPECT_THROW(parse_run_config(json{{"trap", {{"freq_a_hz", {1.0, 2.0}}}}}), ConfigError);
  EXPECT_THROW(parse_run_config(json{{"quadrature", {{"method", "simpson"}}}}), ConfigError);
  EXPECT_THROW(parse_run_config(json{{"seed", -4}}), ConfigError);
}

TEST(RunConfig, PerAxisAndMeanFrequencies) {
  const RunConfig c = parse_run_config(json{{"trap", {{"freq_a_hz", {100.0, 200.0, 400.0}}, {"freq_b_hz", 50.0}}}});
  const EffectiveTrap t = effective_trap(c.trap());
  EXPECT_NEAR(t.omega_bar[0], angular_from_hz(std::sqrt(100.0 * 50.0)), 1e-9);
  EXPECT_NEAR(t.omega_bar[2], angular_from_hz(std::sqrt(400.0 * 50.0)), 1e-9);
}

TEST(RunConfig, EchoRoundTrip) {
  RunConfig c;
  c.temperature_nk = 250.0;
  c.freq_a_hz = {230.0, 230.0, 231.0};
  c.binding_energy_khz = 127.6;
  c.lambda = 0.37;
  c.quadrature.method = QuadratureMethod::FixedGaussLegendre;
  const json j = to_json(c);
  EXPECT_EQ(to_json(parse_run_config(j)), j);
  EXPECT_EQ(to_json(parse_run_config(json::parse(j.dump()))), j);
}

TEST(RunConfig, EnvironmentFallback) {
  TempDir dir;
  const auto path = dir / "env.json";
  write_config(path, json{{"temperature_nk", 250.0}});
  ::setenv(config_env_var, path.c_str(), 1);
  const auto resolved = resolve_config_path(std::nullopt);
  ASSERT_TRUE(resolved.has_value());
  EXPECT_EQ(*resolved, path);
  EXPECT_EQ(*resolve_config_path(std::string("explicit.json")), fs::path("explicit.json"));
  ::unsetenv(config_env_var);
  EXPECT_FALSE(resolve_config_path(std::nullopt).has_value());
}

TEST(RunConfig, MissingOrMalformedFile) {
  TempDir dir;
  EXPECT_THROW(load_run_config(dir / "absent.json"), ConfigError);
  write_file(dir / "bad.json", "{ not json");
  EXPECT_THROW(load_run_config(dir / "bad.json"), ConfigError);
}

// --- CSV ------------------------------------------------------------------

TEST(Csv, MeasuredRoundTripIsBitExact) {
  Spectrum s;
  for (int i = 0; i < 25; ++i) {
    const double f = 40e3 + 1234.5678901234567 * i + 1.0 / 3.0;
    s.points.push_back({f, std::exp(0.37 * i) / 7.0, 0.1 + 1.0 / (i + 3.0)});
  }
  std::stringstream io;
  write_measured_spectrum_csv(io, s);
  EXPECT_EQ(io.str().substr(0, io.str().find('\n')), measured_spectrum_header);
  const Spectrum back = read_spectrum_csv(io);
  ASSERT_EQ(back.points.size(), s.points.size());
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    EXPECT_EQ(back.points[i].frequency, s.points[i].frequency);
    EXPECT_EQ(back.points[i].molecules, s.points[i].molecules);
    EXPECT_EQ(*back.points[i].uncertainty, *s.points[i].uncertainty);
  }
}

TEST(Csv, UncertaintyColumnOptional) {
  std::istringstream two("rf_frequency_hz,molecule_count\n1,2\n3,4\n");
  const auto a = read_spectrum_csv(two);
  EXPECT_FALSE(a.points[0].uncertainty.has_value());
  std::istringstream commented("\xEF\xBB\xBF# exported\nrf_frequency_hz,molecule_count,count_uncertainty\n\n1,2,0.5\n# mid\n3,4,0.5\n");
  const auto b = read_spectrum_csv(commented);
  ASSERT_EQ(b.points.size(), 2u);
  EXPECT_EQ(*b.points[1].uncertainty, 0.5);
}

TEST(Csv, SchemaErrorsCarryLineNumbers) {
  auto line_of = [](const std::string& text) -> std::size_t {
    std::istringstream in(text);
    try {
      read_spectrum_csv(in);
    } catch (const SchemaError& e) {
      return e.line();
    }
    return 0;
  };
  EXPECT_EQ(line_of("rf_frequency_hz,molecule_count\n1,2\n3,abc\n"), 3u);
  EXPECT_EQ(line_of("rf_frequency_hz,molecule_count,count_uncertainty\n1,2,0\n"), 2u);
  EXPECT_EQ(line_of("rf_frequency_hz,molecule_count\n1,2\n1,2\n"), 3u);
  EXPECT_EQ(line_of("rf_frequency_hz,molecule_count\n1,2\n2,inf\n"), 3u);
  EXPECT_EQ(line_of("frequency,count\n1,2\n"), 1u);
  std::istringstream empty("");
  EXPECT_THROW(read_spectrum_csv(empty), SchemaError);
  std::istringstream header_only("rf_frequency_hz,molecule_count\n");
  EXPECT_THROW(read_spectrum_csv(header_only), SchemaError);
}

TEST(Csv, PointsConvertUnits) {
  std::istringstream in(std::string(points_header) + "\n545.994,54.85,0.5\n");
  const auto pts = read_points_csv(in);
  ASSERT_EQ(pts.size(), 1u);
  EXPECT_NEAR(pts[0].field, 0.0545994, 1e-16);
  EXPECT_NEAR(pts[0].binding_energy, khz_to_energy(54.85), 1e-40);
  std::ostringstream out;
  write_points_csv(out, pts);
  std::istringstream again(out.str());
  EXPECT_EQ(read_points_csv(again)[0].binding_energy, pts[0].binding_energy);
}

// --- spectrum -------------------------------------------------------------

TEST(CmdSpectrum, RowsMatchGrid) {
  TempDir dir;
  const auto out = dir / "s.csv";
  const auto r = run_tool({"spectrum", "--grid", "20000:160000:1000", "--out", out.string()});
  EXPECT_EQ(r.code, 0) << r.err;
  const std::string csv = read_file(out);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), model_spectrum_header);
  EXPECT_EQ(data_rows(csv), 141u);
  // Single peaked: rises then falls.
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  std::vector<double> n;
  while (std::getline(in, line)) n.push_back(std::stod(line.substr(line.find(',') + 1)));
  const auto peak = std::max_element(n.begin(), n.end()) - n.begin();
  for (long i = 1; i <= peak; ++i) EXPECT_GE(n[i], n[i - 1]);
  for (std::size_t i = peak + 1; i < n.size(); ++i) EXPECT_LE(n[i], n[i - 1]);
}

TEST(CmdSpectrum, ZeroRabiGivesZeros) {
  TempDir dir;
  write_config(dir / "c.json", json{{"pulse", {{"rabi_khz", 0.0}}}});
  const auto r = run_tool({"spectrum", "--config", (dir / "c.json").string(), "--grid", "40000:90000:5000"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  int rows = 0;
  while (std::getline(in, line)) {
    EXPECT_EQ(std::stod(line.substr(line.find(',') + 1)), 0.0);
    ++rows;
  }
  EXPECT_EQ(rows, 11);
}

TEST(CmdSpectrum, BadGridNamesFlag) {
  for (const std::string g : {"1:10:0", "1:10:-1", "10:1:1", "1:2", "a:b:c"}) {
    const auto r = run_tool({"spectrum", "--grid", g});
    EXPECT_EQ(r.code, 1) << g;
    EXPECT_NE(r.err.find("--grid"), std::string::npos) << r.err;
  }
}

TEST(CmdSpectrum, NumericalFailureExitsThree) {
  TempDir dir;
  write_config(dir / "c.json", json{{"quadrature", {{"rel_tol", 1e-16}, {"max_intervals", 4}}}});
  const auto r = run_tool({"spectrum", "--config", (dir / "c.json").string(), "--grid", "60000:61000:500"});
  EXPECT_EQ(r.code, 3) << r.err;
}

TEST(CmdSpectrum, ConfigFromEnvironment) {
  TempDir dir;
  write_config(dir / "c.json", json{{"pulse", {{"rabi_khz", 0.0}}}});
  ::setenv(config_env_var, (dir / "c.json").c_str(), 1);
  const auto r = run_tool({"spectrum", "--grid", "60000:60000:1"});
  ::unsetenv(config_env_var);
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find(",0\n"), std::string::npos) << r.out;
}

// --- fit-spectrum ---------------------------------------------------------

namespace {

fs::path write_synthetic_spectrum(const TempDir& dir, const std::string& name, double eb_khz, double lambda,
                                  bool with_sigma, double noise = 0.05) {
  const SpectrumModel m = lab_config().spectrum_model();
  const Spectrum s =
      synthetic_spectrum(m, eb_khz * 1e3, lambda, spectrum_grid(m, eb_khz * 1e3, 40), noise, 77, with_sigma);
  std::ostringstream csv;
  write_measured_spectrum_csv(csv, s);
  const auto p = dir / name;
  write_file(p, csv.str());
  return p;
}

}  // namespace

TEST(CmdFitSpectrum, SyntheticRoundTrip) {
  TempDir dir;
  const auto data = write_synthetic_spectrum(dir, "d.csv", 60.0, 2.0, true, 0.0);
  const auto rep = dir / "r.json";
  const auto r = run_tool({"fit-spectrum", data.string(), "--out", rep.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("E_b = "), std::string::npos);
  EXPECT_NE(r.out.find("lambda = "), std::string::npos);
  const json j = read_json(rep);
  EXPECT_EQ(j["schema_version"], cli::report_schema_version);
  EXPECT_EQ(j["tool_version"], cli::tool_version());
  EXPECT_TRUE(j["results"]["converged"].get<bool>());
  EXPECT_NEAR(j["results"]["binding_energy_khz"].get<double>() / 60.0, 1.0, 1e-6);
  EXPECT_NEAR(j["results"]["lambda"].get<double>() / 2.0, 1.0, 1e-6);
  EXPECT_EQ(j["results"]["residuals"].size(), 40u);
  EXPECT_TRUE(j["diagnostics"].contains("perturbative_warning"));
  EXPECT_LE(j["diagnostics"]["quadrature_max_rel_error"].get<double>(), 1e-9);
  // The config echo re-loads into the same run configuration.
  EXPECT_EQ(to_json(parse_run_config(j["config"])), j["config"]);
}

TEST(CmdFitSpectrum, UncertaintyColumnChangesWeights) {
  TempDir dir;
  const auto with = write_synthetic_spectrum(dir, "w.csv", 60.0, 1.0, true);
  const auto without = write_synthetic_spectrum(dir, "wo.csv", 60.0, 1.0, false);
  ASSERT_EQ(run_tool({"fit-spectrum", with.string(), "--out", (dir / "w.json").string()}).code, 0);
  ASSERT_EQ(run_tool({"fit-spectrum", without.string(), "--out", (dir / "wo.json").string()}).code, 0);
  const json a = read_json(dir / "w.json");
  const json b = read_json(dir / "wo.json");
  EXPECT_EQ(a["results"]["weights"], "data");
  EXPECT_EQ(b["results"]["weights"], "poisson");
  EXPECT_NE(a["results"]["covariance"], b["results"]["covariance"]);
}

TEST(CmdFitSpectrum, EmptyOrMalformedInput) {
  TempDir dir;
  write_file(dir / "empty.csv", "");
  EXPECT_EQ(run_tool({"fit-spectrum", (dir / "empty.csv").string()}).code, 1);
  write_file(dir / "bad.csv", "rf_frequency_hz,molecule_count\n1,2\n2,x\n");
  const auto r = run_tool({"fit-spectrum", (dir / "bad.csv").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("line 3"), std::string::npos) << r.err;
  EXPECT_EQ(run_tool({"fit-spectrum", (dir / "missing.csv").string()}).code, 1);
}

TEST(CmdFitSpectrum, NonConvergenceStillWritesReport) {
  TempDir dir;
  // Pure noise around zero: the scale factor runs into its lower bound.
  std::ostringstream csv;
  csv << measured_spectrum_header << "\n";
  NormalSource g(1);
  for (int i = 0; i < 30; ++i) {
    // A bump in the middle so the initial guess has an interior maximum.
    const double bump = (i == 15) ? 5e-3 : 0.0;
    csv << format_number(40e3 + 3e3 * i) << "," << format_number(1e-3 * g.next() + bump) << ",1\n";
  }
  write_file(dir / "noise.csv", csv.str());
  const auto rep = dir / "r.json";
  const auto r = run_tool({"fit-spectrum", (dir / "noise.csv").string(), "--out", rep.string()});
  EXPECT_EQ(r.code, 2) << r.err;
  ASSERT_TRUE(fs::exists(rep));
  EXPECT_FALSE(read_json(rep)["results"]["converged"].get<bool>());
}

// --- fit-resonance --------------------------------------------------------

namespace {

fs::path write_points(const TempDir& dir, const std::vector<ResonancePoint>& pts) {
  std::ostringstream csv;
  write_points_csv(csv, pts);
  const auto p = dir / "points.csv";
  write_file(p, csv.str());
  return p;
}

}  // namespace

TEST(CmdFitResonance, SixPoints) {
  TempDir dir;
  const auto truth = potassium_rubidium_resonance();
  const auto pts = synthetic_points(truth, measurement_fields(), 0.01, 5);
  const auto rep = dir / "r.json";
  const auto r = run_tool({"fit-resonance", write_points(dir, pts).string(), "--out", rep.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("B0 = "), std::string::npos);
  EXPECT_NE(r.out.find("DeltaB = "), std::string::npos);
  const json j = read_json(rep);
  EXPECT_NEAR(j["results"]["b0_gauss"].get<double>(), 546.618, 0.010);
  EXPECT_GT(j["results"]["b0_sigma_gauss"].get<double>(), 0.0);
  EXPECT_EQ(j["data"]["points"].size(), 6u);
}

TEST(CmdFitResonance, TwoRowsRejected) {
  TempDir dir;
  auto pts = synthetic_points(potassium_rubidium_resonance(), measurement_fields(), 0.0, 0);
  pts.resize(2);
  const auto r = run_tool({"fit-resonance", write_points(dir, pts).string()});
  EXPECT_EQ(r.code, 1);
}

TEST(CmdFitResonance, WrongSideRejected) {
  TempDir dir;
  auto pts = synthetic_points(potassium_rubidium_resonance(), measurement_fields(), 0.0, 0);
  for (auto& p : pts) p.field += to_si(1.0, Unit::Gauss);
  const auto r = run_tool({"fit-resonance", write_points(dir, pts).string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("branch"), std::string::npos) << r.err;
}

// --- oracle ---------------------------------------------------------------

TEST(CmdOracle, DefaultPasses) {
  TempDir dir;
  const auto rep = dir / "o.json";
  const auto r = run_tool({"oracle", "--samples", "1000000", "--out", rep.string()});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  const json j = read_json(rep);
  EXPECT_TRUE(j["results"]["passed"].get<bool>());
  EXPECT_GE(j["results"]["checks"].size(), 8u);
  for (const auto& c : j["results"]["checks"]) EXPECT_TRUE(c["passed"].get<bool>()) << c.dump();
}

TEST(CmdOracle, CorruptedTemperatureFails) {
  const auto r = run_tool({"oracle", "--samples", "200000", "--corrupt-temperature", "1.5"});
  EXPECT_EQ(r.code, 2) << r.out;
  EXPECT_NE(r.out.find("FAIL relative_energy_gamma3"), std::string::npos) << r.out;
}

TEST(CmdOracle, TooFewSamples) { EXPECT_EQ(run_tool({"oracle", "--samples", "100"}).code, 1); }

TEST(CmdOracle, SameSeedSameReport) {
  TempDir dir;
  const auto a = dir / "a.json";
  const auto b = dir / "b.json";
  ASSERT_EQ(run_tool({"oracle", "--samples", "100000", "--seed", "7", "--threads", "1", "--out", a.string()}).code, 0);
  ASSERT_EQ(run_tool({"oracle", "--samples", "100000", "--seed", "7", "--threads", "3", "--out", b.string()}).code, 0);
  json ja = read_json(a), jb = read_json(b);
  ja.erase("timestamp");
  jb.erase("timestamp");
  EXPECT_EQ(ja.dump(2), jb.dump(2));
}

// --- binding-curve --------------------------------------------------------

TEST(CmdBindingCurve, CrossingThePoleFails) {
  const auto r = run_tool({"binding-curve", "--field-range", "546.0:547.0:0.1"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("pole"), std::string::npos) << r.err;
}

TEST(CmdBindingCurve, WorkingFieldAndUniversalLimit) {
  const auto r = run_tool({"binding-curve", "--field-range", "545.994:546.616:0.002"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, binding_curve_header);
  std::vector<std::array<double, 3>> rows;
  while (std::getline(in, line)) {
    std::array<double, 3> v{};
    std::istringstream ls(line);
    char comma;
    ls >> v[0] >> comma >> v[1] >> comma >> v[2];
    rows.push_back(v);
  }
  ASSERT_EQ(rows.size(), 312u);
  EXPECT_NEAR(rows.front()[0], 545.994, 1e-12);
  EXPECT_NEAR(rows.front()[1], 54.85, 0.005);
  EXPECT_NEAR(rows.front()[2], 0.955, 0.001);
  // Last row sits 2 mG below B0.
  EXPECT_GT(rows.back()[2], 0.999);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_GE(rows[i][2], rows[i - 1][2]);
}
