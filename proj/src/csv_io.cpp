#include "feshrf/csv_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>

#include "feshrf/errors.hpp"

namespace feshrf {

std::string format_number(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_field(std::string_view text, std::size_t line, const char* column) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (text.empty() || ec != std::errc{} || ptr != last || !std::isfinite(v)) {
    throw SchemaError("line " + std::to_string(line) + ": column '" + column + "': not a finite number: '" +
                          std::string(text) + "'",
                      line);
  }
  return v;
}

// Reads data lines after the header, handing (line number, fields) to `row`.
template <class Row>
void read_rows(std::istream& in, std::string_view full_header, std::size_t min_cols, Row&& row) {
  std::string raw;
  std::size_t line_no = 0;
  std::size_t columns = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (line_no == 1 && line.substr(0, 3) == "\xEF\xBB\xBF") line.remove_prefix(3);
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    auto fields = split(line);
    if (columns == 0) {
      const auto expected = split(full_header);
      const bool ok = (fields.size() == expected.size() || fields.size() == min_cols) &&
                      std::equal(fields.begin(), fields.end(), expected.begin());
      if (!ok) {
        throw SchemaError("line " + std::to_string(line_no) + ": expected header '" + std::string(full_header) + "'",
                          line_no);
      }
      columns = fields.size();
      continue;
    }
    if (fields.size() < min_cols || fields.size() > columns) {
      throw SchemaError("line " + std::to_string(line_no) + ": expected " + std::to_string(columns) + " fields, got " +
                            std::to_string(fields.size()),
                        line_no);
    }
    row(line_no, fields);
  }
  if (columns == 0) throw SchemaError("missing header '" + std::string(full_header) + "'", line_no);
}

template <class T>
T with_file(const std::filesystem::path& path, T (*reader)(std::istream&)) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  return reader(in);
}

}  // namespace

Spectrum read_spectrum_csv(std::istream& in) {
  Spectrum s;
  std::size_t last_line = 0;
  read_rows(in, measured_spectrum_header, 2, [&](std::size_t line, const std::vector<std::string_view>& f) {
    SpectrumPoint p;
    p.frequency = parse_field(f[0], line, "rf_frequency_hz");
    p.molecules = parse_field(f[1], line, "molecule_count");
    if (f.size() == 3 && !f[2].empty()) {
      const double u = parse_field(f[2], line, "count_uncertainty");
      if (!(u > 0.0)) throw SchemaError("line " + std::to_string(line) + ": count_uncertainty must be positive", line);
      p.uncertainty = u;
    }
    if (!s.points.empty() && !(p.frequency > s.points.back().frequency)) {
      throw SchemaError("line " + std::to_string(line) + ": rf_frequency_hz must be strictly increasing", line);
    }
    s.points.push_back(p);
    last_line = line;
  });
  if (s.points.empty()) throw SchemaError("spectrum file has no data rows", last_line);
  return s;
}

Spectrum read_spectrum_csv(const std::filesystem::path& path) {
  return with_file<Spectrum>(path, &read_spectrum_csv);
}

void write_measured_spectrum_csv(std::ostream& out, const Spectrum& s) {
  const bool all_sigma =
      !s.points.empty() && std::all_of(s.points.begin(), s.points.end(), [](const auto& p) { return p.uncertainty.has_value(); });
  out << (all_sigma ? measured_spectrum_header : "rf_frequency_hz,molecule_count") << '\n';
  for (const auto& p : s.points) {
    out << format_number(p.frequency) << ',' << format_number(p.molecules);
    if (all_sigma) out << ',' << format_number(*p.uncertainty);
    out << '\n';
  }
}

void write_model_spectrum_csv(std::ostream& out, const Spectrum& s) {
  out << model_spectrum_header << '\n';
  for (const auto& p : s.points) out << format_number(p.frequency) << ',' << format_number(p.molecules) << '\n';
}

std::vector<ResonancePoint> read_points_csv(std::istream& in) {
  std::vector<ResonancePoint> pts;
  read_rows(in, points_header, 3, [&](std::size_t line, const std::vector<std::string_view>& f) {
    ResonancePoint p;
    p.field = to_si(parse_field(f[0], line, "b_field_gauss"), Unit::Gauss);
    p.binding_energy = khz_to_energy(parse_field(f[1], line, "binding_energy_khz"));
    p.sigma = khz_to_energy(parse_field(f[2], line, "sigma_khz"));
    if (!(p.binding_energy > 0.0)) {
      throw SchemaError("line " + std::to_string(line) + ": binding_energy_khz must be positive", line);
    }
    if (!(p.sigma > 0.0)) throw SchemaError("line " + std::to_string(line) + ": sigma_khz must be positive", line);
    pts.push_back(p);
  });
  return pts;
}

std::vector<ResonancePoint> read_points_csv(const std::filesystem::path& path) {
  return with_file<std::vector<ResonancePoint>>(path, &read_points_csv);
}

void write_points_csv(std::ostream& out, const std::vector<ResonancePoint>& points) {
  out << points_header << '\n';
  for (const auto& p : points) {
    out << format_number(from_si(p.field, Unit::Gauss)) << ',' << format_number(energy_to_khz(p.binding_energy)) << ','
        << format_number(energy_to_khz(p.sigma)) << '\n';
  }
}

void write_binding_curve_csv(std::ostream& out, const std::vector<BindingCurveRow>& rows) {
  out << binding_curve_header << '\n';
  for (const auto& r : rows) {
    out << format_number(from_si(r.field, Unit::Gauss)) << ',' << format_number(energy_to_khz(r.binding_energy)) << ','
        << format_number(r.chi) << '\n';
  }
}

}  // namespace feshrf
