#pragma once

// CSV readers and writers. Numbers are written with 17 significant digits so
// that every file round-trips bit for bit. Lines starting with '#' are comments.
//
//   measured spectrum  rf_frequency_hz,molecule_count[,count_uncertainty]
//   model spectrum     rf_frequency_hz,molecule_number
//   resonance points   b_field_gauss,binding_energy_khz,sigma_khz
//   binding curve      b_field_gauss,binding_energy_khz,chi

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "feshrf/fitting.hpp"
#include "feshrf/spectrum_engine.hpp"

namespace feshrf {

inline constexpr const char* measured_spectrum_header = "rf_frequency_hz,molecule_count,count_uncertainty";
inline constexpr const char* model_spectrum_header = "rf_frequency_hz,molecule_number";
inline constexpr const char* points_header = "b_field_gauss,binding_energy_khz,sigma_khz";
inline constexpr const char* binding_curve_header = "b_field_gauss,binding_energy_khz,chi";

// "%.17g"
std::string format_number(double value);

// Throws SchemaError (with the 1-based line number) on a bad header, a malformed or
// non-finite field, a non-positive uncertainty, non-increasing frequencies, or no rows.
Spectrum read_spectrum_csv(std::istream& in);
Spectrum read_spectrum_csv(const std::filesystem::path& path);

// Measured-spectrum schema; the uncertainty column is written only if every point has one.
void write_measured_spectrum_csv(std::ostream& out, const Spectrum& s);
void write_model_spectrum_csv(std::ostream& out, const Spectrum& s);

// Fields in T and energies in J on the C++ side; G and kHz in the file.
std::vector<ResonancePoint> read_points_csv(std::istream& in);
std::vector<ResonancePoint> read_points_csv(const std::filesystem::path& path);
void write_points_csv(std::ostream& out, const std::vector<ResonancePoint>& points);

struct BindingCurveRow {
  double field = 0.0;           // T
  double binding_energy = 0.0;  // J
  double chi = 0.0;
};

void write_binding_curve_csv(std::ostream& out, const std::vector<BindingCurveRow>& rows);

}  // namespace feshrf
