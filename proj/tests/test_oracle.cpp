#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "feshrf/errors.hpp"
#include "feshrf/oracle.hpp"
#include "support.hpp"

using namespace feshrf;
using feshrf::testing::lab_config;
using feshrf::testing::linspace;

namespace {

constexpr double lab_t = 730e-9;

SamplingConfig matched() {
  const double w = angular_from_hz(std::sqrt(335.0 * 244.0));
  return {TrapConfig::isotropic(w, w), potassium_rubidium_pair(), lab_t};
}

const std::vector<PairSample>& million() {
  static const auto s = sample_pairs(1'000'000, matched(), 20080513, 0);
  return s;
}

}  // namespace

TEST(SplitMix64, ReferenceStream) {
  // First outputs for seed 0 of the published SplitMix64 generator.
  SplitMix64 r(0);
  EXPECT_EQ(r.next(), 0xE220A8397B1DCDAFULL);
  EXPECT_EQ(r.next(), 0x6E789E6AA1B965F4ULL);
  EXPECT_EQ(r.next(), 0x06C45D188009454FULL);
}

TEST(SplitMix64, UniformOpenInterval) {
  SplitMix64 r(3);
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(NormalSource, Moments) {
  NormalSource g(9);
  double s = 0.0, s2 = 0.0;
  const int n = 400000;
  for (int i = 0; i < n; ++i) {
    const double x = g.next();
    s += x;
    s2 += x * x;
  }
  EXPECT_NEAR(s / n, 0.0, 4.0 / std::sqrt(n));
  EXPECT_NEAR(s2 / n, 1.0, 4.0 * std::sqrt(2.0 / n));
}

TEST(Sampling, IndependentOfThreadCount) {
  const std::size_t n = 3 * sample_chunk_size + 17;
  const auto a = sample_pairs(n, matched(), 42, 1);
  const auto b = sample_pairs(n, matched(), 42, 7);
  ASSERT_EQ(a.size(), n);
  for (std::size_t i = 0; i < n; ++i) {
    ASSERT_EQ(a[i].eps_rel, b[i].eps_rel);
    ASSERT_EQ(a[i].eps_cm, b[i].eps_cm);
    ASSERT_EQ(a[i].eps_atoms, b[i].eps_atoms);
  }
}

TEST(Sampling, PrefixStableAndSeedSensitive) {
  const auto small = sample_pairs(1000, matched(), 42, 1);
  const auto large = sample_pairs(sample_chunk_size + 5, matched(), 42, 2);
  for (std::size_t i = 0; i < small.size(); ++i) ASSERT_EQ(small[i].eps_rel, large[i].eps_rel);
  const auto other = sample_pairs(1000, matched(), 43, 1);
  EXPECT_NE(other[0].eps_rel, small[0].eps_rel);
  // Chunks are not copies of each other.
  EXPECT_NE(large[0].eps_rel, large[sample_chunk_size].eps_rel);
}

TEST(Sampling, EnergyIdentityForMatchedFrequencies) {
  EXPECT_LT(sample_moments(million()).max_identity_error, 1e-12);
}

TEST(Sampling, IdentityBreaksForMismatchedFrequencies) {
  SamplingConfig c = matched();
  c.trap = TrapConfig::isotropic(angular_from_hz(335.0), angular_from_hz(244.0));
  const auto s = sample_pairs(20000, c, 1, 1);
  EXPECT_GT(sample_moments(s).max_identity_error, 1e-3);
}

TEST(Sampling, Equipartition) {
  const auto m = sample_moments(million());
  const double kt = thermal_energy(lab_t);
  // Each atom carries 3 k_B T on average (six quadratic degrees of freedom).
  EXPECT_LT(std::abs(m.mean_atom - 3.0 * kt) / m.sem_atom, 3.0);
  EXPECT_NEAR(m.mean_rel / (3.0 * kt), 1.0, 0.01);
  EXPECT_NEAR(m.mean_cm / (3.0 * kt), 1.0, 0.01);
}

TEST(Sampling, RelativeAndCentreOfMassUncorrelated) {
  const auto m = sample_moments(million());
  EXPECT_LT(std::abs(m.pearson_rel_cm), 3.0 / std::sqrt(1e6));
}

TEST(Gof, MarginalsFollowGamma3) {
  const auto rel = relative_energy_gof(million(), lab_t, 64);
  const auto cm = center_of_mass_energy_gof(million(), lab_t, 64);
  EXPECT_GT(rel.p_value, 0.01);
  EXPECT_GT(cm.p_value, 0.01);
  EXPECT_EQ(rel.degrees_of_freedom, 63);
  EXPECT_EQ(rel.samples, 1'000'000u);
  EXPECT_EQ(rel.bin_edges.size(), 65u);
  EXPECT_TRUE(std::isinf(rel.bin_edges.back()));
  for (double e : rel.expected) EXPECT_NEAR(e, 1e6 / 64.0, 1e-6);
}

TEST(Gof, WrongTemperatureIsRejected) {
  EXPECT_LT(relative_energy_gof(million(), 1.5 * lab_t, 64).p_value, 1e-6);
  EXPECT_LT(center_of_mass_energy_gof(million(), 1.5 * lab_t, 64).p_value, 1e-6);
}

TEST(Gof, Preconditions) {
  const std::vector<double> few(9999, 1e-29);
  EXPECT_THROW(gamma3_energy_gof(few, lab_t, 16), DegenerateDataError);
  const std::vector<double> enough(10000, 1e-29);
  EXPECT_THROW(gamma3_energy_gof(enough, lab_t, 1), DomainError);
}

TEST(ReferenceIntegral, MatchesEngine) {
  const ModelConfig m = lab_config().model();
  const double kt = energy_to_hz(thermal_energy(m.mix.temperature));
  const double edge = spectral_edge(m);
  for (double nu : linspace(edge - 2 * kt, edge + 12 * kt, 50)) {
    const double ref = reference_integral(nu, m, 1e-10).value;
    const double eng = molecule_number(nu, m);
    EXPECT_LE(std::abs(eng - ref), 2.0 * m.quadrature.rel_tol * std::abs(ref) + 1e-300) << nu;
  }
}

TEST(ReferenceIntegral, MatchesEngineForWidePulse) {
  ModelConfig m = lab_config().model();
  m.pulse.tau = 5e-6;
  for (double nu : linspace(0.0, 4e5, 9)) {
    const double ref = reference_integral(nu, m, 1e-10).value;
    EXPECT_NEAR(molecule_number(nu, m) / ref, 1.0, 2e-9) << nu;
  }
}

TEST(ReferenceIntegral, ZeroRabiAndLinearity) {
  ModelConfig m = lab_config().model();
  const double n1 = reference_integral(62e3, m, 1e-10).value;
  m.lambda = 3.0;
  EXPECT_NEAR(reference_integral(62e3, m, 1e-10).value / n1, 3.0, 1e-12);
  m.pulse.rabi = 0.0;
  EXPECT_EQ(reference_integral(62e3, m, 1e-10).value, 0.0);
}

TEST(ReferenceIntegral, ToleranceRange) {
  const ModelConfig m = lab_config().model();
  EXPECT_THROW(reference_integral(62e3, m, 1e-13), DomainError);
  EXPECT_THROW(reference_integral(62e3, m, 1e-3), DomainError);
  EXPECT_NO_THROW(reference_integral(62e3, m, 1e-12));
  EXPECT_NO_THROW(reference_integral(62e3, m, 1e-4));
}
