#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "feshrf/errors.hpp"
#include "feshrf/quantities.hpp"

using namespace feshrf;

TEST(Constants, PlanckIsTwoPiHbar) {
  EXPECT_NEAR(constants::planck_h / (2.0 * std::numbers::pi * constants::hbar), 1.0, 4e-16);
  const auto& c = physical_constants();
  for (double v : {c.hbar, c.planck_h, c.k_B, c.mu_B, c.amu}) EXPECT_GT(v, 0.0);
}

TEST(ReducedMass, EqualMassesHalve) {
  EXPECT_DOUBLE_EQ(reduced_mass(3.0, 3.0), 1.5);
}

TEST(ReducedMass, PotassiumRubidium) {
  const double mu = reduced_mass(39.9639985, 86.9091805);
  EXPECT_NEAR(mu, 27.376, 0.001);
  const SpeciesPair p = potassium_rubidium_pair();
  EXPECT_NEAR(p.reduced_mass() / constants::amu, 27.375670468491388, 1e-12);
}

TEST(ReducedMass, HeavyPartnerLimit) {
  EXPECT_NEAR(reduced_mass(2.0, 2e12), 2.0, 1e-11);
}

TEST(ReducedMass, SymmetricAndBounded) {
  for (double a : {1e-27, 6.6e-26, 1.4e-25}) {
    for (double b : {3e-27, 1.44e-25, 7.0e-26}) {
      EXPECT_EQ(reduced_mass(a, b), reduced_mass(b, a));
      EXPECT_GT(reduced_mass(a, b), 0.0);
      EXPECT_LT(reduced_mass(a, b), std::min(a, b));
    }
  }
}

TEST(ReducedMass, RejectsNonPositive) {
  EXPECT_THROW(reduced_mass(0.0, 1.0), DomainError);
  EXPECT_THROW(reduced_mass(1.0, -2.0), DomainError);
  EXPECT_THROW(SpeciesPair("a", 0.0, "b", 1.0), DomainError);
}

TEST(SpeciesPair, Bookkeeping) {
  const SpeciesPair p("x", 2.0, "y", 6.0);
  EXPECT_DOUBLE_EQ(p.total_mass(), 8.0);
  EXPECT_DOUBLE_EQ(p.reduced_mass(), 1.5);
  EXPECT_EQ(p.label_a(), "x");
  EXPECT_EQ(p.label_b(), "y");
}

TEST(Units, LabToSi) {
  EXPECT_NEAR(to_si(545.994, Unit::Gauss) / 0.0545994, 1.0, 1e-15);
  EXPECT_NEAR(to_si(730.0, Unit::NanoKelvin), 7.30e-7, 1e-21);
  EXPECT_NEAR(to_si(2.32, Unit::BohrMagneton), 2.1515703381656e-23, 1e-35);
  EXPECT_NEAR(to_si(45.0, Unit::KiloHertz), 45e3, 1e-9);
  EXPECT_NEAR(to_si(25.0, Unit::Microsecond), 25e-6, 1e-20);
  EXPECT_NEAR(to_si(9.88, Unit::Nanometer), 9.88e-9, 1e-23);
  EXPECT_NEAR(to_si(1.0, Unit::MilliGauss), 1e-7, 1e-22);
}

TEST(Units, ParseNames) {
  EXPECT_EQ(parse_unit("G"), Unit::Gauss);
  EXPECT_EQ(parse_unit("mG"), Unit::MilliGauss);
  EXPECT_EQ(parse_unit("µK"), Unit::MicroKelvin);
  EXPECT_EQ(parse_unit("uK"), Unit::MicroKelvin);
  EXPECT_EQ(parse_unit("amu"), Unit::AtomicMass);
  EXPECT_DOUBLE_EQ(to_si(3.0, "kHz"), 3000.0);
}

TEST(Units, UnknownIsConfigError) {
  EXPECT_THROW(parse_unit("furlong"), ConfigError);
  EXPECT_THROW(to_si(1.0, "T"), ConfigError);
}

TEST(Units, RoundTrip) {
  for (Unit u : {Unit::Gauss, Unit::MilliGauss, Unit::NanoKelvin, Unit::MicroKelvin, Unit::Hertz, Unit::KiloHertz,
                 Unit::MegaHertz, Unit::Nanometer, Unit::Microsecond, Unit::AtomicMass, Unit::BohrMagneton}) {
    for (double v : {1e-3, 0.7, 1.0, 545.994, 1e6}) {
      EXPECT_NEAR(from_si(to_si(v, u), u) / v, 1.0, 1e-12) << unit_symbol(u);
      EXPECT_EQ(parse_unit(unit_symbol(u)), u);
    }
  }
}

TEST(ThermalEnergy, Values) {
  EXPECT_NEAR(thermal_energy(730e-9) / 1.00787377e-29, 1.0, 1e-9);
  EXPECT_NEAR(thermal_energy(1.1e-6) / 1.5187139e-29, 1.0, 1e-9);
  EXPECT_LT(thermal_energy(1e-300), 1e-320);
  EXPECT_THROW(thermal_energy(0.0), DomainError);
  EXPECT_THROW(thermal_energy(-1.0), DomainError);
}
