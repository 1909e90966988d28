#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "exo/errors.hpp"
#include "exo/pneumatic_sizing.hpp"

using namespace exo;

namespace {

// Forward model written out independently: F = P * pi/4 * (D^2 - d^2).
double annulus_force(double bore, double rod, double pressure) {
  return pressure * std::acos(-1.0) * 0.25 * (bore * bore - rod * rod);
}

CylinderSpec reference_cylinder() { return CylinderSpec{0.030, 0.010, 0.150, 6e5, ActingSide::rod}; }

}  // namespace

TEST_CASE("min_bore") {
  const double d = min_bore(264.3, 6e5, 0.010);
  CHECK(d == doctest::Approx(0.02571).epsilon(1e-3));
  CHECK(d >= 0.0256);
  CHECK(d <= 0.0258);

  CHECK(min_bore(kPi / 4.0, 1.0, 0.0) == doctest::Approx(1.0));

  // Forward-evaluate at 30 mm, then invert.
  const double f30 = annulus_force(0.030, 0.010, 6e5);
  CHECK(f30 == doctest::Approx(376.99).epsilon(1e-5));
  CHECK(min_bore(f30, 6e5, 0.010) == doctest::Approx(0.030).epsilon(1e-12));

  CHECK_THROWS_AS(min_bore(0.0, 6e5, 0.01), DomainError);
  CHECK_THROWS_AS(min_bore(100.0, 0.0, 0.01), DomainError);
}

TEST_CASE("min_bore inverts available_force") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> force(1.0, 5000.0), pressure(1e5, 1e6), rod(0.0, 0.02);
  for (int i = 0; i < 1000; ++i) {
    const double f = force(rng), p = pressure(rng), r = rod(rng);
    CylinderSpec spec{min_bore(f, p, r), r, 0.1, p, ActingSide::rod};
    CHECK(available_force(spec, ActingSide::rod) == doctest::Approx(f).epsilon(1e-9));
  }
}

TEST_CASE("min_bore monotonicity") {
  CHECK(min_bore(300.0, 6e5, 0.01) < min_bore(300.0, 5e5, 0.01));
  CHECK(min_bore(310.0, 6e5, 0.01) > min_bore(300.0, 6e5, 0.01));
  CHECK(min_bore(300.0, 6e5, 0.012) > min_bore(300.0, 6e5, 0.01));
}

TEST_CASE("select_standard_bore") {
  const BoreCatalog cat = BoreCatalog::standard();
  CHECK(select_standard_bore(0.02571, cat) == doctest::Approx(0.030));
  CHECK(select_standard_bore(0.030, cat) == doctest::Approx(0.030));
  CHECK_THROWS_AS(select_standard_bore(0.070, cat), NoStandardSize);

  SUBCASE("brute-force soundness and monotonicity") {
    double previous = 0.0;
    for (double need = 0.001; need < 0.063; need += 0.0005) {
      const double chosen = select_standard_bore(need, cat);
      CHECK(chosen >= need);
      CHECK(chosen >= previous);
      for (double b : cat.bores())
        if (b < chosen) CHECK(b < need);
      previous = chosen;
    }
  }
}

TEST_CASE("available_force") {
  const CylinderSpec spec = reference_cylinder();
  CHECK(available_force(spec, ActingSide::rod) == doctest::Approx(376.99).epsilon(1e-5));
  CHECK(available_force(spec, ActingSide::cap) == doctest::Approx(annulus_force(0.030, 0.0, 6e5)).epsilon(1e-12));
  CHECK(std::abs(available_force(spec, ActingSide::cap) - 424.12) < 0.01);
  CylinderSpec unpressurized = spec;
  unpressurized.supply_pressure = 0.0;
  CHECK(available_force(unpressurized, ActingSide::rod) == 0.0);
  CHECK(available_force(unpressurized, ActingSide::cap) == 0.0);
}

TEST_CASE("stroke_required") {
  ArmGeometry g;
  CHECK(std::abs(stroke_required(g, SweepRange{}) - 0.150) <= 0.0005);
  CHECK(stroke_required(g, SweepRange{deg_to_rad(70.0), deg_to_rad(70.0)}) == 0.0);
  CHECK(stroke_required(g, SweepRange{deg_to_rad(60.0), deg_to_rad(120.0)}) ==
        doctest::Approx(0.259808 - 0.15).epsilon(1e-5));

  SUBCASE("additive over adjacent sub-sweeps") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> deg(1.0, 179.0);
    for (int i = 0; i < 200; ++i) {
      double a = deg(rng), b = deg(rng), c = deg(rng);
      if (a > b) std::swap(a, b);
      if (b > c) std::swap(b, c);
      if (a > b) std::swap(a, b);
      const double whole = stroke_required(g, {deg_to_rad(a), deg_to_rad(c)});
      const double parts = stroke_required(g, {deg_to_rad(a), deg_to_rad(b)}) +
                           stroke_required(g, {deg_to_rad(b), deg_to_rad(c)});
      CHECK(whole == doctest::Approx(parts).epsilon(1e-12));
    }
  }
}

TEST_CASE("sizing_report") {
  const ArmGeometry g;
  const BoreCatalog cat = BoreCatalog::standard();

  SUBCASE("reference defaults") {
    const SizingReport r = sizing_report(g, LoadCase{}, 6e5, 0.010, cat, SweepRange{});
    CHECK(r.errors.empty());
    CHECK(std::abs(r.chain.f_piston - 264.3) < 0.1);
    CHECK(*r.min_bore == doctest::Approx(0.02571).epsilon(1e-3));
    CHECK(*r.selected_bore == doctest::Approx(0.030));
    CHECK(std::abs(*r.stroke - 0.150) <= 0.0005);
    CHECK(std::abs(*r.available_force - 376.99) < 0.01);
    CHECK(*r.margin == doctest::Approx(1.43).epsilon(0.005));
    CHECK(r.pass());
  }

  SUBCASE("zero load is degenerate, not an error") {
    const SizingReport r = sizing_report(g, LoadCase{0.0, 9.81}, 6e5, 0.010, cat, SweepRange{});
    CHECK(r.degenerate);
    CHECK_FALSE(r.margin.has_value());
    CHECK_FALSE(r.min_bore.has_value());
    CHECK(r.errors.empty());
  }

  SUBCASE("half pressure selects 40 mm") {
    const SizingReport r = sizing_report(g, LoadCase{}, 3e5, 0.010, cat, SweepRange{});
    const double expected = std::sqrt(4.0 * r.chain.f_piston / (std::acos(-1.0) * 3e5) + 1e-4);
    CHECK(*r.min_bore == doctest::Approx(expected).epsilon(1e-12));
    CHECK(*r.min_bore == doctest::Approx(0.03495).epsilon(1e-3));
    CHECK(*r.selected_bore == doctest::Approx(0.040));
  }

  SUBCASE("overload beyond the catalog is reported, not thrown") {
    const SizingReport r = sizing_report(g, LoadCase{100.0, 9.81}, 6e5, 0.010, cat, SweepRange{});
    CHECK_FALSE(r.errors.empty());
    CHECK_FALSE(r.pass());
  }

  SUBCASE("a catalog-selected bore always clears the requirement") {
    for (double mass = 1.0; mass <= 15.0; mass += 0.5) {
      const SizingReport r = sizing_report(g, LoadCase{mass, 9.81}, 6e5, 0.010, cat, SweepRange{});
      REQUIRE(r.margin.has_value());
      CHECK(*r.margin >= 1.0);
    }
  }
}

TEST_CASE("BoreCatalog parsing") {
  std::istringstream ok("# bores\n10\n  16 # small\n\n20\n");
  const BoreCatalog c = BoreCatalog::parse(ok);
  REQUIRE(c.bores().size() == 3);
  CHECK(c.bores()[1] == doctest::Approx(0.016));

  std::istringstream unordered("20\n10\n");
  CHECK_THROWS_AS(BoreCatalog::parse(unordered), ParseError);
  std::istringstream junk("20 mm\n");
  CHECK_THROWS_AS(BoreCatalog::parse(junk), ParseError);
  std::istringstream empty("# nothing\n");
  CHECK_THROWS_AS(BoreCatalog::parse(empty), ParseError);
}
