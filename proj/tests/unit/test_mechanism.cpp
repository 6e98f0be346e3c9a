#include <cmath>
#include <random>

#include "cbp/mechanism.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace cbp;
using testing::thrown_kind;

TEST_CASE("presets classify criticality from psi'(0+)") {
  const auto stable = make_mechanism(Stable{1.0, 1.5});
  CHECK(stable.criticality() == Criticality::Critical);
  CHECK(stable.psi_prime_zero() == 0.0);
  CHECK(stable.largest_root() == 0.0);

  const auto sub = make_mechanism(LinearQuadratic{1.0, 1.0});
  CHECK(sub.criticality() == Criticality::Subcritical);
  CHECK(sub.psi_prime_zero() == 1.0);

  const auto super = make_mechanism(LinearQuadratic{-1.0, 1.0});
  CHECK(super.criticality() == Criticality::Supercritical);
  CHECK(super.largest_root() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("psi values") {
  CHECK(eval_psi(make_mechanism(Stable{1.0, 1.5}), 4.0) == doctest::Approx(8.0).epsilon(1e-15));
  CHECK(eval_psi(make_mechanism(Quadratic{2.0}), 3.0) == 18.0);
  CHECK(eval_psi(make_mechanism(LinearQuadratic{1.0, 1.0}), 2.0) == 6.0);
  CHECK(eval_psi(make_mechanism(StableGaussian{1.0, 1.5, 1.0}), 4.0) == doctest::Approx(24.0));
  CHECK(eval_psi(make_mechanism(StableDrift{2.0, 1.0, 1.5}), 4.0) == doctest::Approx(16.0));
}

TEST_CASE("complex psi agrees with real psi on the positive axis") {
  for (const MechanismSpec& s : {MechanismSpec{Stable{1.3, 1.7}}, MechanismSpec{StableGaussian{1.0, 1.5, 0.5}},
                                 MechanismSpec{StableDrift{-0.5, 2.0, 1.2}}, MechanismSpec{LinearQuadratic{0.3, 2.0}}}) {
    const auto m = make_mechanism(s);
    for (double l : {0.01, 0.7, 3.0, 250.0}) {
      const auto z = m.psi(std::complex<long double>(l, 0.0L));
      CHECK(static_cast<double>(z.real()) == doctest::Approx(m.psi(l)).epsilon(1e-14));
      CHECK(std::abs(static_cast<double>(z.imag())) < 1e-12);
    }
  }
}

TEST_CASE("grey condition") {
  CHECK(grey_condition(make_mechanism(Stable{1.0, 1.5})));
  CHECK(grey_condition(make_mechanism(Quadratic{1.0})));
  // psi(l) = l: the integral of 1/u diverges.
  CHECK_FALSE(grey_condition(BranchingMechanism::make_unchecked(LinearQuadratic{1.0, 0.0})));
  CHECK_FALSE(grey_condition(make_mechanism(LinearQuadratic{-1.0, 1.0})));
  CHECK(grey_condition(make_mechanism(StableDrift{0.5, 1.0, 1.5})));
}

TEST_CASE("construction rejects out-of-range parameters") {
  const MechanismSpec bad[] = {Stable{1.0, 1.0},          Stable{1.0, 2.5},           Stable{0.0, 1.5},
                               Stable{1.0, NAN},          Quadratic{0.0},             Quadratic{-1.0},
                               LinearQuadratic{1.0, 0.0}, StableGaussian{1.0, 2.0, 1.0}, StableGaussian{1.0, 1.5, 0.0},
                               StableDrift{0.0, -1.0, 1.5}, StableDrift{0.0, 1.0, 2.0}};
  for (const auto& s : bad) CHECK(thrown_kind([&] { make_mechanism(s); }) == ErrorKind::OutOfRange);
  CHECK(thrown_kind([&] { make_mechanism(Stable{1.0, 2.0}); }) == std::nullopt);
}

TEST_CASE("exponents at infinity") {
  const auto grid = geometric_grid();
  CHECK(grid.size() == 65);
  CHECK(grid.front() == 1.0);
  CHECK(grid.back() == doctest::Approx(1e8));

  SUBCASE("stable") {
    const auto e = estimate_exponents(make_mechanism(Stable{1.0, 1.5}), grid);
    CHECK(e.gamma == doctest::Approx(1.5).epsilon(0.05 / 1.5));
    CHECK(e.eta == doctest::Approx(1.5).epsilon(0.05 / 1.5));
    CHECK(e.delta == doctest::Approx(1.5).epsilon(0.05 / 1.5));
    CHECK(e.witness_C == doctest::Approx(1.0 / e.witness_Q));
    CHECK(e.witness_c == e.delta);
  }
  SUBCASE("quadratic") {
    const auto e = estimate_exponents(make_mechanism(Quadratic{1.0}), grid);
    CHECK(std::abs(e.gamma - 2.0) < 0.05);
    CHECK(std::abs(e.eta - 2.0) < 0.05);
    CHECK(std::abs(e.delta - 2.0) < 0.05);
  }
  SUBCASE("stable plus gaussian: the quadratic term wins") {
    const auto m = make_mechanism(StableGaussian{1.0, 1.5, 1.0});
    const auto e = estimate_exponents(m, grid);
    // Brute force: slope of lambda^1.5 + lambda^2 between the top two grid points.
    const double n = static_cast<double>(grid.size());
    const double brute = std::log(m.psi(grid[64]) / m.psi(grid[63])) / std::log(grid[64] / grid[63]);
    CHECK(std::abs(brute - 2.0) < 0.05);
    CHECK(std::abs(e.gamma - 2.0) < 0.05);
    CHECK(std::abs(e.eta - 2.0) < 0.05);
    CHECK(std::abs(e.delta - 2.0) < 0.05);
    CHECK(n == 65);
  }
  SUBCASE("grid too small") {
    const auto small = geometric_grid(5.0, 8);
    CHECK(thrown_kind([&] { estimate_exponents(make_mechanism(Stable{1.0, 1.5}), small); }) ==
          ErrorKind::GridTooSmall);
  }
}

TEST_CASE("properties over random presets") {
  std::mt19937_64 gen(20240611);
  std::uniform_real_distribution<double> coef(0.2, 3.0);
  std::uniform_real_distribution<double> index(1.05, 1.95);
  std::uniform_real_distribution<double> drift(-2.0, 2.0);
  const auto grid = geometric_grid();

  for (int trial = 0; trial < 40; ++trial) {
    MechanismSpec spec;
    switch (trial % 5) {
      case 0: spec = Stable{coef(gen), index(gen)}; break;
      case 1: spec = Quadratic{coef(gen)}; break;
      case 2: spec = LinearQuadratic{drift(gen), coef(gen)}; break;
      case 3: spec = StableGaussian{coef(gen), index(gen), coef(gen)}; break;
      default: spec = StableDrift{drift(gen), coef(gen), index(gen)}; break;
    }
    const auto m = make_mechanism(spec);
    CAPTURE(preset_name(spec));
    CHECK(m.psi(0.0) == 0.0);
    CHECK(std::abs(m.psi(m.largest_root())) < 1e-10);
    CHECK((m.largest_root() == 0.0) == (m.psi_prime_zero() >= 0.0));

    // Chord test for convexity on grid triples.
    for (std::size_t i = 0; i + 2 < grid.size(); i += 3) {
      const double l1 = grid[i] * 1e-2, l2 = grid[i + 1] * 1e-2, l3 = grid[i + 2] * 1e-2;
      const double w = (l2 - l1) / (l3 - l1);
      const double chord = (1.0 - w) * m.psi(l1) + w * m.psi(l3);
      CHECK(m.psi(l2) <= chord + 1e-12 * std::abs(chord) + 1e-300);
    }
    // Strictly increasing beyond the root.
    double prev = m.psi(m.largest_root());
    for (double l = m.largest_root() + 1e-3; l < m.largest_root() + 1e3; l *= 1.7) {
      const double v = m.psi(l);
      CHECK(v > prev);
      prev = v;
    }
    // psi' against a central difference.
    for (double l : {0.5, 2.0, 9.0}) {
      const double h = 1e-5 * l;
      const double fd = (m.psi(l + h) - m.psi(l - h)) / (2.0 * h);
      CHECK(m.psi_prime(l) == doctest::Approx(fd).epsilon(1e-6));
    }
    const auto e = estimate_exponents(m, grid);
    CHECK(e.delta >= 1.0 - 0.05);
    CHECK(e.delta <= e.gamma + 1e-12);
    CHECK(e.gamma <= e.eta + 1e-12);
    CHECK(e.eta <= 2.0 + 0.05);
  }
}

TEST_CASE("supercritical largest roots") {
  // -l + l^1.5 = 0 at l = 1; -2l + l^2 = 0 at l = 2.
  CHECK(make_mechanism(StableDrift{-1.0, 1.0, 1.5}).largest_root() == doctest::Approx(1.0).epsilon(1e-11));
  CHECK(make_mechanism(LinearQuadratic{-2.0, 1.0}).largest_root() == doctest::Approx(2.0).epsilon(1e-11));
}
