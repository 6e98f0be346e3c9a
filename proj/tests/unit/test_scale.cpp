#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <vector>

#include "cbp/scale.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace cbp;
using testing::rel_err;
using testing::thrown_kind;

namespace {

std::vector<double> log_grid(double lo, double hi, int per_decade) {
  std::vector<double> out;
  const int n = static_cast<int>(std::round(std::log10(hi / lo) * per_decade));
  for (int i = 0; i <= n; ++i) out.push_back(lo * std::pow(10.0, static_cast<double>(i) / per_decade));
  return out;
}

}  // namespace

TEST_CASE("closed-form scale functions") {
  const ScaleFunction ws(make_mechanism(Stable{1.0, 1.5}));
  CHECK(ws.has_closed_form());
  CHECK(scale_eval(ws, 1.0) == doctest::Approx(1.0 / boost::math::tgamma(1.5)).epsilon(1e-15));
  CHECK(scale_eval(ws, 1.0) == doctest::Approx(1.128379).epsilon(1e-6));
  CHECK(scale_eval(ScaleFunction(make_mechanism(Quadratic{1.0})), 2.0) == 2.0);
  CHECK(scale_eval(ScaleFunction(make_mechanism(LinearQuadratic{1.0, 1.0})), 1.0) ==
        doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-15));
  CHECK_FALSE(ScaleFunction(make_mechanism(StableGaussian{1.0, 1.5, 1.0})).has_closed_form());
}

TEST_CASE("Laplace inversion of known pairs") {
  const LaplaceTransform exp_pair = [](std::complex<long double> s) { return 1.0L / (s + 1.0L); };
  const LaplaceTransform ramp = [](std::complex<long double> s) { return 1.0L / (s * s); };
  for (double t : {0.01, 0.5, 3.0, 20.0}) {
    CHECK(std::abs(invert_laplace_talbot(exp_pair, t, 64) - std::exp(-t)) < 1e-8);
    CHECK(rel_err(invert_laplace_talbot(ramp, t, 64), t) < 1e-9);
    CHECK(rel_err(invert_laplace_euler(ramp, t, 18), t) < 1e-6);
  }
}

TEST_CASE("numerical inversion matches the closed forms") {
  InversionOptions euler;
  euler.method = InversionMethod::Euler;
  for (const MechanismSpec& s : {MechanismSpec{Stable{1.0, 1.5}}, MechanismSpec{Quadratic{1.0}},
                                 MechanismSpec{LinearQuadratic{1.0, 1.0}}, MechanismSpec{LinearQuadratic{-1.0, 1.0}},
                                 MechanismSpec{Stable{0.5, 1.2}}}) {
    const auto m = make_mechanism(s);
    const ScaleFunction w(m);
    const ScaleFunction we(m, euler);
    CAPTURE(preset_name(s));
    for (double x : log_grid(1e-3, 1e3, 4)) {
      // The supercritical W grows like e^x; keep it representable.
      if (m.largest_root() > 0.0 && x > 50.0) continue;
      const double want = *w.closed(x);
      CAPTURE(x);
      CHECK(rel_err(w.numeric(x), want) < 1e-6);
      CHECK(rel_err(we.numeric(x), want) < 1e-4);
    }
  }
}

TEST_CASE("scale function properties") {
  const MechanismSpec specs[] = {Stable{1.0, 1.5}, Quadratic{1.0}, LinearQuadratic{1.0, 1.0},
                                 StableGaussian{1.0, 1.5, 1.0}, StableDrift{0.5, 1.0, 1.5}};
  for (const auto& s : specs) {
    const auto m = make_mechanism(s);
    const ScaleFunction w(m);
    CAPTURE(preset_name(s));
    CHECK(w(1e-12) < 1e-5);
    double prev = 0.0;
    for (double x : log_grid(1e-4, 1e3, 8)) {
      const double v = w(x);
      CHECK(v >= prev);
      prev = v;
    }
    // Transform roundtrip against exp-sinh quadrature of W.
    boost::math::quadrature::exp_sinh<double> q;
    for (double lambda : {0.5, 1.0, 5.0}) {
      const double lt = q.integrate([&](double x) { return std::exp(-lambda * x) * w(x); }, 0.0, INFINITY);
      CAPTURE(lambda);
      CHECK(rel_err(lt, 1.0 / m.psi(lambda)) < 1e-5);
    }
  }
}

TEST_CASE("Talbot and Euler agree where no closed form exists") {
  InversionOptions euler;
  euler.method = InversionMethod::Euler;
  const auto m = make_mechanism(StableGaussian{1.0, 1.5, 1.0});
  const ScaleFunction wt(m);
  const ScaleFunction we(m, euler);
  for (double x : {1e-3, 0.1, 1.0, 10.0, 500.0}) CHECK(rel_err(wt(x), we(x)) < 1e-4);
}

TEST_CASE("sandwich scan") {
  const auto grid = log_grid(1e-4, 1e4, 4);

  const auto rs = sandwich_scan(ScaleFunction(make_mechanism(Stable{1.0, 1.5})), grid);
  const double inv_gamma = 1.0 / boost::math::tgamma(1.5);
  CHECK(rs.min_product == doctest::Approx(inv_gamma).epsilon(1e-9));
  CHECK(rs.max_product == doctest::Approx(inv_gamma).epsilon(1e-9));
  CHECK(rs.max_product - rs.min_product < 1e-9);
  // K <= p <= 1/K forces K = min(p_min, 1/p_max) = Gamma(1.5).
  CHECK(rs.certified_k == doctest::Approx(0.886227).epsilon(1e-6));
  CHECK(rs.bounded);

  const auto rq = sandwich_scan(ScaleFunction(make_mechanism(Quadratic{1.0})), grid);
  CHECK(rq.min_product == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rq.max_product == doctest::Approx(1.0).epsilon(1e-12));

  const auto rl = sandwich_scan(ScaleFunction(make_mechanism(LinearQuadratic{1.0, 1.0})), grid);
  CHECK(rl.min_product > 0.0);
  CHECK(std::isfinite(rl.max_product));
  CHECK(rl.bounded);

  const auto narrow = log_grid(1e-2, 1e3, 4);
  CHECK(thrown_kind([&] { sandwich_scan(ScaleFunction(make_mechanism(Quadratic{1.0})), narrow); }) ==
        ErrorKind::GridTooSmall);
}

TEST_CASE("hypothesis (H)") {
  std::vector<double> xs;
  for (int i = 0; i <= 40; ++i) xs.push_back(std::pow(0.5, i));

  const double b1[] = {0.5};
  const auto hs = hypothesis_h_check(ScaleFunction(make_mechanism(Stable{1.0, 1.5})), b1, xs);
  CHECK(hs[0].limsup_estimate == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
  CHECK(hs[0].verdict);

  const double b2[] = {0.9};
  const auto hq = hypothesis_h_check(ScaleFunction(make_mechanism(Quadratic{1.0})), b2, xs);
  CHECK(hq[0].limsup_estimate == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(hq[0].verdict);

  const double b3[] = {1.0};
  for (const MechanismSpec& s : {MechanismSpec{Stable{1.0, 1.5}}, MechanismSpec{LinearQuadratic{1.0, 1.0}}}) {
    const auto h1 = hypothesis_h_check(ScaleFunction(make_mechanism(s)), b3, xs);
    CHECK(h1[0].limsup_estimate == 1.0);
    CHECK_FALSE(h1[0].verdict);
  }

  // Small-x behaviour of a composite preset is governed by its quadratic part.
  const double b4[] = {0.5, 0.8};
  std::vector<double> short_xs(xs.begin(), xs.begin() + 16);
  const auto hg = hypothesis_h_check(ScaleFunction(make_mechanism(StableGaussian{1.0, 1.5, 1.0})), b4, short_xs);
  CHECK(hg[0].verdict);
  CHECK(hg[1].verdict);
  CHECK(hg[0].limsup_estimate == doctest::Approx(0.5).epsilon(0.05));
}
