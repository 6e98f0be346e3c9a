#include "cbp/scale.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/special_functions/binomial.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "cbp/error.hpp"

namespace cbp {

using cld = std::complex<long double>;

double invert_laplace_talbot(const LaplaceTransform& transform, double t, int nodes) {
  const long double pi = std::numbers::pi_v<long double>;
  const long double tt = t;
  const long double r = 2.0L * nodes / (5.0L * tt);
  long double sum = 0.5L * std::exp(r * tt) * transform(cld(r, 0.0L)).real();
  for (int k = 1; k < nodes; ++k) {
    const long double theta = k * pi / nodes;
    const long double cot = std::cos(theta) / std::sin(theta);
    const cld s(r * theta * cot, r * theta);
    const long double sigma = theta + (theta * cot - 1.0L) * cot;
    sum += (std::exp(tt * s) * transform(s) * cld(1.0L, sigma)).real();
  }
  return static_cast<double>(r / nodes * sum);
}

double invert_laplace_euler(const LaplaceTransform& transform, double t, int terms) {
  const long double pi = std::numbers::pi_v<long double>;
  const int m = terms;
  std::vector<long double> xi(2 * m + 1, 1.0L);
  xi[0] = 0.5L;
  const long double two_m = std::pow(2.0L, -m);
  xi[2 * m] = two_m;
  for (int j = 1; j < m; ++j)
    xi[2 * m - j] = xi[2 * m - j + 1] + two_m * boost::math::binomial_coefficient<long double>(m, j);
  const long double shift = m * std::log(10.0L) / 3.0L;
  long double sum = 0.0L;
  for (int k = 0; k <= 2 * m; ++k) {
    const long double eta = (k % 2 == 0 ? 1.0L : -1.0L) * xi[k];
    const cld beta(shift, pi * k);
    sum += eta * transform(beta / static_cast<long double>(t)).real();
  }
  return static_cast<double>(std::pow(10.0L, m / 3.0L) / t * sum);
}

ScaleFunction::ScaleFunction(const BranchingMechanism& m, const InversionOptions& opts) : mech_(m), opts_(opts) {
  if (opts.nodes < 8) throw Error(ErrorKind::OutOfRange, "Talbot inversion needs at least 8 nodes");
}

bool ScaleFunction::has_closed_form() const noexcept {
  const auto& s = mech_.spec();
  return std::holds_alternative<Stable>(s) || std::holds_alternative<Quadratic>(s) ||
         std::holds_alternative<LinearQuadratic>(s);
}

std::optional<double> ScaleFunction::closed(double x) const {
  const PsiComponents& p = mech_.components();
  if (std::holds_alternative<Stable>(mech_.spec()))
    return std::pow(x, p.stable_index - 1.0) / (p.stable_rate * boost::math::tgamma(p.stable_index));
  if (std::holds_alternative<Quadratic>(mech_.spec())) return x / p.diffusion;
  if (std::holds_alternative<LinearQuadratic>(mech_.spec())) {
    if (p.drift == 0.0) return x / p.diffusion;
    return -std::expm1(-p.drift * x / p.diffusion) / p.drift;
  }
  return std::nullopt;
}

double ScaleFunction::numeric(double x) const {
  if (!(x > 0.0)) throw Error(ErrorKind::OutOfRange, "scale function needs x > 0");
  // Supercritical: W grows like exp(root x). Inverting 1/psi(s + root) leaves
  // a bounded function with its pole at the origin, inside the contour.
  const long double shift = mech_.largest_root();
  const BranchingMechanism& m = mech_;
  LaplaceTransform transform = [&m, shift](cld s) { return 1.0L / m.psi(s + shift); };
  const double rescale = static_cast<double>(std::exp(shift * x));

  if (opts_.method == InversionMethod::Euler) return rescale * invert_laplace_euler(transform, x, opts_.euler_terms);

  const double full = invert_laplace_talbot(transform, x, opts_.nodes);
  if (opts_.check_refinement) {
    const double half = invert_laplace_talbot(transform, x, opts_.nodes / 2);
    const double three_q = invert_laplace_talbot(transform, x, (3 * opts_.nodes) / 4);
    const double d1 = std::abs(three_q - half);
    const double d2 = std::abs(full - three_q);
    if (!std::isfinite(full) || (d2 > d1 && d2 > 1e-6 * std::abs(full)))
      throw Error(ErrorKind::InversionUnstable, "Talbot refinements oscillate at x = " + std::to_string(x));
  }
  return rescale * full;
}

double ScaleFunction::operator()(double x) const {
  if (!(x > 0.0)) throw Error(ErrorKind::OutOfRange, "scale function needs x > 0");
  if (auto c = closed(x)) return *c;
  return numeric(x);
}

SandwichReport sandwich_scan(const ScaleFunction& w, std::span<const double> x_grid) {
  if (x_grid.empty()) throw Error(ErrorKind::GridTooSmall, "empty sandwich grid");
  const auto [lo, hi] = std::minmax_element(x_grid.begin(), x_grid.end());
  if (!(*lo > 0.0) || std::log10(*hi / *lo) < 6.0 - 1e-9)
    throw Error(ErrorKind::GridTooSmall, "sandwich grid must span at least 6 decades");
  SandwichReport rep;
  rep.min_product = std::numeric_limits<double>::infinity();
  rep.max_product = 0.0;
  for (double x : x_grid) {
    const double p = w(x) * x * w.mechanism().psi(1.0 / x);
    rep.min_product = std::min(rep.min_product, p);
    rep.max_product = std::max(rep.max_product, p);
  }
  rep.bounded = rep.min_product > 0.0 && std::isfinite(rep.max_product);
  rep.certified_k = rep.bounded ? std::min(rep.min_product, 1.0 / rep.max_product) : 0.0;
  return rep;
}

std::vector<HCheck> hypothesis_h_check(const ScaleFunction& w, std::span<const double> betas,
                                       std::span<const double> x_sequence) {
  std::vector<HCheck> out;
  const std::size_t start = x_sequence.size() / 2;
  for (double beta : betas) {
    HCheck h;
    h.beta = beta;
    h.limsup_estimate = 0.0;
    for (std::size_t i = start; i < x_sequence.size(); ++i) {
      const double x = x_sequence[i];
      h.limsup_estimate = std::max(h.limsup_estimate, w(beta * x) / w(x));
    }
    h.verdict = h.limsup_estimate < 1.0 - 1e-3;
    out.push_back(h);
  }
  return out;
}

}  // namespace cbp
