#include "cbp/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "cbp/error.hpp"

namespace cbp {
namespace {

constexpr double kTailRelTol = 1e-10;
constexpr double kMaxTailCut = 1e300;
constexpr int kNewtonCap = 60;

[[noreturn]] void range_error(const char* what, double arg, double lo, double hi) {
  std::ostringstream os;
  os.precision(17);
  os << what << "(" << arg << ") outside tabulated range [" << lo << ", " << hi << "]";
  throw Error(ErrorKind::RangeError, os.str());
}

}  // namespace

ExtinctionKernel::ExtinctionKernel(const BranchingMechanism& m, const KernelOptions& opts)
    : mech_(m), opts_(opts) {}

ExtinctionKernel ExtinctionKernel::build(const BranchingMechanism& m, const KernelOptions& opts) {
  if (!grey_condition(m)) {
    std::ostringstream os;
    os << preset_name(m.spec()) << ": ";
    if (!m.integrable_at_infinity())
      os << "integral of 1/psi diverges at infinity";
    else
      os << "psi'(0+) = " << m.psi_prime_zero() << " < 0";
    throw Error(ErrorKind::GreyConditionFails, os.str());
  }
  if (!(opts.t_min > 0.0) || !(opts.t_max > opts.t_min) || !(opts.rel_tol > 0.0) || opts.nodes_per_decade < 1)
    throw Error(ErrorKind::OutOfRange, "kernel options need 0 < t_min < t_max, rel_tol > 0");

  ExtinctionKernel k(m, opts);
  k.tail_index_ = m.tail_index();
  k.tail_coef_ = m.tail_coefficient();

  if (!opts.force_numeric) {
    if (std::holds_alternative<Stable>(m.spec()))
      k.form_ = ClosedForm::Stable;
    else if (std::holds_alternative<Quadratic>(m.spec()))
      k.form_ = ClosedForm::Quadratic;
    else if (std::holds_alternative<LinearQuadratic>(m.spec()))
      k.form_ = ClosedForm::LinearQuadratic;
  }
  if (k.has_closed_form()) return k;

  // Tail cut: smallest point of a 1/8-decade grid above t_max where the dominant
  // power matches psi to kTailRelTol.
  const double p = k.tail_index_;
  const double c = k.tail_coef_;
  double cut = opts.t_max;
  const double step = std::pow(10.0, 0.125);
  while (true) {
    const double full = m.psi(cut);
    const double lead = c * std::pow(cut, p);
    if (std::abs(full - lead) <= kTailRelTol * full) break;
    cut *= step;
    if (cut > kMaxTailCut)
      throw Error(ErrorKind::QuadratureNotConverged, "no tail cut below 1e300 for " + preset_name(m.spec()));
  }
  k.tail_cut_ = cut;
  // phi(t_max) = int_{t_max}^{T*} + analytic tail.
  const double phi_top = k.phi_extended(opts.t_max);

  const int decades_nodes =
      static_cast<int>(std::ceil(std::log10(opts.t_max / opts.t_min) * opts.nodes_per_decade - 1e-9));
  k.log_t_min_ = std::log(opts.t_min);
  k.log_step_ = (std::log(opts.t_max) - k.log_t_min_) / decades_nodes;
  const std::size_t n = static_cast<std::size_t>(decades_nodes) + 1;
  k.table_t_.resize(n);
  k.table_phi_.resize(n);
  for (std::size_t i = 0; i < n; ++i) k.table_t_[i] = std::exp(k.log_t_min_ + k.log_step_ * static_cast<double>(i));
  k.table_t_.front() = opts.t_min;
  k.table_t_.back() = opts.t_max;

  k.table_phi_.back() = phi_top;
  auto integrand = [&m](double s) {
    const double u = std::exp(s);
    return u / m.psi(u);
  };
  for (std::size_t i = n - 1; i-- > 0;) {
    const double seg = boost::math::quadrature::gauss<double, 10>::integrate(
        integrand, std::log(k.table_t_[i]), std::log(k.table_t_[i + 1]));
    k.table_phi_[i] = k.table_phi_[i + 1] + seg;
  }
  return k;
}

double ExtinctionKernel::tail_integral(double t) const {
  return std::pow(t, 1.0 - tail_index_) / (tail_coef_ * (tail_index_ - 1.0));
}

double ExtinctionKernel::phi_extended(double t) const {
  const BranchingMechanism& m = mech_;
  auto integrand = [&m](double s) {
    const double u = std::exp(s);
    return u / m.psi(u);
  };
  auto adaptive = [&](double a, double b) {
    double err = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        integrand, std::log(a), std::log(b), 20, opts_.rel_tol * 1e-2, &err);
    if (!(err <= opts_.rel_tol * std::abs(v)) && err > 1e-300)
      throw Error(ErrorKind::QuadratureNotConverged, "phi quadrature error estimate too large");
    return v;
  };

  if (t >= tail_cut_) return tail_integral(t);
  if (!table_phi_.empty() && t < opts_.t_min) return table_phi_.front() + adaptive(t, opts_.t_min);
  if (!table_phi_.empty() && t <= opts_.t_max) return phi_numeric(t);
  return adaptive(t, tail_cut_) + tail_integral(tail_cut_);
}

double ExtinctionKernel::phi_closed(double t) const {
  const PsiComponents& p = mech_.components();
  switch (form_) {
    case ClosedForm::Stable:
      return std::pow(t, 1.0 - p.stable_index) / (p.stable_rate * (p.stable_index - 1.0));
    case ClosedForm::Quadratic:
      return 1.0 / (p.diffusion * t);
    case ClosedForm::LinearQuadratic:
      if (p.drift == 0.0) return 1.0 / (p.diffusion * t);
      return std::log1p(p.drift / (p.diffusion * t)) / p.drift;
    case ClosedForm::None:
      break;
  }
  return phi_numeric(t);
}

double ExtinctionKernel::varphi_closed(double s) const {
  const PsiComponents& p = mech_.components();
  switch (form_) {
    case ClosedForm::Stable:
      return std::pow(p.stable_rate * (p.stable_index - 1.0) * s, -1.0 / (p.stable_index - 1.0));
    case ClosedForm::Quadratic:
      return 1.0 / (p.diffusion * s);
    case ClosedForm::LinearQuadratic:
      if (p.drift == 0.0) return 1.0 / (p.diffusion * s);
      return p.drift / (p.diffusion * std::expm1(p.drift * s));
    case ClosedForm::None:
      break;
  }
  return varphi_numeric(s);
}

double ExtinctionKernel::phi_numeric(double t) const {
  if (!(t >= opts_.t_min && t <= opts_.t_max)) range_error("phi", t, opts_.t_min, opts_.t_max);
  const std::size_t last = table_t_.size() - 1;
  auto i = static_cast<std::size_t>(std::clamp(std::floor((std::log(t) - log_t_min_) / log_step_), 0.0,
                                               static_cast<double>(last)));
  while (i > 0 && table_t_[i] > t) --i;
  while (i < last && table_t_[i + 1] <= t) ++i;
  if (table_t_[i] == t) return table_phi_[i];
  const BranchingMechanism& m = mech_;
  auto integrand = [&m](double s) {
    const double u = std::exp(s);
    return u / m.psi(u);
  };
  return table_phi_[i + 1] +
         boost::math::quadrature::gauss<double, 10>::integrate(integrand, std::log(t), std::log(table_t_[i + 1]));
}

double ExtinctionKernel::varphi_numeric(double s) const {
  const double s_lo = table_phi_.back();
  const double s_hi = table_phi_.front();
  if (!(s >= s_lo && s <= s_hi)) range_error("varphi", s, s_lo, s_hi);

  // table_phi_ is decreasing; find table_phi_[j] >= s >= table_phi_[j+1].
  auto it = std::lower_bound(table_phi_.begin(), table_phi_.end(), s, std::greater<double>());
  std::size_t j = static_cast<std::size_t>(it - table_phi_.begin());
  if (j < table_phi_.size() && table_phi_[j] == s) return table_t_[j];
  j = j == 0 ? 0 : j - 1;
  double y_lo = std::log(table_t_[j]);
  double y_hi = std::log(table_t_[std::min(j + 1, table_t_.size() - 1)]);
  double y = 0.5 * (y_lo + y_hi);
  for (int it_count = 0; it_count < kNewtonCap; ++it_count) {
    const double t = std::exp(y);
    const double g = phi_numeric(t) - s;
    if (g == 0.0) return t;
    if (g > 0.0)
      y_lo = y;
    else
      y_hi = y;
    // d phi / d log t = -t / psi(t)
    double next = y + g * mech_.psi(t) / t;
    if (!(next > y_lo && next < y_hi)) next = 0.5 * (y_lo + y_hi);
    const double dy = std::abs(next - y);
    y = next;
    if (dy < 1e-14 * std::max(1.0, std::abs(y))) break;
  }
  return std::exp(y);
}

double ExtinctionKernel::phi(double t) const {
  if (!(t > 0.0)) throw Error(ErrorKind::OutOfRange, "phi needs t > 0");
  if (std::isinf(t)) return 0.0;
  return has_closed_form() ? phi_closed(t) : phi_numeric(t);
}

double ExtinctionKernel::varphi(double s) const {
  if (!(s > 0.0)) throw Error(ErrorKind::OutOfRange, "varphi needs t > 0");
  return has_closed_form() ? varphi_closed(s) : varphi_numeric(s);
}

double ExtinctionKernel::cumulant(double t, double lambda) const {
  if (!(t >= 0.0)) throw Error(ErrorKind::OutOfRange, "u_t needs t >= 0");
  if (!(lambda > 0.0)) throw Error(ErrorKind::OutOfRange, "u_t needs lambda > 0");
  if (std::isinf(lambda)) return varphi(t);
  if (t == 0.0) return lambda;
  return varphi(t + phi(lambda));
}

double ExtinctionKernel::extinction_cdf(double x, double t) const {
  if (!(x > 0.0) || !(t > 0.0)) throw Error(ErrorKind::OutOfRange, "extinction_cdf needs x > 0, t > 0");
  const double e = x * varphi(t);
  if (e > 745.0) return 0.0;
  return std::exp(-e);
}

double ExtinctionKernel::sample_extinction_time(double x, double u) const {
  const double s = -std::log(u) / x;
  return has_closed_form() ? phi_closed(s) : phi_extended(s);
}

double ExtinctionKernel::conditional_laplace(double x, double t, double lambda) const {
  if (!(x > 0.0) || !(t > 0.0) || !(lambda > 0.0))
    throw Error(ErrorKind::OutOfRange, "conditional_laplace needs x, t, lambda > 0");
  const double v = varphi(t);
  const double u = cumulant(t, lambda);
  const double survive = -std::expm1(-x * v);
  if (!(survive > 0.0)) throw Error(ErrorKind::DegenerateCondition, "P(T0 > t) underflows");
  return (std::expm1(-x * u) - std::expm1(-x * v)) / survive;
}

double yaglom_limit_lt(double alpha, double lambda) {
  const double q = alpha - 1.0;
  const double bracket = std::log1p(std::pow(lambda, -q));
  return -std::expm1(-bracket / q);
}

double YaglomTable::sup_error(double t) const {
  double sup = 0.0;
  for (const auto& r : rows)
    if (r.t == t) sup = std::max(sup, r.abs_error);
  return sup;
}

bool YaglomTable::errors_decrease_in_t() const {
  std::vector<double> lambdas;
  for (const auto& r : rows)
    if (std::find(lambdas.begin(), lambdas.end(), r.lambda) == lambdas.end()) lambdas.push_back(r.lambda);
  for (double l : lambdas) {
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& r : rows) {
      if (r.lambda != l) continue;
      if (!(r.abs_error < prev)) return false;
      prev = r.abs_error;
    }
  }
  return true;
}

YaglomTable yaglom_check(const ExtinctionKernel& k, double x, std::span<const double> t_list,
                         std::span<const double> lambda_grid) {
  const BranchingMechanism& m = k.mechanism();
  if (!m.is_pure_power())
    throw Error(ErrorKind::NotRegularlyVarying,
                preset_name(m.spec()) + " is not a single power; the quasi-stationary limit is not checked");
  YaglomTable table;
  table.alpha = m.tail_index();
  table.x = x;
  for (double t : t_list) {
    const double scale = k.varphi(t);
    for (double lambda : lambda_grid) {
      YaglomRow row;
      row.t = t;
      row.lambda = lambda;
      row.value = k.conditional_laplace(x, t, lambda * scale);
      row.limit = yaglom_limit_lt(table.alpha, lambda);
      row.abs_error = std::abs(row.value - row.limit);
      table.rows.push_back(row);
    }
  }
  return table;
}

}  // namespace cbp
