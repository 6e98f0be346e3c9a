#include "cbp/mechanism.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "cbp/error.hpp"

namespace cbp {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void out_of_range(const std::string& preset, const std::string& param, double value,
                               const std::string& expected) {
  std::ostringstream os;
  os << preset << "." << param << " = " << value << " (expected " << expected << ")";
  throw Error(ErrorKind::OutOfRange, os.str());
}

void require_finite(const std::string& preset, const std::string& param, double v) {
  if (!std::isfinite(v)) out_of_range(preset, param, v, "finite");
}

void require_positive(const std::string& preset, const std::string& param, double v) {
  require_finite(preset, param, v);
  if (!(v > 0.0)) out_of_range(preset, param, v, "> 0");
}

void require_index(const std::string& preset, double alpha, bool allow_two) {
  require_finite(preset, "alpha", alpha);
  if (!(alpha > 1.0) || alpha > 2.0 || (!allow_two && alpha == 2.0))
    out_of_range(preset, "alpha", alpha, allow_two ? "in (1, 2]" : "in (1, 2)");
}

void validate(const MechanismSpec& spec) {
  std::visit(overloaded{
                 [](const Stable& s) {
                   require_positive("stable", "c_plus", s.c_plus);
                   require_index("stable", s.alpha, true);
                 },
                 [](const Quadratic& s) { require_positive("quadratic", "beta", s.beta); },
                 [](const LinearQuadratic& s) {
                   require_finite("linear_quadratic", "a", s.a);
                   require_positive("linear_quadratic", "beta", s.beta);
                 },
                 [](const StableGaussian& s) {
                   require_positive("stable_gaussian", "c_plus", s.c_plus);
                   require_index("stable_gaussian", s.alpha, false);
                   require_positive("stable_gaussian", "beta", s.beta);
                 },
                 [](const StableDrift& s) {
                   require_finite("stable_drift", "a", s.a);
                   require_positive("stable_drift", "c_plus", s.c_plus);
                   require_index("stable_drift", s.alpha, false);
                 },
             },
             spec);
}

PsiComponents decompose(const MechanismSpec& spec) {
  return std::visit(overloaded{
                        [](const Stable& s) { return PsiComponents{0.0, 0.0, s.c_plus, s.alpha}; },
                        [](const Quadratic& s) { return PsiComponents{0.0, s.beta, 0.0, 2.0}; },
                        [](const LinearQuadratic& s) { return PsiComponents{s.a, s.beta, 0.0, 2.0}; },
                        [](const StableGaussian& s) {
                          return PsiComponents{0.0, s.beta, s.c_plus, s.alpha};
                        },
                        [](const StableDrift& s) { return PsiComponents{s.a, 0.0, s.c_plus, s.alpha}; },
                    },
                    spec);
}

}  // namespace

std::string preset_name(const MechanismSpec& spec) {
  return std::visit(overloaded{
                        [](const Stable&) { return std::string("stable"); },
                        [](const Quadratic&) { return std::string("quadratic"); },
                        [](const LinearQuadratic&) { return std::string("linear_quadratic"); },
                        [](const StableGaussian&) { return std::string("stable_gaussian"); },
                        [](const StableDrift&) { return std::string("stable_drift"); },
                    },
                    spec);
}

std::string to_string(Criticality c) {
  switch (c) {
    case Criticality::Supercritical: return "supercritical";
    case Criticality::Critical: return "critical";
    case Criticality::Subcritical: return "subcritical";
  }
  return "unknown";
}

BranchingMechanism::BranchingMechanism(const MechanismSpec& spec) : spec_(spec), parts_(decompose(spec)) {
  const double slope = parts_.drift;
  criticality_ = slope < 0.0    ? Criticality::Supercritical
                 : slope == 0.0 ? Criticality::Critical
                                : Criticality::Subcritical;
  if (slope >= 0.0) {
    largest_root_ = 0.0;
    return;
  }
  // psi < 0 on (0, root), psi > 0 beyond it. Double the upper bracket until psi > 0.
  double hi = 1.0;
  while (psi(hi) <= 0.0 && hi < 1e300) hi *= 2.0;
  double lo = 0.0;
  for (int it = 0; it < 2000 && hi - lo > 1e-12 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (psi(mid) <= 0.0)
      lo = mid;
    else
      hi = mid;
  }
  largest_root_ = 0.5 * (lo + hi);
}

BranchingMechanism BranchingMechanism::make(const MechanismSpec& spec) {
  validate(spec);
  return BranchingMechanism(spec);
}

BranchingMechanism BranchingMechanism::make_unchecked(const MechanismSpec& spec) {
  return BranchingMechanism(spec);
}

double BranchingMechanism::psi(double lambda) const {
  double v = parts_.drift * lambda + parts_.diffusion * lambda * lambda;
  if (parts_.stable_rate != 0.0) v += parts_.stable_rate * std::pow(lambda, parts_.stable_index);
  return v;
}

std::complex<long double> BranchingMechanism::psi(std::complex<long double> s) const {
  using C = std::complex<long double>;
  C v = static_cast<long double>(parts_.drift) * s + static_cast<long double>(parts_.diffusion) * s * s;
  if (parts_.stable_rate != 0.0)
    v += static_cast<long double>(parts_.stable_rate) *
         std::pow(s, static_cast<long double>(parts_.stable_index));
  return v;
}

double BranchingMechanism::psi_prime(double lambda) const {
  double v = parts_.drift + 2.0 * parts_.diffusion * lambda;
  if (parts_.stable_rate != 0.0)
    v += parts_.stable_rate * parts_.stable_index * std::pow(lambda, parts_.stable_index - 1.0);
  return v;
}

double BranchingMechanism::tail_index() const noexcept {
  if (parts_.diffusion > 0.0) return 2.0;
  if (parts_.stable_rate > 0.0) return parts_.stable_index;
  return 1.0;
}

double BranchingMechanism::tail_coefficient() const noexcept {
  if (parts_.diffusion > 0.0) return parts_.diffusion + (parts_.stable_index == 2.0 ? parts_.stable_rate : 0.0);
  if (parts_.stable_rate > 0.0) return parts_.stable_rate;
  return parts_.drift;
}

bool BranchingMechanism::is_pure_power() const noexcept {
  return std::holds_alternative<Stable>(spec_) || std::holds_alternative<Quadratic>(spec_);
}

BranchingMechanism make_mechanism(const MechanismSpec& spec) { return BranchingMechanism::make(spec); }

bool grey_condition(const BranchingMechanism& m) {
  return m.integrable_at_infinity() && m.psi_prime_zero() >= 0.0;
}

std::vector<double> geometric_grid(double decades, int per_decade) {
  const int n = static_cast<int>(std::lround(decades * per_decade));
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) grid.push_back(std::pow(10.0, static_cast<double>(k) / per_decade));
  return grid;
}

namespace {

// log of the inf over u <= v of g(v)/g(u), g(l) = psi(l) l^-c, on log-space samples.
double log_min_ratio(std::span<const double> log_l, std::span<const double> log_psi, double c) {
  double running_max = -std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (std::size_t i = 0; i < log_l.size(); ++i) {
    const double g = log_psi[i] - c * log_l[i];
    running_max = std::max(running_max, g);
    worst = std::min(worst, g - running_max);
  }
  return worst;
}

}  // namespace

ExponentEstimate estimate_exponents(const BranchingMechanism& m, std::span<const double> grid,
                                    const ExponentOptions& opts) {
  std::vector<double> log_l;
  std::vector<double> log_psi;
  std::vector<double> sorted(grid.begin(), grid.end());
  std::sort(sorted.begin(), sorted.end());
  for (double l : sorted) {
    if (!(l >= 1.0)) continue;
    const double p = m.psi(l);
    if (!(p > 0.0)) continue;
    if (!log_l.empty() && std::log(l) <= log_l.back()) continue;
    log_l.push_back(std::log(l));
    log_psi.push_back(std::log(p));
  }
  if (log_l.size() < 3 || (log_l.back() - log_l.front()) / std::log(10.0) < 6.0 - 1e-9)
    throw Error(ErrorKind::GridTooSmall, "exponent grid must span at least 6 decades above 1");

  ExponentEstimate est;
  const std::size_t n = log_l.size();
  const auto tail_start = static_cast<std::size_t>(
      std::floor(static_cast<double>(n - 1) * (1.0 - std::clamp(opts.tail_fraction, 0.0, 1.0))));
  est.gamma = std::numeric_limits<double>::infinity();
  est.eta = -std::numeric_limits<double>::infinity();
  for (std::size_t i = std::min(tail_start, n - 2); i + 1 < n; ++i) {
    const double slope = (log_psi[i + 1] - log_psi[i]) / (log_l[i + 1] - log_l[i]);
    est.gamma = std::min(est.gamma, slope);
    est.eta = std::max(est.eta, slope);
  }

  const double log_q = std::log(opts.q_min);
  auto admissible = [&](double c) { return log_min_ratio(log_l, log_psi, c) >= log_q; };
  double lo = 0.0;
  double hi = 4.0;
  if (!admissible(lo)) {
    lo = 0.0;
  } else {
    while (admissible(hi)) hi *= 2.0;
    while (hi - lo > opts.bisection_tol) {
      const double mid = 0.5 * (lo + hi);
      if (admissible(mid))
        lo = mid;
      else
        hi = mid;
    }
  }
  // delta <= gamma always; the finite grid can only over-admit c.
  est.delta = std::min(lo, est.gamma);
  est.witness_c = est.delta;
  est.witness_Q = std::exp(log_min_ratio(log_l, log_psi, est.delta));
  est.witness_C = 1.0 / est.witness_Q;
  return est;
}

}  // namespace cbp
