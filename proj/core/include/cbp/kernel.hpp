#pragma once

#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "cbp/mechanism.hpp"

namespace cbp {

/// Sentinel for lambda = infinity in ExtinctionKernel::cumulant.
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class ClosedForm { None, Stable, Quadratic, LinearQuadratic };

struct KernelOptions {
  double t_min = 1e-6;
  double t_max = 1e6;
  double rel_tol = 1e-9;
  int nodes_per_decade = 512;
  // Use the tabulated quadrature even when a closed form exists.
  bool force_numeric = false;
};

/**
 * Extinction calculus of one (sub)critical mechanism.
 *
 *   phi(t)    = int_t^inf du / psi(u)
 *   varphi(s) = phi^{-1}(s)
 *   u_t(l)    = varphi(t + phi(l)),  u_t(inf) = varphi(t)
 *   P_x(T0 <= t) = exp(-x varphi(t))
 *
 * Closed forms are used for the Stable, Quadratic and LinearQuadratic presets.
 * Other presets tabulate phi on a logarithmic grid over [t_min, t_max]: each
 * node is the previous node plus a Gauss-Legendre segment integral, the value
 * at t_max comes from adaptive Gauss-Kronrod up to a cut T* and the analytic
 * integral of the dominant power beyond it. Off-node queries integrate the
 * short segment up to the next node, so phi stays exactly monotone.
 */
class ExtinctionKernel {
 public:
  /// Throws Error{GreyConditionFails} or Error{QuadratureNotConverged}.
  static ExtinctionKernel build(const BranchingMechanism& m, const KernelOptions& opts = {});

  const BranchingMechanism& mechanism() const noexcept { return mech_; }
  const KernelOptions& options() const noexcept { return opts_; }
  ClosedForm closed_form() const noexcept { return form_; }
  bool has_closed_form() const noexcept { return form_ != ClosedForm::None; }
  double tail_index() const noexcept { return tail_index_; }
  /// Cut T* beyond which the dominant term of psi is used analytically.
  double tail_cut() const noexcept { return tail_cut_; }

  std::span<const double> table_t() const noexcept { return table_t_; }
  std::span<const double> table_phi() const noexcept { return table_phi_; }

  /// Throws Error{RangeError} outside the table for numeric kernels.
  double phi(double t) const;
  double varphi(double s) const;
  /// u_t(lambda); lambda may be kInfinity.
  double cumulant(double t, double lambda) const;

  double extinction_cdf(double x, double t) const;
  /// Inverse-CDF draw of T0 under P_x from a uniform u in (0, 1).
  double sample_extinction_time(double x, double u) const;
  /// E_x[exp(-lambda Y_t) | T0 > t].
  double conditional_laplace(double x, double t, double lambda) const;

 private:
  ExtinctionKernel(const BranchingMechanism& m, const KernelOptions& opts);

  double phi_closed(double t) const;
  double varphi_closed(double s) const;
  double phi_numeric(double t) const;
  double varphi_numeric(double s) const;
  // phi without the table range restriction.
  double phi_extended(double t) const;
  double tail_integral(double t) const;

  BranchingMechanism mech_;
  KernelOptions opts_;
  ClosedForm form_ = ClosedForm::None;
  double tail_index_ = 2.0;
  double tail_coef_ = 1.0;
  double tail_cut_ = 0.0;
  double log_t_min_ = 0.0;
  double log_step_ = 0.0;
  std::vector<double> table_t_;
  std::vector<double> table_phi_;
};

inline ExtinctionKernel build_kernel(const BranchingMechanism& m, const KernelOptions& opts = {}) {
  return ExtinctionKernel::build(m, opts);
}

/// Limit of E[exp(-lambda Y_t varphi(t)) | T0 > t] for a mechanism regularly
/// varying with index alpha: 1 - [1 + lambda^-(alpha-1)]^(-1/(alpha-1)).
double yaglom_limit_lt(double alpha, double lambda);

struct YaglomRow {
  double t = 0.0;
  double lambda = 0.0;
  double value = 0.0;
  double limit = 0.0;
  double abs_error = 0.0;
};

struct YaglomTable {
  double alpha = 0.0;
  double x = 0.0;
  std::vector<YaglomRow> rows;

  /// Largest |error| over lambda at time t (rows with exactly this t).
  double sup_error(double t) const;
  /// True when, for every lambda, the error is strictly decreasing along t_list order.
  bool errors_decrease_in_t() const;
};

/// Compares the conditional Laplace transform at lambda * varphi(t) against
/// yaglom_limit_lt. Throws Error{NotRegularlyVarying} unless the mechanism is a
/// pure power (Stable or Quadratic preset).
YaglomTable yaglom_check(const ExtinctionKernel& k, double x, std::span<const double> t_list,
                         std::span<const double> lambda_grid);

}  // namespace cbp
