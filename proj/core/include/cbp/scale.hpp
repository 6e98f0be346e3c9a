#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "cbp/mechanism.hpp"

namespace cbp {

using LaplaceTransform = std::function<std::complex<long double>(std::complex<long double>)>;

/// Fixed-Talbot inversion with M contour nodes, accumulated in long double.
double invert_laplace_talbot(const LaplaceTransform& transform, double t, int nodes);

/// Abate-Whitt Euler summation, used only as a cross-check of the Talbot route.
double invert_laplace_euler(const LaplaceTransform& transform, double t, int terms);

enum class InversionMethod { FixedTalbot, Euler };

struct InversionOptions {
  int nodes = 64;
  int euler_terms = 18;
  InversionMethod method = InversionMethod::FixedTalbot;
  // Compare successive Talbot refinements (M/2, 3M/4, M) and throw
  // Error{InversionUnstable} when they stop contracting.
  bool check_refinement = true;
};

/// The scale function W of a mechanism: increasing, W(0+) = 0, with Laplace
/// transform 1/psi. Closed forms for Stable, Quadratic and LinearQuadratic;
/// numerical Laplace inversion otherwise.
class ScaleFunction {
 public:
  explicit ScaleFunction(const BranchingMechanism& m, const InversionOptions& opts = {});

  const BranchingMechanism& mechanism() const noexcept { return mech_; }
  const InversionOptions& options() const noexcept { return opts_; }
  bool has_closed_form() const noexcept;

  double operator()(double x) const;
  std::optional<double> closed(double x) const;
  double numeric(double x) const;

 private:
  BranchingMechanism mech_;
  InversionOptions opts_;
};

inline double scale_eval(const ScaleFunction& w, double x) { return w(x); }

struct SandwichReport {
  double min_product = 0.0;
  double max_product = 0.0;
  // Largest K with K <= W(x) x psi(1/x) <= 1/K over the grid.
  double certified_k = 0.0;
  bool bounded = false;
};

/// Extremes of W(x) x psi(1/x) over the grid. Throws Error{GridTooSmall} below 6 decades.
SandwichReport sandwich_scan(const ScaleFunction& w, std::span<const double> x_grid);

struct HCheck {
  double beta = 0.0;
  double limsup_estimate = 0.0;
  bool verdict = false;
};

/// Running max of W(beta x)/W(x) over the second half of a decreasing x sequence;
/// the verdict holds when the estimate stays below 1 - 1e-3.
std::vector<HCheck> hypothesis_h_check(const ScaleFunction& w, std::span<const double> betas,
                                       std::span<const double> x_sequence);

}  // namespace cbp
