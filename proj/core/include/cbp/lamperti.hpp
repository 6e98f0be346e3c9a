#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cbp/kernel.hpp"
#include "cbp/paths.hpp"
#include "cbp/random.hpp"

namespace cbp {

/// The CB trajectory Y = X o theta on the Lamperti clock A_t = int_0^t ds / X_s.
struct TimeChangedPath {
  std::vector<double> cb_times;
  std::vector<double> cb_values;
  std::vector<double> levy_times;  // Levy-clock time of each node
  std::optional<double> extinction_time;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::string policy;

  bool extinct() const noexcept { return extinction_time.has_value(); }
};

/**
 * Lamperti time change of a simulated path.
 *
 * A is the trapezoidal integral of 1/X over the positive nodes, taken from the
 * clock recorded by simulate_path when present. The clock is
 * closed off at extinction in one of two ways:
 *  - a bracketed zero crossing contributes p/(p-1) * dt / X_k for the last
 *    partial step, the exact clock mass of a profile X ~ (tau0 - s)^(1/p);
 *  - a path stopped at the floor gets the remaining extinction time drawn from
 *    residual_law at the floor value (exact by the Markov property), or zero
 *    when no kernel is given.
 * Throws Error{PathNeverPositive} if the path does not start above zero.
 */
TimeChangedPath time_change(const SamplePath& p, const ExtinctionKernel* residual_law = nullptr);

/// Right-continuous inverse of the clock, linear between nodes.
double clock_inverse(const TimeChangedPath& tc, double a);

/// Y_t read off the CB grid (right-continuous steps); 0 after extinction.
double value_at(const TimeChangedPath& tc, double t);

/// Exact draw from the Quadratic(beta) transition: Poisson(x/(beta t)) many
/// Exp(beta t) summands, so that E[exp(-l Y)] = exp(-x l / (1 + beta t l)).
double exact_feller_sample(double x, double t, double beta, PathRng& rng);

/// A path on the reversed axis s = T0 - t, ascending in s.
struct ReversedPath {
  std::vector<double> s;
  std::vector<double> values;
  double extinction_time = 0.0;

  /// Predecessor-node value at s; nullopt for s outside [0, T0).
  std::optional<double> left_limit_at(double s) const;
};

/// s -> Y_{(T0 - s)-}. Throws Error{NotExtinct}.
ReversedPath reverse_at_extinction(const TimeChangedPath& tc);

/// s -> (Y - running inf Y)_{(T0 - s)-}. Throws Error{NotExtinct}.
ReversedPath reflect_at_infimum(const TimeChangedPath& tc);

/// Suffix minimum J_i = min_{j >= i} values_j.
std::vector<double> future_infimum(std::span<const double> values);
inline std::vector<double> future_infimum(const TimeChangedPath& tc) { return future_infimum(tc.cb_values); }

}  // namespace cbp
