#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cbp/ensemble.hpp"
#include "cbp/kernel.hpp"
#include "cbp/lamperti.hpp"

namespace cbp {

/// Which view of the reversed path feeds the LIL statistic.
///  Reversed          Y_{(T0 - t)-}
///  ReflectedReversed the reflected path Y - I on the reversed axis
///  FutureInfimum     the future infimum of the reversed path
enum class StatisticKind { Reversed, ReflectedReversed, FutureInfimum };

std::string to_string(StatisticKind k);
StatisticKind statistic_kind_from(const std::string& name);

/// Scale grids: t_n = phi(r^n) by default, or phi(exp(n^r)).
enum class ScaleGrid { Geometric, IteratedExponential };

std::string to_string(ScaleGrid g);
ScaleGrid scale_grid_from(const std::string& name);

/// t_n = phi(r^n) for n = n0..n1, strictly decreasing. Throws Error{RangeError}.
std::vector<double> geometric_sequence(const ExtinctionKernel& k, double r, int n0, int n1);

/// s_n = phi(exp(n^r)) for n = n0..n1. Throws Error{RangeError}.
std::vector<double> iterated_sequence(const ExtinctionKernel& k, double r, int n0, int n1);

std::vector<double> scale_sequence(const ExtinctionKernel& k, ScaleGrid grid, double r, int n0, int n1);

/// f(t) = log log varphi(t) / varphi(t). Throws Error{ScaleTooCoarse} if varphi(t) <= e.
double lil_envelope(const ExtinctionKernel& k, double t);

/// The reversed view of the requested kind. Throws Error{NotExtinct}.
ReversedPath statistic_view(const TimeChangedPath& tc, StatisticKind kind);

/// Y_{(T0 - t)-} / f(t) on a reversed view; 0 when t lies outside [0, T0).
/// Throws Error{ScaleTooCoarse} if varphi(t) <= e.
double lil_statistic(const ReversedPath& view, const ExtinctionKernel& k, double t);

/// Normalization by the explicit Stable envelope:
/// value / (t^(1/(alpha-1)) log log(1/t) (c_+(alpha-1))^(1/(alpha-1))).
double self_similar_statistic(double value, double t, double c_plus, double alpha);

/// A reversed path whose nodes sit on `scales` with value factor * f(t_n).
ReversedPath envelope_path(const ExtinctionKernel& k, std::span<const double> scales, double factor = 1.0);

struct ScanOptions {
  double r = 2.0;
  int n0 = 16;
  int n1 = 20;
  ScaleGrid grid = ScaleGrid::Geometric;
};

struct ScaleQuantiles {
  int n = 0;
  double t = 0.0;
  double q10 = 0.0;
  double q50 = 0.0;
  double q90 = 0.0;
};

struct ScanReport {
  MechanismSpec mechanism;
  StatisticKind kind = StatisticKind::Reversed;
  ScaleGrid grid = ScaleGrid::Geometric;
  double r = 2.0;
  std::vector<double> scales;          // kept scales, strictly decreasing
  std::vector<ScaleQuantiles> quantiles;
  std::vector<int> skipped;            // indices n dropped because varphi(t_n) <= e^2
  std::size_t n_paths = 0;
  std::uint64_t seed = 0;
};

/// Per-path running max of the statistic over the kept scales.
std::vector<double> running_max_row(const ReversedPath& view, const ExtinctionKernel& k,
                                    std::span<const double> scales);

/// Scan over given reversed views. Throws Error{EmptyEnsemble}.
ScanReport scan(std::span<const ReversedPath> views, const ExtinctionKernel& k, StatisticKind kind,
                const ScanOptions& opts, unsigned workers = 1);

/// Scan over time-changed paths. Throws Error{EmptyEnsemble} or Error{NotExtinct}.
ScanReport scan(std::span<const TimeChangedPath> paths, const ExtinctionKernel& k, StatisticKind kind,
                const ScanOptions& opts, unsigned workers = 1);

/// Simulates the ensemble and scans every requested kind in one pass, keeping
/// only the per-path rows in memory. Reports come back in `kinds` order.
std::vector<ScanReport> scan_simulated(const ExtinctionKernel& k, std::span<const StatisticKind> kinds,
                                       const ScanOptions& opts, const EnsembleOptions& ens);

}  // namespace cbp
