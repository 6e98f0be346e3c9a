#include "cbp/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cbp/error.hpp"
#include "cbp/stats.hpp"

namespace cbp {
namespace {

constexpr double kE = std::numbers::e;
// log log is too flat to normalize anything below varphi = e^2.
constexpr double kSkipBelow = kE * kE;

std::vector<double> sequence(const ExtinctionKernel& k, double r, int n0, int n1, bool iterated) {
  if (!(r > 1.0) || !std::isfinite(r)) throw Error(ErrorKind::RangeError, "scale ratio r must exceed 1");
  if (n0 > n1) throw Error(ErrorKind::RangeError, "scale range needs n0 <= n1");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n1 - n0 + 1));
  for (int n = n0; n <= n1; ++n) {
    const double lambda = iterated ? std::exp(std::pow(static_cast<double>(n), r)) : std::pow(r, n);
    if (!std::isfinite(lambda) || !(lambda > 0.0))
      throw Error(ErrorKind::RangeError, "scale " + std::to_string(n) + " leaves the representable range");
    const double t = k.phi(lambda);
    if (!(t > 0.0) || (!out.empty() && !(t < out.back())))
      throw Error(ErrorKind::RangeError, "scale " + std::to_string(n) + " is not resolved by the kernel");
    out.push_back(t);
  }
  return out;
}

}  // namespace

std::string to_string(StatisticKind k) {
  switch (k) {
    case StatisticKind::Reversed: return "reversed";
    case StatisticKind::ReflectedReversed: return "reflected_reversed";
    case StatisticKind::FutureInfimum: return "future_infimum";
  }
  return "unknown";
}

StatisticKind statistic_kind_from(const std::string& name) {
  if (name == "reversed") return StatisticKind::Reversed;
  if (name == "reflected_reversed") return StatisticKind::ReflectedReversed;
  if (name == "future_infimum") return StatisticKind::FutureInfimum;
  throw Error(ErrorKind::InvalidConfig, "unknown statistic kind '" + name + "'");
}

std::string to_string(ScaleGrid g) { return g == ScaleGrid::Geometric ? "geometric" : "iterated_exponential"; }

ScaleGrid scale_grid_from(const std::string& name) {
  if (name == "geometric") return ScaleGrid::Geometric;
  if (name == "iterated_exponential") return ScaleGrid::IteratedExponential;
  throw Error(ErrorKind::InvalidConfig, "unknown scale grid '" + name + "'");
}

std::vector<double> geometric_sequence(const ExtinctionKernel& k, double r, int n0, int n1) {
  return sequence(k, r, n0, n1, false);
}

std::vector<double> iterated_sequence(const ExtinctionKernel& k, double r, int n0, int n1) {
  return sequence(k, r, n0, n1, true);
}

std::vector<double> scale_sequence(const ExtinctionKernel& k, ScaleGrid grid, double r, int n0, int n1) {
  return sequence(k, r, n0, n1, grid == ScaleGrid::IteratedExponential);
}

double lil_envelope(const ExtinctionKernel& k, double t) {
  const double v = k.varphi(t);
  if (!(v > kE)) throw Error(ErrorKind::ScaleTooCoarse, "varphi(t) <= e, log log is not positive");
  return std::log(std::log(v)) / v;
}

ReversedPath statistic_view(const TimeChangedPath& tc, StatisticKind kind) {
  switch (kind) {
    case StatisticKind::Reversed: return reverse_at_extinction(tc);
    case StatisticKind::ReflectedReversed: return reflect_at_infimum(tc);
    case StatisticKind::FutureInfimum: {
      // The past infimum of Y becomes the future infimum on the reversed axis.
      TimeChangedPath inf = tc;
      inf.cb_values = running_infimum(tc.cb_values);
      return reverse_at_extinction(inf);
    }
  }
  throw Error(ErrorKind::InvalidConfig, "unknown statistic kind");
}

double lil_statistic(const ReversedPath& view, const ExtinctionKernel& k, double t) {
  const double f = lil_envelope(k, t);
  const auto v = view.left_limit_at(t);
  return v ? *v / f : 0.0;
}

double self_similar_statistic(double value, double t, double c_plus, double alpha) {
  const double p = 1.0 / (alpha - 1.0);
  return value / (std::pow(t, p) * std::log(std::log(1.0 / t)) * std::pow(c_plus * (alpha - 1.0), p));
}

ReversedPath envelope_path(const ExtinctionKernel& k, std::span<const double> scales, double factor) {
  ReversedPath p;
  std::vector<double> s(scales.begin(), scales.end());
  std::sort(s.begin(), s.end());
  p.s.push_back(0.0);
  p.values.push_back(0.0);
  for (double t : s) {
    if (t <= p.s.back()) continue;
    p.s.push_back(t);
    p.values.push_back(factor * lil_envelope(k, t));
  }
  p.extinction_time = 2.0 * p.s.back();
  return p;
}

std::vector<double> running_max_row(const ReversedPath& view, const ExtinctionKernel& k,
                                    std::span<const double> scales) {
  std::vector<double> row(scales.size());
  double best = -INFINITY;
  for (std::size_t j = 0; j < scales.size(); ++j) {
    best = std::max(best, lil_statistic(view, k, scales[j]));
    row[j] = best;
  }
  return row;
}

namespace {

struct Plan {
  std::vector<double> scales;
  std::vector<int> index;
  std::vector<int> skipped;
};

Plan plan_scales(const ExtinctionKernel& k, const ScanOptions& opts) {
  Plan plan;
  const auto all = scale_sequence(k, opts.grid, opts.r, opts.n0, opts.n1);
  for (std::size_t j = 0; j < all.size(); ++j) {
    const int n = opts.n0 + static_cast<int>(j);
    if (k.varphi(all[j]) <= kSkipBelow) {
      plan.skipped.push_back(n);
    } else {
      plan.scales.push_back(all[j]);
      plan.index.push_back(n);
    }
  }
  if (plan.scales.empty()) throw Error(ErrorKind::ScaleTooCoarse, "every requested scale has varphi <= e^2");
  return plan;
}

ScanReport reduce(const Plan& plan, const std::vector<std::vector<double>>& rows, const ExtinctionKernel& k,
                  StatisticKind kind, const ScanOptions& opts) {
  ScanReport rep;
  rep.mechanism = k.mechanism().spec();
  rep.kind = kind;
  rep.grid = opts.grid;
  rep.r = opts.r;
  rep.scales = plan.scales;
  rep.skipped = plan.skipped;
  rep.n_paths = rows.size();
  std::vector<double> column(rows.size());
  for (std::size_t j = 0; j < plan.scales.size(); ++j) {
    for (std::size_t i = 0; i < rows.size(); ++i) column[i] = rows[i][j];
    std::sort(column.begin(), column.end());
    rep.quantiles.push_back({plan.index[j], plan.scales[j], quantile_sorted(column, 0.1),
                             quantile_sorted(column, 0.5), quantile_sorted(column, 0.9)});
  }
  return rep;
}

}  // namespace

ScanReport scan(std::span<const ReversedPath> views, const ExtinctionKernel& k, StatisticKind kind,
                const ScanOptions& opts, unsigned workers) {
  if (views.empty()) throw Error(ErrorKind::EmptyEnsemble, "scan needs at least one path");
  const Plan plan = plan_scales(k, opts);
  const auto rows =
      parallel_map(views.size(), workers, [&](std::size_t i) { return running_max_row(views[i], k, plan.scales); });
  return reduce(plan, rows, k, kind, opts);
}

ScanReport scan(std::span<const TimeChangedPath> paths, const ExtinctionKernel& k, StatisticKind kind,
                const ScanOptions& opts, unsigned workers) {
  if (paths.empty()) throw Error(ErrorKind::EmptyEnsemble, "scan needs at least one path");
  for (const auto& p : paths)
    if (!p.extinct()) throw Error(ErrorKind::NotExtinct, "scan needs every path to reach extinction");
  const Plan plan = plan_scales(k, opts);
  const auto rows = parallel_map(paths.size(), workers, [&](std::size_t i) {
    return running_max_row(statistic_view(paths[i], kind), k, plan.scales);
  });
  ScanReport rep = reduce(plan, rows, k, kind, opts);
  rep.seed = paths.front().seed;
  return rep;
}

std::vector<ScanReport> scan_simulated(const ExtinctionKernel& k, std::span<const StatisticKind> kinds,
                                       const ScanOptions& opts, const EnsembleOptions& ens) {
  if (ens.n_paths == 0) throw Error(ErrorKind::EmptyEnsemble, "scan needs at least one path");
  const Plan plan = plan_scales(k, opts);
  const auto per_path = parallel_map(ens.n_paths, ens.workers, [&](std::size_t i) {
    const auto tc = simulate_cb_path(k.mechanism(), &k, ens.x0, ens.sim, ens.seed, i);
    if (!tc.extinct())
      throw Error(ErrorKind::NotExtinct, "path " + std::to_string(i) + " stopped before extinction");
    std::vector<std::vector<double>> rows;
    for (StatisticKind kind : kinds) rows.push_back(running_max_row(statistic_view(tc, kind), k, plan.scales));
    return rows;
  });
  std::vector<ScanReport> out;
  for (std::size_t c = 0; c < kinds.size(); ++c) {
    std::vector<std::vector<double>> rows(per_path.size());
    for (std::size_t i = 0; i < per_path.size(); ++i) rows[i] = per_path[i][c];
    ScanReport rep = reduce(plan, rows, k, kinds[c], opts);
    rep.seed = ens.seed;
    out.push_back(std::move(rep));
  }
  return out;
}

}  // namespace cbp
