#include "cbp/ensemble.hpp"

#include <cmath>

#include "cbp/error.hpp"
#include "cbp/stats.hpp"

namespace cbp {

TimeChangedPath simulate_cb_path(const BranchingMechanism& m, const ExtinctionKernel* kernel, double x0,
                                 const SimulationOptions& sim, std::uint64_t seed, std::uint64_t stream) {
  return time_change(simulate_path(m, x0, sim, seed, stream), kernel);
}

std::vector<TimeChangedPath> simulate_cb_ensemble(const BranchingMechanism& m, const ExtinctionKernel* kernel,
                                                  const EnsembleOptions& opts) {
  if (opts.n_paths == 0) throw Error(ErrorKind::EmptyEnsemble, "ensemble needs at least one path");
  return parallel_map(opts.n_paths, opts.workers, [&](std::size_t i) {
    return simulate_cb_path(m, kernel, opts.x0, opts.sim, opts.seed, i);
  });
}

std::vector<double> simulate_extinction_times(const BranchingMechanism& m, const ExtinctionKernel* kernel,
                                              const EnsembleOptions& opts) {
  if (opts.n_paths == 0) throw Error(ErrorKind::EmptyEnsemble, "ensemble needs at least one path");
  return parallel_map(opts.n_paths, opts.workers, [&](std::size_t i) {
    const auto tc = simulate_cb_path(m, kernel, opts.x0, opts.sim, opts.seed, i);
    return tc.extinction_time ? *tc.extinction_time : std::nan("");
  });
}

ExtinctionSummary summarize_extinction(std::span<const double> times, const ExtinctionKernel* kernel, double x0) {
  ExtinctionSummary s;
  s.n_paths = times.size();
  std::vector<double> done;
  for (double t : times)
    if (!std::isnan(t)) done.push_back(t);
  s.n_extinct = done.size();
  if (done.empty()) throw Error(ErrorKind::EmptyEnsemble, "no path reached extinction");
  std::sort(done.begin(), done.end());
  for (double q : {0.1, 0.25, 0.5, 0.75, 0.9}) s.t0_quantiles.push_back({q, quantile_sorted(done, q)});
  s.ks_distance = kernel ? ks_one_sample(done, [&](double t) { return kernel->extinction_cdf(x0, t); })
                         : std::nan("");
  return s;
}

}  // namespace cbp
