#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

#include "cbp/kernel.hpp"
#include "cbp/lamperti.hpp"
#include "cbp/paths.hpp"

namespace cbp {

/// Evaluates fn(0..n-1) on up to `workers` threads. Results are stored by
/// index, so the output never depends on the worker count. If any call
/// throws, the exception of the lowest failing index is rethrown.
template <class F>
auto parallel_map(std::size_t n, unsigned workers, F&& fn) -> std::vector<decltype(fn(std::size_t{}))> {
  using T = decltype(fn(std::size_t{}));
  std::vector<T> out(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto drain = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        out[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned threads = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), n));
  if (threads <= 1) {
    drain();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(drain);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

struct EnsembleOptions {
  std::size_t n_paths = 1000;
  double x0 = 1.0;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  SimulationOptions sim;
};

/// Simulate one Levy path with stream id `stream` and time-change it. The
/// kernel, when given, closes off paths that stop at the floor.
TimeChangedPath simulate_cb_path(const BranchingMechanism& m, const ExtinctionKernel* kernel, double x0,
                                 const SimulationOptions& sim, std::uint64_t seed, std::uint64_t stream);

/// Path i of the ensemble uses stream i.
std::vector<TimeChangedPath> simulate_cb_ensemble(const BranchingMechanism& m, const ExtinctionKernel* kernel,
                                                  const EnsembleOptions& opts);

/// Extinction times of the ensemble without keeping the paths; NaN marks a
/// path that was cut off before extinction.
std::vector<double> simulate_extinction_times(const BranchingMechanism& m, const ExtinctionKernel* kernel,
                                              const EnsembleOptions& opts);

struct QuantilePoint {
  double level = 0.0;
  double value = 0.0;
};

struct ExtinctionSummary {
  std::size_t n_paths = 0;
  std::size_t n_extinct = 0;
  std::vector<QuantilePoint> t0_quantiles;
  double ks_distance = 0.0;  // against exp(-x varphi(t)); NaN without a kernel
};

/// Quantiles at 0.1, 0.25, 0.5, 0.75, 0.9 over the extinct paths.
ExtinctionSummary summarize_extinction(std::span<const double> times, const ExtinctionKernel* kernel, double x0);

}  // namespace cbp
