#pragma once

#include <cstdint>
#include <random>

namespace cbp {

/// Random stream for one path: seeded from (master_seed, stream) so that every
/// path of an ensemble is reproducible independently of how work is split.
class PathRng {
 public:
  using result_type = std::uint64_t;

  PathRng(std::uint64_t master_seed, std::uint64_t stream);

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  double exponential();

  std::uint64_t master_seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Standard totally right-skewed stable variate S_alpha(1, 1, 0) by the
/// Chambers-Mallows-Stuck method, alpha in (1, 2]. For alpha in (1, 2),
/// E[exp(-l S)] = exp(l^alpha / |cos(pi alpha / 2)|); alpha = 2 gives N(0, 2).
double sample_skewed_stable(double alpha, PathRng& rng);

/// Scale sigma such that sigma * S has E[exp(-l X)] = exp(rate * dt * l^alpha).
double stable_increment_scale(double alpha, double rate, double dt);

}  // namespace cbp
