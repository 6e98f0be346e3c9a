#include <cmath>
#include <numbers>

#include "cbp/random.hpp"

namespace cbp {

PathRng::PathRng(std::uint64_t master_seed, std::uint64_t stream) : seed_(master_seed), stream_(stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x9e3779b9u};
  engine_.seed(seq);
}

double PathRng::uniform() {
  // 53 random bits, shifted off zero.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double PathRng::normal() { return normal_(engine_); }

double PathRng::exponential() { return -std::log(uniform()); }

double sample_skewed_stable(double alpha, PathRng& rng) {
  constexpr double pi = std::numbers::pi;
  if (alpha == 2.0) return std::numbers::sqrt2 * rng.normal();
  const double v = pi * (rng.uniform() - 0.5);
  const double w = rng.exponential();
  const double zeta = std::tan(0.5 * pi * alpha);
  const double b = std::atan(zeta) / alpha;
  const double s = std::pow(1.0 + zeta * zeta, 0.5 / alpha);
  const double arg = alpha * (v + b);
  return s * std::sin(arg) / std::pow(std::cos(v), 1.0 / alpha) *
         std::pow(std::cos(v - arg) / w, (1.0 - alpha) / alpha);
}

double stable_increment_scale(double alpha, double rate, double dt) {
  if (alpha == 2.0) return std::sqrt(rate * dt);
  const double c = std::abs(std::cos(0.5 * std::numbers::pi * alpha));
  return std::pow(rate * dt * c, 1.0 / alpha);
}

}  // namespace cbp
