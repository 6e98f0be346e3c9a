#include "cbp/lamperti.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "cbp/error.hpp"

namespace cbp {

TimeChangedPath time_change(const SamplePath& p, const ExtinctionKernel* residual_law) {
  if (p.values.empty() || !(p.values.front() > 0.0))
    throw Error(ErrorKind::PathNeverPositive, "time change needs a path that starts above zero");

  TimeChangedPath tc;
  tc.seed = p.seed;
  tc.stream = p.stream;
  tc.policy = p.policy;

  const std::size_t positive = p.tau0_index ? *p.tau0_index : p.values.size();
  tc.cb_times.reserve(positive + 1);
  tc.cb_values.reserve(positive + 1);
  tc.levy_times.reserve(positive + 1);

  const bool recorded = p.clock.size() >= positive;
  double clock = 0.0;
  for (std::size_t i = 0; i < positive; ++i) {
    if (recorded)
      clock = p.clock[i];
    else if (i > 0)
      clock += 0.5 * (p.times[i] - p.times[i - 1]) * (1.0 / p.values[i - 1] + 1.0 / p.values[i]);
    tc.cb_times.push_back(clock);
    tc.cb_values.push_back(p.values[i]);
    tc.levy_times.push_back(p.times[i]);
  }

  if (p.tau0_index) {
    const std::size_t k = positive - 1;
    const double idx = p.passage_index;
    const double dt = std::isnan(p.crossing_dt) ? p.times[*p.tau0_index] - p.times[k] : p.crossing_dt;
    const double tail = idx / (idx - 1.0) * dt / p.values[k];
    const double end = std::max(clock + tail, std::nextafter(clock, INFINITY));
    tc.cb_times.push_back(end);
    tc.cb_values.push_back(0.0);
    tc.levy_times.push_back(p.times[*p.tau0_index]);
    tc.extinction_time = end;
  } else if (p.stop == StopReason::Floor) {
    double residual = 0.0;
    if (residual_law != nullptr) residual = residual_law->sample_extinction_time(p.values.back(), p.residual_u);
    const double end = std::max(clock + residual, std::nextafter(clock, INFINITY));
    tc.cb_times.push_back(end);
    tc.cb_values.push_back(0.0);
    tc.levy_times.push_back(p.times.back());
    tc.extinction_time = end;
  }
  return tc;
}

double clock_inverse(const TimeChangedPath& tc, double a) {
  const auto& A = tc.cb_times;
  if (A.empty()) return 0.0;
  if (a <= A.front()) return tc.levy_times.front();
  if (a >= A.back()) return tc.levy_times.back();
  const auto it = std::upper_bound(A.begin(), A.end(), a);
  const std::size_t j = static_cast<std::size_t>(it - A.begin());
  const std::size_t i = j - 1;
  if (A[i] == a) return tc.levy_times[i];
  const double w = (a - A[i]) / (A[j] - A[i]);
  return tc.levy_times[i] + w * (tc.levy_times[j] - tc.levy_times[i]);
}

double value_at(const TimeChangedPath& tc, double t) {
  if (tc.extinction_time && t >= *tc.extinction_time) return 0.0;
  const auto it = std::upper_bound(tc.cb_times.begin(), tc.cb_times.end(), t);
  if (it == tc.cb_times.begin()) return tc.cb_values.front();
  return tc.cb_values[static_cast<std::size_t>(it - tc.cb_times.begin()) - 1];
}

double exact_feller_sample(double x, double t, double beta, PathRng& rng) {
  const double scale = beta * t;
  std::poisson_distribution<long long> count(x / scale);
  const long long n = count(rng);
  if (n == 0) return 0.0;
  std::gamma_distribution<double> sum(static_cast<double>(n), scale);
  return sum(rng);
}

std::optional<double> ReversedPath::left_limit_at(double at) const {
  if (s.empty() || at < s.front() || at >= extinction_time) return std::nullopt;
  const auto it = std::upper_bound(s.begin(), s.end(), at);
  return values[static_cast<std::size_t>(it - s.begin()) - 1];
}

namespace {

ReversedPath reversed(const TimeChangedPath& tc, const std::vector<double>& forward) {
  if (!tc.extinction_time)
    throw Error(ErrorKind::NotExtinct, "time reversal needs a path with a detected extinction");
  ReversedPath r;
  r.extinction_time = *tc.extinction_time;
  const std::size_t n = forward.size();
  r.s.resize(n);
  r.values.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    r.s[j] = r.extinction_time - tc.cb_times[n - 1 - j];
    r.values[j] = forward[n - 1 - j];
  }
  return r;
}

}  // namespace

ReversedPath reverse_at_extinction(const TimeChangedPath& tc) { return reversed(tc, tc.cb_values); }

ReversedPath reflect_at_infimum(const TimeChangedPath& tc) {
  std::vector<double> reflected(tc.cb_values.size());
  double inf = INFINITY;
  for (std::size_t i = 0; i < reflected.size(); ++i) {
    inf = std::min(inf, tc.cb_values[i]);
    reflected[i] = tc.cb_values[i] - inf;
  }
  return reversed(tc, reflected);
}

std::vector<double> future_infimum(std::span<const double> values) {
  std::vector<double> out(values.begin(), values.end());
  for (std::size_t i = out.size(); i-- > 1;) out[i - 1] = std::min(out[i - 1], out[i]);
  return out;
}

}  // namespace cbp
