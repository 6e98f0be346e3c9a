#include "cbp/paths.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "cbp/error.hpp"
#include "cbp/random.hpp"

namespace cbp {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void validate(const StepPolicy& policy) {
  std::visit(overloaded{
                 [](const FixedStep& p) {
                   if (!(p.dt > 0.0) || !std::isfinite(p.dt))
                     throw Error(ErrorKind::StepPolicyInvalid, "fixed step needs dt > 0");
                 },
                 [](const AdaptiveLamperti& p) {
                   if (!(p.eps > 0.0) || !(p.dt_min > 0.0) || !(p.dt_max >= p.dt_min))
                     throw Error(ErrorKind::StepPolicyInvalid,
                                 "adaptive_lamperti needs eps > 0 and 0 < dt_min <= dt_max");
                 },
                 [](const AdaptiveExtinction& p) {
                   if (!(p.eps > 0.0) || !(p.dt_max > 0.0))
                     throw Error(ErrorKind::StepPolicyInvalid, "adaptive_extinction needs eps > 0 and dt_max > 0");
                 },
             },
             policy);
}

}  // namespace

std::string describe(const StepPolicy& policy) {
  std::ostringstream os;
  os.precision(17);
  std::visit(overloaded{
                 [&](const FixedStep& p) { os << "fixed(dt=" << p.dt << ")"; },
                 [&](const AdaptiveLamperti& p) {
                   os << "adaptive_lamperti(eps=" << p.eps << ",dt_min=" << p.dt_min << ",dt_max=" << p.dt_max
                      << ")";
                 },
                 [&](const AdaptiveExtinction& p) {
                   os << "adaptive_extinction(eps=" << p.eps << ",dt_max=" << p.dt_max << ")";
                 },
             },
             policy);
  return os.str();
}

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::Crossed: return "crossed";
    case StopReason::Floor: return "floor";
    case StopReason::Horizon: return "horizon";
    case StopReason::ClockHorizon: return "clock_horizon";
    case StopReason::StepLimit: return "step_limit";
  }
  return "unknown";
}

SamplePath simulate_path(const BranchingMechanism& m, double x0, const SimulationOptions& opts,
                         std::uint64_t seed, std::uint64_t stream) {
  if (!(x0 > 0.0) || !std::isfinite(x0)) throw Error(ErrorKind::OutOfRange, "simulate_path needs x0 > 0");
  validate(opts.policy);

  const PsiComponents& parts = m.components();
  const double exponent = m.tail_index();
  const double floor = opts.floor_ratio * x0;
  PathRng rng(seed, stream);

  auto next_dt = [&](double x) {
    return std::visit(overloaded{
                          [](const FixedStep& p) { return p.dt; },
                          [x](const AdaptiveLamperti& p) { return std::clamp(p.eps * x, p.dt_min, p.dt_max); },
                          [x, exponent](const AdaptiveExtinction& p) {
                            return std::min(p.eps * std::pow(x, exponent), p.dt_max);
                          },
                      },
                      opts.policy);
  };

  SamplePath path;
  path.seed = seed;
  path.stream = stream;
  path.policy = describe(opts.policy);
  path.passage_index = exponent > 1.0 ? exponent : 2.0;
  path.times.push_back(0.0);
  path.values.push_back(x0);
  path.clock.push_back(0.0);

  double t = 0.0;
  double x = x0;
  double clock = 0.0;
  std::size_t steps = 0;
  while (true) {
    if (t >= opts.horizon) {
      path.stop = StopReason::Horizon;
      break;
    }
    if (clock >= opts.clock_horizon) {
      path.stop = StopReason::ClockHorizon;
      break;
    }
    if (steps++ >= opts.max_steps) {
      path.stop = StopReason::StepLimit;
      break;
    }
    const double dt = std::min(next_dt(x), opts.horizon - t);
    double inc = -parts.drift * dt;
    if (parts.diffusion > 0.0) inc += std::sqrt(2.0 * parts.diffusion * dt) * rng.normal();
    if (parts.stable_rate > 0.0)
      inc += stable_increment_scale(parts.stable_index, parts.stable_rate, dt) *
             sample_skewed_stable(parts.stable_index, rng);
    const double xn = x + inc;
    if (xn <= 0.0) {
      // Linear interpolation to the crossing.
      path.crossing_dt = dt * (x / (x - xn));
      const double tc = t + path.crossing_dt;
      path.times.push_back(tc > t ? tc : std::nextafter(t, INFINITY));
      path.values.push_back(0.0);
      path.tau0_index = path.values.size() - 1;
      path.stop = StopReason::Crossed;
      break;
    }
    clock += 0.5 * dt * (1.0 / x + 1.0 / xn);
    const double tn = t + dt;
    t = tn > t ? tn : std::nextafter(t, INFINITY);
    x = xn;
    path.times.push_back(t);
    path.values.push_back(x);
    path.clock.push_back(clock);
    if (x <= floor) {
      path.stop = StopReason::Floor;
      break;
    }
  }
  path.residual_u = rng.uniform();
  return path;
}

std::vector<double> running_infimum(std::span<const double> values) {
  std::vector<double> out(values.begin(), values.end());
  for (std::size_t i = 1; i < out.size(); ++i) out[i] = std::min(out[i], out[i - 1]);
  return out;
}

std::optional<double> first_passage_above(const SamplePath& p, double y) {
  for (std::size_t i = 0; i < p.values.size(); ++i)
    if (p.values[i] >= y) return p.times[i];
  return std::nullopt;
}

std::optional<double> last_passage_below(const SamplePath& p, double y) {
  for (std::size_t i = p.values.size(); i-- > 0;)
    if (p.values[i] <= y) return p.times[i];
  return std::nullopt;
}

std::size_t count_downward_violations(const SamplePath& p, const BranchingMechanism& m, double k_sigma) {
  const PsiComponents& parts = m.components();
  std::size_t bad = 0;
  const std::size_t end = p.tau0_index ? *p.tau0_index : p.values.size();
  for (std::size_t i = 1; i < end; ++i) {
    const double dt = p.times[i] - p.times[i - 1];
    const double drop = p.values[i - 1] - p.values[i];
    double bound = std::max(0.0, parts.drift * dt);
    if (parts.diffusion > 0.0) bound += k_sigma * std::sqrt(2.0 * parts.diffusion * dt);
    if (parts.stable_rate > 0.0)
      bound += k_sigma * stable_increment_scale(parts.stable_index, parts.stable_rate, dt);
    if (drop > bound) ++bad;
  }
  return bad;
}

namespace {

constexpr char kMagic[8] = {'C', 'B', 'P', 'P', 'A', 'T', 'H', '1'};

void put_u64(std::ostream& os, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  os.write(b, 8);
}

void put_f64(std::ostream& os, double v) { put_u64(os, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) throw Error(ErrorKind::InvalidConfig, "truncated path dump");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& is) { return std::bit_cast<double>(get_u64(is)); }

std::vector<double> spec_params(const MechanismSpec& spec) {
  return std::visit(overloaded{
                        [](const Stable& s) { return std::vector<double>{s.c_plus, s.alpha}; },
                        [](const Quadratic& s) { return std::vector<double>{s.beta}; },
                        [](const LinearQuadratic& s) { return std::vector<double>{s.a, s.beta}; },
                        [](const StableGaussian& s) { return std::vector<double>{s.c_plus, s.alpha, s.beta}; },
                        [](const StableDrift& s) { return std::vector<double>{s.a, s.c_plus, s.alpha}; },
                    },
                    spec);
}

MechanismSpec spec_from(std::uint64_t code, const std::vector<double>& v) {
  auto need = [&](std::size_t n) {
    if (v.size() != n) throw Error(ErrorKind::InvalidConfig, "path dump parameter count mismatch");
  };
  switch (code) {
    case 0: need(2); return Stable{v[0], v[1]};
    case 1: need(1); return Quadratic{v[0]};
    case 2: need(2); return LinearQuadratic{v[0], v[1]};
    case 3: need(3); return StableGaussian{v[0], v[1], v[2]};
    case 4: need(3); return StableDrift{v[0], v[1], v[2]};
    default: throw Error(ErrorKind::InvalidConfig, "unknown preset code in path dump");
  }
}

}  // namespace

void write_binary(std::ostream& os, const SamplePath& p, const MechanismSpec& spec) {
  os.write(kMagic, sizeof(kMagic));
  put_u64(os, static_cast<std::uint64_t>(spec.index()));
  const auto params = spec_params(spec);
  put_u64(os, params.size());
  for (double v : params) put_f64(os, v);
  put_u64(os, p.seed);
  put_u64(os, p.stream);
  put_u64(os, p.times.size());
  for (std::size_t i = 0; i < p.times.size(); ++i) {
    put_f64(os, p.times[i]);
    put_f64(os, p.values[i]);
  }
}

BinaryPath read_binary(std::istream& is) {
  char magic[8];
  if (!is.read(magic, 8) || !std::equal(magic, magic + 8, kMagic))
    throw Error(ErrorKind::InvalidConfig, "not a CBPPATH1 dump");
  const std::uint64_t code = get_u64(is);
  std::vector<double> params(get_u64(is));
  if (params.size() > 16) throw Error(ErrorKind::InvalidConfig, "path dump parameter count mismatch");
  for (double& v : params) v = get_f64(is);
  BinaryPath out{spec_from(code, params), {}};
  out.path.seed = get_u64(is);
  out.path.stream = get_u64(is);
  const std::uint64_t n = get_u64(is);
  for (std::uint64_t i = 0; i < n; ++i) {
    out.path.times.push_back(get_f64(is));
    out.path.values.push_back(get_f64(is));
  }
  for (std::size_t i = 0; i < out.path.values.size(); ++i) {
    if (out.path.values[i] <= 0.0) {
      out.path.tau0_index = i;
      out.path.stop = StopReason::Crossed;
      break;
    }
  }
  return out;
}

}  // namespace cbp
