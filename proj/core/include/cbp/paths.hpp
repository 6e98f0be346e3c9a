#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cbp/mechanism.hpp"

namespace cbp {

struct FixedStep {
  double dt = 1e-3;
};

/// dt = clamp(eps * x, dt_min, dt_max): Lamperti-clock increments stay near eps.
/// The default leaves dt uncapped, since a finite cap makes long excursions of
/// X (heavy-tailed in Levy time) cost a step per dt_max.
struct AdaptiveLamperti {
  double eps = 1e-3;
  double dt_min = 1e-12;
  double dt_max = std::numeric_limits<double>::infinity();
};

/// dt = min(eps * x^p, dt_max) with p the tail index of psi. Each step moves x by
/// a fixed fraction of itself, so resolution is uniform on a log scale down to
/// the extinction floor.
struct AdaptiveExtinction {
  double eps = 1e-3;
  double dt_max = std::numeric_limits<double>::infinity();
};

using StepPolicy = std::variant<FixedStep, AdaptiveLamperti, AdaptiveExtinction>;

std::string describe(const StepPolicy& policy);

struct SimulationOptions {
  StepPolicy policy = AdaptiveLamperti{};
  double horizon = std::numeric_limits<double>::infinity();        // Levy clock
  double clock_horizon = std::numeric_limits<double>::infinity();  // Lamperti clock
  double floor_ratio = 1e-9;  // extinction declared once x <= floor_ratio * x0
  std::size_t max_steps = 200'000'000;
};

enum class StopReason { Crossed, Floor, Horizon, ClockHorizon, StepLimit };

std::string to_string(StopReason r);

/// A discretized spectrally positive Levy trajectory on its own clock.
struct SamplePath {
  std::vector<double> times;
  std::vector<double> values;
  std::optional<std::size_t> tau0_index;
  StopReason stop = StopReason::Horizon;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::string policy;
  // Uniform drawn at the stop, consumed when the Lamperti clock is closed off.
  double residual_u = 0.5;
  // Local power-law index of the path near a continuous downward passage.
  double passage_index = 2.0;
  // Lamperti clock at each positive node, integrated from the exact step sizes.
  // Near extinction dt drops below one ulp of t, where differences of `times`
  // no longer resolve it. Empty for hand-built paths.
  std::vector<double> clock;
  // Exact Levy-time length of the final partial step into a crossing.
  double crossing_dt = std::numeric_limits<double>::quiet_NaN();
};

/// Simulates X with E[exp(-l X_t)] = exp(t psi(l)) from x0 until it crosses
/// zero, falls under the floor, or reaches a horizon. Increments are exact for
/// the preset: drift -a dt, N(0, 2 beta dt), and a one-sided stable draw.
/// A step shorter than one ulp of t advances the recorded time by one ulp.
/// Throws Error{StepPolicyInvalid} for non-positive step parameters.
SamplePath simulate_path(const BranchingMechanism& m, double x0, const SimulationOptions& opts,
                         std::uint64_t seed, std::uint64_t stream);

std::vector<double> running_infimum(std::span<const double> values);
inline std::vector<double> running_infimum(const SamplePath& p) { return running_infimum(p.values); }

/// First grid time with value >= y.
std::optional<double> first_passage_above(const SamplePath& p, double y);
/// Last grid time with value <= y.
std::optional<double> last_passage_below(const SamplePath& p, double y);

/// Steps whose downward move exceeds the drift plus k_sigma times the Gaussian
/// and stable increment scales. Zero for any faithful simulation.
std::size_t count_downward_violations(const SamplePath& p, const BranchingMechanism& m, double k_sigma = 12.0);

/// Little-endian dump: "CBPPATH1", preset code, parameter count and values,
/// seed, stream, node count, then (t, value) pairs.
void write_binary(std::ostream& os, const SamplePath& p, const MechanismSpec& spec);

struct BinaryPath {
  MechanismSpec spec;
  SamplePath path;
};

BinaryPath read_binary(std::istream& is);

}  // namespace cbp
