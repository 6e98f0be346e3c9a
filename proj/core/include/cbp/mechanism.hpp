#pragma once

#include <complex>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace cbp {

// Parametric branching mechanisms. Every preset has a closed-form
//   psi(l) = drift*l + diffusion*l^2 + stable_rate*l^stable_index.

struct Stable {
  double c_plus = 1.0;
  double alpha = 1.5;  // in (1, 2]
};

struct Quadratic {
  double beta = 1.0;
};

struct LinearQuadratic {
  double a = 0.0;
  double beta = 1.0;
};

struct StableGaussian {
  double c_plus = 1.0;
  double alpha = 1.5;  // in (1, 2)
  double beta = 1.0;
};

struct StableDrift {
  double a = 0.0;
  double c_plus = 1.0;
  double alpha = 1.5;  // in (1, 2)
};

using MechanismSpec = std::variant<Stable, Quadratic, LinearQuadratic, StableGaussian, StableDrift>;

/// Lower-case preset tag used in configs: "stable", "quadratic", "linear_quadratic",
/// "stable_gaussian", "stable_drift".
std::string preset_name(const MechanismSpec& spec);

enum class Criticality { Supercritical, Critical, Subcritical };

std::string to_string(Criticality c);

/// Coefficients of the three elementary exponents that make up psi.
struct PsiComponents {
  double drift = 0.0;
  double diffusion = 0.0;
  double stable_rate = 0.0;
  double stable_index = 2.0;
};

class BranchingMechanism {
 public:
  /// Validates parameter ranges; throws Error{OutOfRange} naming the parameter.
  static BranchingMechanism make(const MechanismSpec& spec);

  /// Skips range validation. Only for degenerate fixtures such as psi(l) = l.
  static BranchingMechanism make_unchecked(const MechanismSpec& spec);

  const MechanismSpec& spec() const noexcept { return spec_; }
  const PsiComponents& components() const noexcept { return parts_; }

  double psi(double lambda) const;
  std::complex<long double> psi(std::complex<long double> s) const;
  double psi_prime(double lambda) const;

  double psi_prime_zero() const noexcept { return parts_.drift; }
  double largest_root() const noexcept { return largest_root_; }
  Criticality criticality() const noexcept { return criticality_; }

  /// Power of the term of psi that dominates as lambda -> infinity.
  double tail_index() const noexcept;
  /// Coefficient of that dominant term.
  double tail_coefficient() const noexcept;

  /// Closed-form test of the integral condition at infinity (tail index > 1).
  bool integrable_at_infinity() const noexcept { return tail_index() > 1.0; }

  /// True for presets that are exactly a single power (Stable, Quadratic).
  bool is_pure_power() const noexcept;

 private:
  explicit BranchingMechanism(const MechanismSpec& spec);

  MechanismSpec spec_;
  PsiComponents parts_;
  double largest_root_ = 0.0;
  Criticality criticality_ = Criticality::Critical;
};

BranchingMechanism make_mechanism(const MechanismSpec& spec);

inline double eval_psi(const BranchingMechanism& m, double lambda) { return m.psi(lambda); }

/// Grey's condition: the integral of 1/psi converges at infinity and psi'(0+) >= 0.
bool grey_condition(const BranchingMechanism& m);

struct ExponentEstimate {
  double gamma = 0.0;
  double eta = 0.0;
  double delta = 0.0;
  double witness_Q = 0.0;
  double witness_C = 0.0;
  double witness_c = 0.0;
};

struct ExponentOptions {
  // Fraction of the grid (from the top) used for the asymptotic slopes.
  double tail_fraction = 0.5;
  // Smallest admissible inf over pairs of [psi(v) v^-c] / [psi(u) u^-c].
  double q_min = 0.45;
  double bisection_tol = 1e-3;
};

/// lambda = 10^(k/per_decade), k = 0..decades*per_decade.
std::vector<double> geometric_grid(double decades = 8.0, int per_decade = 8);

/// Estimates the lower/upper exponents at infinity and the exponent delta.
/// Throws Error{GridTooSmall} if the grid does not span six decades above 1.
ExponentEstimate estimate_exponents(const BranchingMechanism& m, std::span<const double> grid,
                                    const ExponentOptions& opts = {});

}  // namespace cbp
