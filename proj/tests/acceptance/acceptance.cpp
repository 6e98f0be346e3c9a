// Acceptance suite: one PASS/FAIL line per criterion. Reference values come
// from closed forms written out here, not from the library's own closed forms.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cbp/asymptotics.hpp"
#include "cbp/ensemble.hpp"
#include "cbp/kernel.hpp"
#include "cbp/lamperti.hpp"
#include "cbp/mechanism.hpp"
#include "cbp/scale.hpp"
#include "cbp/stats.hpp"

#if CBP_HAVE_CLI
#include "cbp/cli.hpp"
#endif

using namespace cbp;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double rel_err(double got, double want) { return std::abs(got - want) / std::max(std::abs(want), 1e-300); }

std::vector<double> log_grid(double lo, double hi, int per_decade) {
  std::vector<double> out;
  const int n = static_cast<int>(std::round(std::log10(hi / lo) * per_decade));
  for (int i = 0; i <= n; ++i) out.push_back(lo * std::pow(10.0, static_cast<double>(i) / per_decade));
  return out;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ---- 1. kernel exactness -----------------------------------------------------

Outcome kernel_exactness() {
  KernelOptions numeric;
  numeric.t_min = 1e-13;
  numeric.t_max = 1e21;
  numeric.force_numeric = true;

  struct Case {
    MechanismSpec spec;
    std::function<double(double)> phi, varphi;
  };
  const Case cases[] = {
      {Stable{1.0, 1.5}, [](double t) { return 2.0 / std::sqrt(t); }, [](double t) { return 4.0 / (t * t); }},
      {Quadratic{1.0}, [](double t) { return 1.0 / t; }, [](double t) { return 1.0 / t; }},
  };
  const double lambdas[] = {1e-2, 1.0, 1e2};
  double worst = 0.0, worst_flow = 0.0;
  for (const auto& c : cases) {
    const auto k = build_kernel(make_mechanism(c.spec), numeric);
    if (k.has_closed_form()) return {false, "numeric kernel reports a closed form"};
    for (double t : log_grid(1e-3, 1e3, 4)) {
      worst = std::max(worst, rel_err(k.phi(t), c.phi(t)));
      worst = std::max(worst, rel_err(k.varphi(t), c.varphi(t)));
      for (double l : lambdas) worst = std::max(worst, rel_err(k.cumulant(t, l), c.varphi(t + c.phi(l))));
    }
    const double grid[] = {0.1, 1.0, 10.0};
    for (double t : grid)
      for (double s : grid)
        for (double l : grid) worst_flow = std::max(worst_flow, rel_err(k.cumulant(t + s, l), k.cumulant(t, k.cumulant(s, l))));
  }
  return {worst < 1e-6 && worst_flow < 1e-8,
          "max rel err " + fmt("%.2e", worst) + " (< 1e-6), flow " + fmt("%.2e", worst_flow) + " (< 1e-8, 27 points)"};
}

// ---- 2. scale functions ----------------------------------------------------

Outcome scale_functions() {
  struct Case {
    MechanismSpec spec;
    std::function<double(double)> w;
  };
  const double g15 = std::tgamma(1.5);
  const Case cases[] = {
      {Stable{1.0, 1.5}, [g15](double x) { return std::sqrt(x) / g15; }},
      {Quadratic{1.0}, [](double x) { return x; }},
      {LinearQuadratic{1.0, 1.0}, [](double x) { return -std::expm1(-x); }},
  };
  double worst = 0.0;
  for (const auto& c : cases) {
    const ScaleFunction w(make_mechanism(c.spec));
    for (double x : log_grid(1e-3, 1e3, 4)) worst = std::max(worst, rel_err(w.numeric(x), c.w(x)));
  }

  const ScaleFunction ws(make_mechanism(Stable{1.0, 1.5}));
  const auto sw = sandwich_scan(ws, log_grid(1e-4, 1e4, 4));
  // W(x) x psi(1/x) = 1/Gamma(1.5) exactly; the certified K = min(p, 1/p) is Gamma(1.5).
  const bool product_ok = std::abs(sw.min_product - 1.0 / g15) < 1e-6 && std::abs(sw.max_product - 1.0 / g15) < 1e-6;
  const bool k_ok = std::abs(sw.certified_k - 0.886227) < 1e-6;

  std::vector<double> seq;
  for (int i = 0; i <= 40; ++i) seq.push_back(std::ldexp(1.0, -i));
  const double betas[] = {0.25, 0.5, 0.9};
  bool h_ok = true;
  double h_err = 0.0;
  for (const auto& h : hypothesis_h_check(ws, betas, seq)) {
    h_err = std::max(h_err, std::abs(h.limsup_estimate - std::pow(h.beta, 0.5)));
    h_ok = h_ok && h.verdict;
  }
  h_ok = h_ok && h_err < 1e-3;
  return {worst < 1e-6 && product_ok && k_ok && h_ok,
          "inversion max rel err " + fmt("%.2e", worst) + " (< 1e-6); W x psi(1/x) = " + fmt("%.6f", sw.max_product) +
              " = 1/Gamma(1.5), certified K = " + fmt("%.6f", sw.certified_k) + " (0.886227 +- 1e-6); (H) " +
              (h_ok ? "true" : "false") + ", |limsup - beta^(1/2)| <= " + fmt("%.1e", h_err)};
}

// ---- 3. exponents ------------------------------------------------------------

Outcome exponents() {
  std::ostringstream d;
  bool ok = true;
  const auto grid = geometric_grid();
  for (double alpha : {1.2, 1.5, 2.0}) {
    const auto e = estimate_exponents(make_mechanism(Stable{1.0, alpha}), grid);
    const double err = std::max({std::abs(e.gamma - alpha), std::abs(e.eta - alpha), std::abs(e.delta - alpha)});
    ok = ok && err <= 0.05;
    d << "alpha=" << alpha << ": (" << fmt("%.4f", e.gamma) << ", " << fmt("%.4f", e.eta) << ", "
      << fmt("%.4f", e.delta) << ")  ";
  }
  d << "(tolerance 0.05)";
  return {ok, d.str()};
}

// ---- 4. extinction law -------------------------------------------------------

Outcome extinction_law() {
  struct Case {
    MechanismSpec spec;
    std::function<double(double)> varphi;
  };
  const Case cases[] = {
      {Quadratic{1.0}, [](double t) { return 1.0 / t; }},
      {Stable{1.0, 1.5}, [](double t) { return 4.0 / (t * t); }},
  };
  std::ostringstream d;
  bool ok = true;
  for (const auto& c : cases) {
    const auto m = make_mechanism(c.spec);
    const auto k = build_kernel(m);
    EnsembleOptions ens;
    ens.n_paths = 1000;
    ens.seed = 20240601;
    ens.sim.policy = AdaptiveLamperti{1e-3};
    const auto times = simulate_extinction_times(m, &k, ens);
    std::vector<double> done;
    for (double t : times)
      if (!std::isnan(t)) done.push_back(t);
    if (done.size() != times.size()) return {false, "paths stopped before extinction"};
    const double ks = ks_one_sample(done, [&](double t) { return t > 0.0 ? std::exp(-c.varphi(t)) : 0.0; });
    ok = ok && ks < 0.05;
    d << preset_name(c.spec) << " KS " << fmt("%.4f", ks) << "  ";
  }
  d << "(< 0.05, 1000 paths)";
  return {ok, d.str()};
}

// ---- 5. Lamperti marginals vs the exact Feller law ---------------------------

Outcome feller_marginals() {
  const auto m = make_mechanism(Quadratic{1.0});
  const auto k = build_kernel(m);
  const double ts[] = {0.25, 0.5, 1.0};
  SimulationOptions sim;
  sim.policy = AdaptiveLamperti{1e-3};
  sim.clock_horizon = 1.0;
  const std::size_t n = 10000;
  const auto rows = parallel_map(n, 1, [&](std::size_t i) {
    const auto tc = simulate_cb_path(m, &k, 1.0, sim, 777, i);
    std::vector<double> v;
    for (double t : ts) v.push_back(value_at(tc, t));
    return v;
  });
  std::ostringstream d;
  bool ok = true;
  PathRng rng(4242, 0);
  for (std::size_t j = 0; j < 3; ++j) {
    std::vector<double> sim_j(n), exact(100000);
    for (std::size_t i = 0; i < n; ++i) sim_j[i] = rows[i][j];
    for (double& y : exact) y = exact_feller_sample(1.0, ts[j], 1.0, rng);
    const double ks = ks_two_sample(sim_j, exact);
    ok = ok && ks < 0.03;
    d << "t=" << ts[j] << " KS " << fmt("%.4f", ks) << "  ";
  }
  d << "(< 0.03, 1e4 paths vs 1e5 exact draws)";
  return {ok, d.str()};
}

// ---- 6. Yaglom limit ---------------------------------------------------------

Outcome yaglom() {
  const double lambdas[] = {0.25, 1.0, 4.0};
  const double ts[] = {1e2, 1e3, 1e4};
  std::ostringstream d;
  bool ok = true;
  for (double alpha : {1.5, 2.0}) {
    const auto k = build_kernel(make_mechanism(Stable{1.0, alpha}));
    const auto table = yaglom_check(k, 1.0, ts, lambdas);
    std::vector<double> sup(3, 0.0);
    for (const auto& r : table.rows) {
      const double limit = 1.0 - std::pow(1.0 + std::pow(r.lambda, -(alpha - 1.0)), -1.0 / (alpha - 1.0));
      const std::size_t i = static_cast<std::size_t>(std::find(ts, ts + 3, r.t) - ts);
      sup[i] = std::max(sup[i], std::abs(r.value - limit));
    }
    const bool decreasing = sup[0] > sup[1] && sup[1] > sup[2];
    ok = ok && sup[2] < 1e-2 && decreasing;
    d << "alpha=" << alpha << ": sup err " << fmt("%.1e", sup[0]) << " > " << fmt("%.1e", sup[1]) << " > "
      << fmt("%.1e", sup[2]) << "  ";
  }
  d << "(< 1e-2 at t=1e4, decreasing)";
  return {ok, d.str()};
}

// ---- 7. LIL probe ------------------------------------------------------------

Outcome lil_probe() {
  ScanOptions opts;  // r = 2, n = 16..20: varphi(t_20) = 2^20 ~ 1e6
  const StatisticKind kinds[] = {StatisticKind::Reversed, StatisticKind::ReflectedReversed};
  std::ostringstream d;
  bool ok = true;
  for (const MechanismSpec& spec : {MechanismSpec{Stable{1.0, 1.5}}, MechanismSpec{Quadratic{1.0}}}) {
    KernelOptions ko;
    ko.t_max = 2.0 * std::pow(opts.r, opts.n1);
    const auto k = build_kernel(make_mechanism(spec), ko);
    EnsembleOptions ens;
    ens.n_paths = 200;
    ens.seed = 1789;
    ens.sim.policy = AdaptiveExtinction{1e-3};
    const auto reports = scan_simulated(k, kinds, opts, ens);
    for (const auto& rep : reports) {
      const auto& q = rep.quantiles;
      if (q.size() < 5) return {false, "fewer than 5 usable scales"};
      bool monotone = true;
      for (std::size_t i = q.size() - 4; i < q.size(); ++i) monotone = monotone && q[i].q50 >= q[i - 1].q50;
      const double last = q.back().q50;
      const bool in_band = last >= 0.6 && last <= 1.4;
      ok = ok && in_band && monotone;
      d << "\n      " << preset_name(spec) << " " << to_string(rep.kind) << ": medians";
      for (const auto& s : q) d << " " << fmt("%.3f", s.q50);
      d << (in_band ? "" : "  <- outside [0.6, 1.4]") << (monotone ? "" : "  <- not nondecreasing");
    }

    // Paths sitting exactly on the envelope give statistic 1 at every scale.
    const auto scales = scale_sequence(k, opts.grid, opts.r, opts.n0, opts.n1);
    std::vector<ReversedPath> synthetic(50, envelope_path(k, scales));
    const auto rep = scan(synthetic, k, StatisticKind::Reversed, opts);
    bool exact = !rep.quantiles.empty();
    for (const auto& s : rep.quantiles) exact = exact && s.q10 == 1.0 && s.q50 == 1.0 && s.q90 == 1.0;
    ok = ok && exact;
    d << "\n      " << preset_name(spec) << " synthetic envelope ensemble: " << (exact ? "exactly 1" : "NOT 1");
  }
  d << "\n      (200 paths, n0=16..n1=20, median at the deepest scale in [0.6, 1.4])";
  return {ok, d.str()};
}

// ---- 8. CLI determinism ----------------------------------------------------

Outcome cli_determinism() {
#if CBP_HAVE_CLI
  const std::vector<std::string> stable = {"--preset", "stable", "--c-plus", "1", "--alpha", "1.5"};
  auto with = [](std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
  };
  const std::vector<std::vector<std::string>> runs = {
      with({"mechanism", "inspect", "--seed", "1"}, stable),
      with({"kernel", "table", "--numeric", "--format", "json"}, stable),
      with({"kernel", "yaglom"}, stable),
      {"scale", "table", "--preset", "stable_gaussian", "--c-plus", "1", "--alpha", "1.5", "--beta", "1"},
      with({"scale", "check-h"}, stable),
      with({"simulate", "paths", "--seed", "8", "--stream", "3"}, stable),
      with({"simulate", "paths", "--seed", "8", "--format", "binary"}, stable),
      with({"simulate", "extinction", "--seed", "8", "--n-paths", "200", "--workers", "2"}, stable),
      with({"scan", "lil", "--seed", "8", "--n-paths", "20", "--workers", "2", "--kind", "reflected_reversed"}, stable),
  };
  std::size_t same = 0;
  std::string bad;
  for (const auto& args : runs) {
    std::ostringstream a, b, ea, eb;
    const int ca = cli::run(args, a, ea);
    const int cb = cli::run(args, b, eb);
    if (ca == 0 && cb == 0 && !a.str().empty() && a.str() == b.str())
      ++same;
    else
      bad += " [" + args[0] + " " + args[1] + "]";
  }
  // Worker count must not change the bytes either.
  std::ostringstream w1, w3, e;
  cli::run(with({"scan", "lil", "--seed", "8", "--n-paths", "20", "--workers", "1"}, stable), w1, e);
  cli::run(with({"scan", "lil", "--seed", "8", "--n-paths", "20", "--workers", "3"}, stable), w3, e);
  const bool workers_ok = !w1.str().empty() && w1.str() == w3.str();
  return {same == runs.size() && workers_ok,
          std::to_string(same) + "/" + std::to_string(runs.size()) + " commands byte-identical on repeat" + bad +
              "; scan lil workers 1 vs 3 " + (workers_ok ? "identical" : "DIFFER")};
#else
  return {false, "cbp_cli was not built"};
#endif
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  Outcome (*fn)();
};

}  // namespace

int main(int argc, char** argv) {
  const Criterion all[] = {
      {1, "kernel exactness", 1.0, kernel_exactness},
      {2, "scale functions", 5.0, scale_functions},
      {3, "exponents", 1.0, exponents},
      {4, "extinction law", 120.0, extinction_law},
      {5, "Lamperti vs exact Feller marginals", 120.0, feller_marginals},
      {6, "Yaglom limit", 1.0, yaglom},
      {7, "LIL probe", 600.0, lil_probe},
      {8, "CLI determinism", INFINITY, cli_determinism},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.limit_s;
    const bool pass = o.pass && in_time;
    failed += pass ? 0 : 1;
    std::printf("%s  %d  %-36s %s  [%.2f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs,
                std::isfinite(c.limit_s) ? (in_time ? (" < " + fmt("%g", c.limit_s) + " s").c_str()
                                                    : (" exceeds " + fmt("%g", c.limit_s) + " s").c_str())
                                         : "");
    std::fflush(stdout);
  }
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
