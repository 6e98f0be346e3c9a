#include "cbp/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <list>
#include <map>
#include <sstream>

#include "cbp/asymptotics.hpp"
#include "cbp/config.hpp"
#include "cbp/ensemble.hpp"
#include "cbp/error.hpp"
#include "cbp/kernel.hpp"
#include "cbp/lamperti.hpp"
#include "cbp/mechanism.hpp"
#include "cbp/paths.hpp"
#include "cbp/scale.hpp"

namespace cbp::cli {
namespace {

enum class Type { Number, Integer, Unsigned, String, List, Flag };

struct Param {
  std::string key;
  Type type;
  std::string help;
};

std::string flag_of(const std::string& key) {
  std::string f = "--" + key;
  std::replace(f.begin(), f.end(), '_', '-');
  return f;
}

[[noreturn]] void usage(const std::string& msg) { throw Error(ErrorKind::InvalidConfig, msg); }

double parse_double(const std::string& text, const std::string& key) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) usage(flag_of(key) + ": '" + text + "' is not a number");
  return v;
}

template <class Int>
Int parse_int(const std::string& text, const std::string& key) {
  Int v = 0;
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) usage(flag_of(key) + ": '" + text + "' is not an integer");
  return v;
}

/// Merged parameters: config file first, command-line flags on top. Getters
/// name the offending flag on a type mismatch.
class Inputs {
 public:
  explicit Inputs(json values) : v_(std::move(values)) {}

  bool has(const std::string& key) const { return v_.contains(key); }

  double number(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    const json& j = v_.at(key);
    if (!j.is_number()) usage(flag_of(key) + " must be a number");
    return j.get<double>();
  }

  double positive(const std::string& key, double fallback) const {
    const double v = number(key, fallback);
    if (!(v > 0.0)) usage(flag_of(key) + " must be positive");
    return v;
  }

  long long integer(const std::string& key, long long fallback) const {
    if (!has(key)) return fallback;
    const json& j = v_.at(key);
    if (!j.is_number_integer()) usage(flag_of(key) + " must be an integer");
    return j.get<long long>();
  }

  std::uint64_t unsigned64(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const json& j = v_.at(key);
    if (!j.is_number_unsigned()) usage(flag_of(key) + " must be a non-negative integer");
    return j.get<std::uint64_t>();
  }

  std::string string(const std::string& key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    const json& j = v_.at(key);
    if (!j.is_string()) usage(flag_of(key) + " must be a string");
    return j.get<std::string>();
  }

  std::vector<double> list(const std::string& key, std::vector<double> fallback) const {
    if (!has(key)) return fallback;
    const json& j = v_.at(key);
    if (j.is_number()) return {j.get<double>()};
    if (!j.is_array() || j.empty()) usage(flag_of(key) + " must be a non-empty list of numbers");
    std::vector<double> out;
    for (const auto& e : j) {
      if (!e.is_number()) usage(flag_of(key) + " must be a list of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  bool flag(const std::string& key) const {
    if (!has(key)) return false;
    const json& j = v_.at(key);
    if (!j.is_boolean()) usage(flag_of(key) + " must be true or false");
    return j.get<bool>();
  }

 private:
  json v_;
};

const std::map<std::string, std::vector<std::string>> kPresetKeys = {
    {"stable", {"c_plus", "alpha"}},
    {"quadratic", {"beta"}},
    {"linear_quadratic", {"a", "beta"}},
    {"stable_gaussian", {"c_plus", "alpha", "beta"}},
    {"stable_drift", {"a", "c_plus", "alpha"}},
};

MechanismSpec mechanism_spec(const Inputs& in) {
  if (!in.has("preset")) usage("--preset is required");
  const std::string preset = in.string("preset", "");
  const auto it = kPresetKeys.find(preset);
  if (it == kPresetKeys.end())
    usage("--preset: unknown preset '" + preset +
          "' (stable, quadratic, linear_quadratic, stable_gaussian, stable_drift)");
  json j{{"preset", preset}};
  for (const auto& key : it->second) {
    if (!in.has(key)) usage(flag_of(key) + " is required for preset " + preset);
    j[key] = in.number(key, 0.0);
  }
  return mechanism_from_json(j);
}

BranchingMechanism mechanism(const Inputs& in) { return make_mechanism(mechanism_spec(in)); }

// Checked before anything that needs almost sure extinction in finite time.
BranchingMechanism extinguishing_mechanism(const Inputs& in) {
  auto m = mechanism(in);
  if (!grey_condition(m))
    throw Error(ErrorKind::GreyConditionFails,
                "--preset " + preset_name(m.spec()) + ": Grey's condition fails, extinction is not certain");
  return m;
}

std::vector<double> log_grid(double lo, double hi, long long points, const std::string& what) {
  if (!(lo > 0.0) || !(hi >= lo) || !std::isfinite(hi))
    usage(flag_of(what + "_min") + " and " + flag_of(what + "_max") + " must satisfy 0 < min <= max");
  if (points < 1) usage("--points must be at least 1");
  std::vector<double> out;
  if (points == 1) return {lo};
  const double step = std::log(hi / lo) / static_cast<double>(points - 1);
  for (long long i = 0; i < points; ++i)
    out.push_back(i + 1 == points ? hi : lo * std::exp(step * static_cast<double>(i)));
  return out;
}

std::vector<double> axis(const Inputs& in, const std::string& key, double lo, double hi, long long points) {
  if (in.has(key)) return in.list(key, {});
  return log_grid(in.number(key + "_min", lo), in.number(key + "_max", hi), in.integer("points", points), key);
}

// Wide tables so that both t and varphi(t) stay in range for numeric kernels.
KernelOptions wide_kernel(std::span<const double> ts, bool numeric) {
  KernelOptions ko;
  ko.t_min = 1e-13;
  ko.t_max = 1e21;
  for (double t : ts) {
    if (!(t > 0.0) || !std::isfinite(t)) usage("--t: times must be positive and finite");
    ko.t_min = std::min(ko.t_min, 0.5 * t);
    ko.t_max = std::max(ko.t_max, 2.0 * t);
  }
  ko.force_numeric = numeric;
  return ko;
}

SimulationOptions simulation(const Inputs& in, const std::string& default_policy) {
  SimulationOptions sim;
  const std::string policy = in.string("policy", default_policy);
  if (policy == "fixed") {
    sim.policy = FixedStep{in.number("dt", FixedStep{}.dt)};
  } else if (policy == "adaptive_lamperti") {
    AdaptiveLamperti p;
    sim.policy = AdaptiveLamperti{in.number("eps", p.eps), in.number("dt_min", p.dt_min), in.number("dt_max", p.dt_max)};
  } else if (policy == "adaptive_extinction") {
    AdaptiveExtinction p;
    sim.policy = AdaptiveExtinction{in.number("eps", p.eps), in.number("dt_max", p.dt_max)};
  } else {
    usage("--policy: unknown policy '" + policy + "' (fixed, adaptive_lamperti, adaptive_extinction)");
  }
  sim.floor_ratio = in.number("floor_ratio", sim.floor_ratio);
  if (!(sim.floor_ratio >= 0.0) || !(sim.floor_ratio < 1.0)) usage("--floor-ratio must lie in [0, 1)");
  sim.max_steps = in.unsigned64("max_steps", sim.max_steps);
  return sim;
}

unsigned workers(const Inputs& in) {
  const long long w = in.integer("workers", 1);
  if (w < 1 || w > 1024) usage("--workers must lie in [1, 1024]");
  return static_cast<unsigned>(w);
}

StatisticKind kind_of(const Inputs& in) {
  const std::string name = in.string("kind", "reversed");
  try {
    return statistic_kind_from(name);
  } catch (const Error&) {
    usage("--kind: unknown kind '" + name + "' (reversed, reflected_reversed, future_infimum)");
  }
}

std::string dump(json j) { return j.dump(2) + "\n"; }

struct Context {
  Inputs in;
  std::uint64_t seed;
  std::string format;
};

// ---- subcommands -----------------------------------------------------------

std::string mechanism_inspect(const Context& c) {
  const auto m = mechanism(c.in);
  const auto grid = geometric_grid();
  const auto e = estimate_exponents(m, grid);
  return dump({{"mechanism", to_json(m.spec())},
               {"gamma", e.gamma},
               {"eta", e.eta},
               {"delta", e.delta},
               {"criticality", to_string(m.criticality())},
               {"psi_prime_zero", m.psi_prime_zero()},
               {"largest_root", m.largest_root()},
               {"grey", grey_condition(m)},
               {"tail_index", m.tail_index()},
               {"seed", c.seed}});
}

std::string kernel_table(const Context& c) {
  const auto m = extinguishing_mechanism(c.in);
  const auto ts = axis(c.in, "t", 1e-3, 1e3, 13);
  const auto k = build_kernel(m, wide_kernel(ts, c.in.flag("numeric")));
  if (c.format == "json") {
    json rows = json::array();
    for (double t : ts) rows.push_back({{"t", t}, {"phi", k.phi(t)}, {"varphi", k.varphi(t)}});
    return dump({{"mechanism", to_json(m.spec())}, {"rows", rows}, {"seed", c.seed}});
  }
  std::string out = "t,phi,varphi\n";
  for (double t : ts) {
    const double row[] = {t, k.phi(t), k.varphi(t)};
    out += csv_line(row) + "\n";
  }
  return out;
}

std::string kernel_yaglom(const Context& c) {
  const auto m = extinguishing_mechanism(c.in);
  const auto ts = c.in.list("t", {1e2, 1e3, 1e4});
  const auto lambdas = c.in.list("lambda", {0.25, 1.0, 4.0});
  const double x = c.in.positive("x", 1.0);
  const auto k = build_kernel(m, wide_kernel(ts, false));
  const auto table = yaglom_check(k, x, ts, lambdas);
  if (c.format == "json") {
    json rows = json::array();
    for (const auto& r : table.rows)
      rows.push_back({{"t", r.t}, {"lambda", r.lambda}, {"value", r.value}, {"limit", r.limit}, {"abs_error", r.abs_error}});
    json sup = json::array();
    for (double t : ts) sup.push_back({{"t", t}, {"sup_error", table.sup_error(t)}});
    return dump({{"mechanism", to_json(m.spec())},
                 {"alpha", table.alpha},
                 {"x", table.x},
                 {"rows", rows},
                 {"sup_error", sup},
                 {"errors_decrease_in_t", table.errors_decrease_in_t()},
                 {"seed", c.seed}});
  }
  std::string out = "t,lambda,value,limit,abs_error\n";
  for (const auto& r : table.rows) {
    const double row[] = {r.t, r.lambda, r.value, r.limit, r.abs_error};
    out += csv_line(row) + "\n";
  }
  return out;
}

InversionOptions inversion(const Inputs& in) {
  InversionOptions o;
  const std::string method = in.string("method", "talbot");
  if (method == "talbot")
    o.method = InversionMethod::FixedTalbot;
  else if (method == "euler")
    o.method = InversionMethod::Euler;
  else
    usage("--method: unknown method '" + method + "' (talbot, euler)");
  return o;
}

std::string scale_table(const Context& c) {
  const auto m = mechanism(c.in);
  const ScaleFunction w(m, inversion(c.in));
  const bool numeric = c.in.flag("numeric");
  const auto xs = axis(c.in, "x", 1e-3, 1e3, 13);
  std::vector<double> ws;
  for (double x : xs) ws.push_back(numeric ? w.numeric(x) : w(x));
  if (c.format == "json") {
    json rows = json::array();
    for (std::size_t i = 0; i < xs.size(); ++i) rows.push_back({{"x", xs[i]}, {"W", ws[i]}});
    return dump({{"mechanism", to_json(m.spec())}, {"rows", rows}, {"seed", c.seed}});
  }
  std::string out = "x,W\n";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double row[] = {xs[i], ws[i]};
    out += csv_line(row) + "\n";
  }
  return out;
}

std::string scale_check_h(const Context& c) {
  const auto m = mechanism(c.in);
  const ScaleFunction w(m, inversion(c.in));
  const auto ratios = c.in.list("ratio", {0.25, 0.5});
  const auto grid = axis(c.in, "x", 1e-4, 1e4, 33);
  // (H) looks at small x: halve down from 1.
  std::vector<double> seq;
  for (int i = 0; i <= 40; ++i) seq.push_back(std::ldexp(1.0, -i));
  const auto h = hypothesis_h_check(w, ratios, seq);
  if (c.format == "csv") {
    std::string out = "ratio,limsup_estimate,verdict\n";
    for (const auto& r : h) out += format_number(r.beta) + "," + format_number(r.limsup_estimate) + "," +
                                   (r.verdict ? "true" : "false") + "\n";
    return out;
  }
  const auto s = sandwich_scan(w, grid);
  json hs = json::array();
  for (const auto& r : h) hs.push_back({{"ratio", r.beta}, {"limsup_estimate", r.limsup_estimate}, {"verdict", r.verdict}});
  return dump({{"mechanism", to_json(m.spec())},
               {"sandwich",
                {{"min_product", s.min_product},
                 {"max_product", s.max_product},
                 {"certified_k", s.certified_k},
                 {"bounded", s.bounded}}},
               {"h", hs},
               {"seed", c.seed}});
}

std::string simulate_paths(const Context& c) {
  const auto m = extinguishing_mechanism(c.in);
  const auto sim = simulation(c.in, "adaptive_lamperti");
  const double x0 = c.in.positive("x0", 1.0);
  const std::uint64_t stream = c.in.unsigned64("stream", 0);
  const auto kind = kind_of(c.in);
  const auto path = simulate_path(m, x0, sim, c.seed, stream);
  if (c.format == "binary") {
    std::ostringstream os(std::ios::binary);
    write_binary(os, path, m.spec());
    return os.str();
  }
  const auto k = build_kernel(m);
  const auto tc = time_change(path, &k);
  if (!tc.extinct())
    throw Error(ErrorKind::NotExtinct, "path stopped before extinction (" + to_string(path.stop) +
                                           "); raise --max-steps or coarsen --eps");
  const auto view = statistic_view(tc, kind);
  if (c.format == "json")
    return dump({{"mechanism", to_json(m.spec())},
                 {"kind", to_string(kind)},
                 {"policy", path.policy},
                 {"x0", x0},
                 {"stream", stream},
                 {"extinction_time", view.extinction_time},
                 {"s", view.s},
                 {"value", view.values},
                 {"seed", c.seed}});
  std::string out = "s,value\n";
  for (std::size_t i = 0; i < view.s.size(); ++i) {
    const double row[] = {view.s[i], view.values[i]};
    out += csv_line(row) + "\n";
  }
  return out;
}

EnsembleOptions ensemble(const Context& c, std::size_t default_paths, const std::string& default_policy) {
  EnsembleOptions ens;
  const long long n = c.in.integer("n_paths", static_cast<long long>(default_paths));
  if (n < 1) usage("--n-paths must be at least 1");
  ens.n_paths = static_cast<std::size_t>(n);
  ens.x0 = c.in.positive("x0", 1.0);
  ens.seed = c.seed;
  ens.workers = workers(c.in);
  ens.sim = simulation(c.in, default_policy);
  return ens;
}

std::string simulate_extinction(const Context& c) {
  const auto m = extinguishing_mechanism(c.in);
  const auto ens = ensemble(c, 1000, "adaptive_lamperti");
  const auto k = build_kernel(m);
  const auto times = simulate_extinction_times(m, &k, ens);
  if (c.format == "csv") {
    std::string out = "path,T0\n";
    for (std::size_t i = 0; i < times.size(); ++i) {
      const double row[] = {static_cast<double>(i), times[i]};
      out += csv_line(row) + "\n";
    }
    return out;
  }
  json j = to_json(summarize_extinction(times, &k, ens.x0));
  j["mechanism"] = to_json(m.spec());
  j["policy"] = describe(ens.sim.policy);
  j["x0"] = ens.x0;
  j["seed"] = c.seed;
  return dump(j);
}

std::string scan_lil(const Context& c) {
  const auto m = extinguishing_mechanism(c.in);
  ScanOptions opts;
  opts.r = c.in.number("r", opts.r);
  opts.n0 = static_cast<int>(c.in.integer("n0", opts.n0));
  opts.n1 = static_cast<int>(c.in.integer("n1", opts.n1));
  const std::string grid = c.in.string("grid", to_string(opts.grid));
  if (grid != "geometric" && grid != "iterated_exponential")
    usage("--grid: unknown grid '" + grid + "' (geometric, iterated_exponential)");
  opts.grid = scale_grid_from(grid);
  if (!(opts.r > 1.0)) usage("--r must exceed 1");
  if (opts.n0 < 0 || opts.n1 < opts.n0) usage("--n0 and --n1 must satisfy 0 <= n0 <= n1");
  const auto kind = kind_of(c.in);
  const auto ens = ensemble(c, 200, "adaptive_extinction");

  // The deepest scale needs phi at lambda = r^n1 (or exp(n1^r)).
  const double top = opts.grid == ScaleGrid::Geometric ? std::pow(opts.r, opts.n1)
                                                       : std::exp(std::pow(static_cast<double>(opts.n1), opts.r));
  if (!std::isfinite(top) || top > 1e250) usage("--n1 is too large for --r");
  KernelOptions ko;
  ko.t_max = std::max(ko.t_max, 2.0 * top);
  const auto k = build_kernel(m, ko);
  const StatisticKind kinds[] = {kind};
  const auto rep = scan_simulated(k, kinds, opts, ens).front();
  return c.format == "csv" ? to_csv(rep) : dump(to_json(rep));
}

// ---- command table ---------------------------------------------------------

struct Command {
  std::string group;
  std::string name;
  std::string help;
  std::vector<Param> params;
  std::vector<std::string> formats;  // first is the default
  std::function<std::string(const Context&)> handler;
};

std::vector<Param> join(std::initializer_list<std::vector<Param>> parts) {
  std::vector<Param> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

std::vector<Command> commands() {
  const std::vector<Param> mech = {
      {"preset", Type::String, "stable, quadratic, linear_quadratic, stable_gaussian or stable_drift"},
      {"c_plus", Type::Number, "stable coefficient c_+"},
      {"alpha", Type::Number, "stable index in (1, 2]"},
      {"beta", Type::Number, "Gaussian coefficient"},
      {"a", Type::Number, "linear drift coefficient"},
  };
  const std::vector<Param> common = {
      {"seed", Type::Unsigned, "64-bit master seed"},
      {"output", Type::String, "output file (default: stdout)"},
      {"format", Type::String, "output format"},
  };
  const std::vector<Param> sim = {
      {"x0", Type::Number, "initial population"},
      {"policy", Type::String, "fixed, adaptive_lamperti or adaptive_extinction"},
      {"eps", Type::Number, "adaptive step accuracy"},
      {"dt", Type::Number, "fixed step size"},
      {"dt_min", Type::Number, "smallest adaptive step"},
      {"dt_max", Type::Number, "largest adaptive step"},
      {"floor_ratio", Type::Number, "extinction floor as a fraction of x0"},
      {"max_steps", Type::Unsigned, "step budget per path"},
  };
  const std::vector<Param> grid_t = {
      {"t", Type::List, "comma-separated times"},
      {"t_min", Type::Number, "first time of the log grid"},
      {"t_max", Type::Number, "last time of the log grid"},
      {"points", Type::Integer, "log grid size"},
  };
  const std::vector<Param> grid_x = {
      {"x", Type::List, "comma-separated arguments"},
      {"x_min", Type::Number, "first point of the log grid"},
      {"x_max", Type::Number, "last point of the log grid"},
      {"points", Type::Integer, "log grid size"},
  };
  const Param numeric{"numeric", Type::Flag, "skip closed forms"};
  const Param method{"method", Type::String, "talbot or euler"};
  const Param workers{"workers", Type::Integer, "worker threads"};
  const Param n_paths{"n_paths", Type::Integer, "ensemble size"};

  return {
      {"mechanism", "inspect", "criticality, Grey's condition and exponents", join({mech, common}), {"json"},
       mechanism_inspect},
      {"kernel", "table", "phi and its inverse varphi", join({mech, common, grid_t, {numeric}}), {"csv", "json"},
       kernel_table},
      {"kernel", "yaglom", "conditional Laplace transform against the quasi-stationary limit",
       join({mech, common,
             {{"x", Type::Number, "initial population"},
              {"t", Type::List, "comma-separated times"},
              {"lambda", Type::List, "comma-separated Laplace arguments"}}}),
       {"csv", "json"}, kernel_yaglom},
      {"scale", "table", "scale function W", join({mech, common, grid_x, {method, numeric}}), {"csv", "json"},
       scale_table},
      {"scale", "check-h", "sandwich bound and hypothesis (H)",
       join({mech, common, grid_x, {method, {"ratio", Type::List, "comma-separated ratios in (0, 1)"}}}),
       {"json", "csv"}, scale_check_h},
      {"simulate", "paths", "one path on the reversed axis",
       join({mech, common, sim,
             {{"stream", Type::Unsigned, "path index within the seed"},
              {"kind", Type::String, "reversed, reflected_reversed or future_infimum"}}}),
       {"csv", "json", "binary"}, simulate_paths},
      {"simulate", "extinction", "Monte Carlo extinction times", join({mech, common, sim, {n_paths, workers}}),
       {"json", "csv"}, simulate_extinction},
      {"scan", "lil", "running-max LIL statistic over a scale sequence",
       join({mech, common, sim,
             {n_paths, workers,
              {"kind", Type::String, "reversed, reflected_reversed or future_infimum"},
              {"r", Type::Number, "scale ratio"},
              {"n0", Type::Integer, "first scale index"},
              {"n1", Type::Integer, "last scale index"},
              {"grid", Type::String, "geometric or iterated_exponential"}}}),
       {"json", "csv"}, scan_lil},
  };
}

json typed(const Param& p, const std::vector<std::string>& raw) {
  switch (p.type) {
    case Type::Number: return parse_double(raw.back(), p.key);
    case Type::Integer: return parse_int<long long>(raw.back(), p.key);
    case Type::Unsigned: return parse_int<std::uint64_t>(raw.back(), p.key);
    case Type::String: return raw.back();
    case Type::Flag: return true;
    case Type::List: {
      json arr = json::array();
      for (const auto& s : raw) arr.push_back(parse_double(s, p.key));
      return arr;
    }
  }
  return nullptr;
}

/// Flattens a config document: nested "mechanism", "params" and "output"
/// objects are lifted to the top level under the flag keys.
json flatten_config(const json& doc, const std::string& command) {
  if (!doc.is_object()) usage("--config: expected a JSON object");
  json flat = json::object();
  for (const auto& [key, value] : doc.items()) {
    if (key == "command") {
      if (!value.is_string() || value.get<std::string>() != command)
        usage("--config: file is for command '" + value.dump() + "', not '" + command + "'");
    } else if (key == "mechanism" || key == "params") {
      if (!value.is_object()) usage("--config: '" + key + "' must be an object");
      for (const auto& [k, v] : value.items()) flat[k] = v;
    } else if (key == "output") {
      if (!value.is_object()) usage("--config: 'output' must be an object");
      if (value.contains("path") && !value["path"].get_ref<const json::string_t&>().empty())
        flat["output"] = value["path"];
      if (value.contains("format")) flat["format"] = value["format"];
    } else {
      flat[key] = value;
    }
  }
  return flat;
}

json read_config(const std::string& path, const std::string& command) {
  std::ifstream is(path);
  if (!is) usage("--config: cannot open '" + path + "'");
  try {
    return flatten_config(json::parse(is), command);
  } catch (const json::exception& e) {
    usage("--config: " + std::string(e.what()));
  }
}

struct Slot {
  const Command* cmd = nullptr;
  CLI::App* app = nullptr;
  std::string config;
  std::map<std::string, std::vector<std::string>> raw;
  std::map<std::string, CLI::Option*> opts;
};

int execute(const Slot& slot, std::ostream& out) {
  const Command& cmd = *slot.cmd;
  const std::string name = cmd.group + " " + cmd.name;
  json merged = slot.config.empty() ? json::object() : read_config(slot.config, name);
  for (const auto& p : cmd.params) {
    const auto* opt = slot.opts.at(p.key);
    if (opt->count() > 0) merged[p.key] = typed(p, slot.raw.at(p.key));
  }
  for (const auto& [key, value] : merged.items()) {
    const bool known = std::any_of(cmd.params.begin(), cmd.params.end(), [&](const Param& p) { return p.key == key; });
    if (!known) usage("--config: key '" + key + "' is not accepted by " + name);
  }

  Inputs in(merged);
  const std::string format = in.string("format", cmd.formats.front());
  if (std::find(cmd.formats.begin(), cmd.formats.end(), format) == cmd.formats.end()) {
    std::string allowed;
    for (const auto& f : cmd.formats) allowed += (allowed.empty() ? "" : ", ") + f;
    usage("--format: '" + format + "' is not supported by " + name + " (" + allowed + ")");
  }
  const Context ctx{in, in.unsigned64("seed", 0), format};
  const std::string result = cmd.handler(ctx);

  const std::string path = in.string("output", "");
  if (path.empty()) {
    out << result;
    out.flush();
    return kExitOk;
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) usage("--output: cannot open '" + path + "' for writing");
  os << result;
  if (!os.flush()) usage("--output: write to '" + path + "' failed");
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const auto table = commands();
  CLI::App app{"Continuous-state branching processes: kernels, scale functions, simulation and LIL scans.", "cbp"};
  app.require_subcommand(1);
  std::list<Slot> slots;
  std::map<std::string, CLI::App*> groups;
  for (const auto& cmd : table) {
    auto& group = groups[cmd.group];
    if (group == nullptr) {
      group = app.add_subcommand(cmd.group, cmd.group + " commands");
      group->require_subcommand(1);
    }
    Slot& slot = slots.emplace_back();
    slot.cmd = &cmd;
    slot.app = group->add_subcommand(cmd.name, cmd.help);
    slot.app->add_option("--config", slot.config, "JSON config; flags override its keys");
    for (const auto& p : cmd.params) {
      auto& store = slot.raw[p.key];
      const std::string flag = flag_of(p.key);
      CLI::Option* o = nullptr;
      if (p.type == Type::Flag)
        o = slot.app->add_flag(flag, p.help);
      else if (p.type == Type::List)
        o = slot.app->add_option(flag, store, p.help)->delimiter(',')->allow_extra_args(false);
      else
        o = slot.app->add_option(flag, store, p.help)->expected(1)->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
      if (p.key == "format") {
        std::string fs;
        for (const auto& f : cmd.formats) fs += (fs.empty() ? "" : ", ") + f;
        o->description("output format: " + fs + " (default " + cmd.formats.front() + ")");
      }
      slot.opts[p.key] = o;
    }
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "cbp: " << e.what() << "\n";
    return kExitValidation;
  }

  const auto it = std::find_if(slots.begin(), slots.end(), [](const Slot& s) { return s.app->parsed(); });
  if (it == slots.end()) {
    err << "cbp: no command given\n";
    return kExitValidation;
  }
  try {
    return execute(*it, out);
  } catch (const Error& e) {
    err << "cbp: " << e.what() << "\n";
    return is_validation_error(e.kind()) ? kExitValidation : kExitNumerical;
  } catch (const json::exception& e) {
    err << "cbp: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "cbp: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace cbp::cli
