#include "cbp/config.hpp"

#include <charconv>
#include <cmath>

#include "cbp/error.hpp"

namespace cbp {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double number(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw Error(ErrorKind::InvalidConfig, std::string("missing key '") + key + "'");
  if (!it->is_number()) throw Error(ErrorKind::InvalidConfig, std::string("key '") + key + "' must be a number");
  return it->get<double>();
}

}  // namespace

json to_json(const MechanismSpec& spec) {
  json j{{"preset", preset_name(spec)}};
  std::visit(overloaded{
                 [&](const Stable& s) {
                   j["c_plus"] = s.c_plus;
                   j["alpha"] = s.alpha;
                 },
                 [&](const Quadratic& s) { j["beta"] = s.beta; },
                 [&](const LinearQuadratic& s) {
                   j["a"] = s.a;
                   j["beta"] = s.beta;
                 },
                 [&](const StableGaussian& s) {
                   j["c_plus"] = s.c_plus;
                   j["alpha"] = s.alpha;
                   j["beta"] = s.beta;
                 },
                 [&](const StableDrift& s) {
                   j["a"] = s.a;
                   j["c_plus"] = s.c_plus;
                   j["alpha"] = s.alpha;
                 },
             },
             spec);
  return j;
}

MechanismSpec mechanism_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorKind::InvalidConfig, "mechanism must be a JSON object");
  const auto it = j.find("preset");
  if (it == j.end() || !it->is_string()) throw Error(ErrorKind::InvalidConfig, "missing key 'preset'");
  const std::string preset = it->get<std::string>();
  if (preset == "stable") return Stable{number(j, "c_plus"), number(j, "alpha")};
  if (preset == "quadratic") return Quadratic{number(j, "beta")};
  if (preset == "linear_quadratic") return LinearQuadratic{number(j, "a"), number(j, "beta")};
  if (preset == "stable_gaussian") return StableGaussian{number(j, "c_plus"), number(j, "alpha"), number(j, "beta")};
  if (preset == "stable_drift") return StableDrift{number(j, "a"), number(j, "c_plus"), number(j, "alpha")};
  throw Error(ErrorKind::InvalidConfig, "unknown preset '" + preset + "'");
}

json to_json(const RunConfig& cfg) {
  json j{{"command", cfg.command},
         {"params", cfg.params},
         {"seed", cfg.seed},
         {"output", {{"path", cfg.output.path}, {"format", cfg.output.format}}}};
  if (cfg.mechanism) j["mechanism"] = to_json(*cfg.mechanism);
  return j;
}

RunConfig run_config_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorKind::InvalidConfig, "run config must be a JSON object");
  RunConfig cfg;
  try {
    cfg.command = j.value("command", std::string{});
    if (j.contains("mechanism")) cfg.mechanism = mechanism_from_json(j.at("mechanism"));
    if (j.contains("params")) cfg.params = j.at("params");
    cfg.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("output")) {
      cfg.output.path = j.at("output").value("path", std::string{});
      cfg.output.format = j.at("output").value("format", std::string{"csv"});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidConfig, e.what());
  }
  if (!cfg.params.is_object()) throw Error(ErrorKind::InvalidConfig, "params must be a JSON object");
  return cfg;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string csv_line(std::span<const double> values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += format_number(values[i]);
  }
  return out;
}

json to_json(const ScanReport& rep) {
  json q = json::array();
  for (const auto& s : rep.quantiles) q.push_back({{"n", s.n}, {"t", s.t}, {"q10", s.q10}, {"q50", s.q50}, {"q90", s.q90}});
  return {{"mechanism", to_json(rep.mechanism)},
          {"kind", to_string(rep.kind)},
          {"grid", to_string(rep.grid)},
          {"r", rep.r},
          {"scales", rep.scales},
          {"skipped", rep.skipped},
          {"quantiles", q},
          {"n_paths", rep.n_paths},
          {"seed", rep.seed}};
}

std::string to_csv(const ScanReport& rep) {
  std::string out = "n,t,q10,q50,q90\n";
  for (const auto& s : rep.quantiles) {
    const double row[] = {static_cast<double>(s.n), s.t, s.q10, s.q50, s.q90};
    out += csv_line(row);
    out += '\n';
  }
  return out;
}

json to_json(const ExtinctionSummary& s) {
  json q = json::array();
  for (const auto& p : s.t0_quantiles) q.push_back({{"level", p.level}, {"value", p.value}});
  json j{{"n_paths", s.n_paths}, {"n_extinct", s.n_extinct}, {"T0_quantiles", q}};
  if (!std::isnan(s.ks_distance)) j["ks_distance"] = s.ks_distance;
  return j;
}

}  // namespace cbp
