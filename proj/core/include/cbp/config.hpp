#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "cbp/asymptotics.hpp"
#include "cbp/ensemble.hpp"
#include "cbp/mechanism.hpp"

namespace cbp {

using json = nlohmann::json;

/// {"preset": "stable", "c_plus": 1.0, "alpha": 1.5} and the like. Keys of
/// other presets are ignored so that flat run configs can be read directly.
/// Throws Error{InvalidConfig} for a missing or mistyped key.
json to_json(const MechanismSpec& spec);
MechanismSpec mechanism_from_json(const json& j);

struct OutputSpec {
  std::string path;  // empty: stdout
  std::string format = "csv";
};

/// One invocation: the subcommand, its mechanism and parameters, the seed, and
/// where the result goes. Parameters are kept as the JSON object they came in.
struct RunConfig {
  std::string command;
  std::optional<MechanismSpec> mechanism;
  json params = json::object();
  std::uint64_t seed = 0;
  OutputSpec output;
};

json to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const json& j);

/// Shortest decimal string that reads back to the same double.
std::string format_number(double v);
std::string csv_line(std::span<const double> values);

json to_json(const ScanReport& rep);
std::string to_csv(const ScanReport& rep);

json to_json(const ExtinctionSummary& s);

}  // namespace cbp
