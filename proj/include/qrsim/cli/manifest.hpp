// Fully resolved description of one CLI run; echoed into every output header.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qrsim/config.hpp"
#include "qrsim/theory_1g.hpp"

namespace qrsim::cli {

inline constexpr const char* kToolVersion = "0.1.0";

enum class Paradigm { ion, ape };

std::string to_string(Paradigm p);
Paradigm paradigm_from_string(const std::string& s);

struct RunManifest {
  std::string command;
  std::string config_path;  // empty: built-in defaults
  std::uint64_t seed = 1;
  std::vector<double> distances_km;
  std::vector<int> repeaters;
  std::vector<RgsParams> rgs_list;
  std::vector<std::string> overrides;      // "section.key=<json>"
  std::vector<std::string> sim_overrides;  // validate: simulation side only
  std::string out_path;
  std::string trial_log_path;
  std::uint64_t iterations = 0;       // ion: iterations; ape: iteration budget
  std::uint64_t target_successes = 0; // ape only
  int workers = 1;
  Paradigm paradigm = Paradigm::ion;
  Protocol protocol = Protocol::two_step;
  int photon_budget = 300;
  bool memory_dephasing = true;

  nlohmann::ordered_json to_json() const;
  std::string hash() const;  // FNV-1a over the canonical JSON, hex
};

// "1..10", "1,2,4" or a mix ("1..3,8").
std::vector<int> parse_int_list(const std::string& s);
std::vector<double> parse_double_list(const std::string& s);
// "6,6,3;8,11,4"
std::vector<RgsParams> parse_rgs_list(const std::string& s);

// Loads the config file (or defaults) and applies "section.key=<json>" overrides.
// Throws ConfigError with the offending key path.
Config resolve_config(const std::string& path, const std::vector<std::string>& overrides);

}  // namespace qrsim::cli
