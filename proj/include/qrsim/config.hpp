// JSON configuration: {"topology", "trapped_ion", "ape", "rgs"}.
#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "qrsim/model_params.hpp"

namespace qrsim {

struct Config {
  ChainTopology topology;
  TrappedIonParams trapped_ion;
  ApeParams ape;
  RgsParams rgs;
};

// Carries a JSON-pointer-style path to the offending key, e.g. "/ape/t_cz_s".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key_path, const std::string& what)
      : std::runtime_error(key_path + ": " + what), key_path_(std::move(key_path)) {}
  const std::string& key_path() const { return key_path_; }

 private:
  std::string key_path_;
};

// Missing sections and keys keep their defaults; unknown keys are rejected.
Config config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const Config& c);
Config load_config(const std::string& path);

}  // namespace qrsim
