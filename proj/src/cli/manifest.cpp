#include "qrsim/cli/manifest.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace qrsim::cli {

std::string to_string(Paradigm p) { return p == Paradigm::ion ? "ion" : "ape"; }

Paradigm paradigm_from_string(const std::string& s) {
  if (s == "ion") return Paradigm::ion;
  if (s == "ape") return Paradigm::ape;
  throw std::invalid_argument("unknown paradigm: " + s);
}

nlohmann::ordered_json RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["config_path"] = config_path;
  j["seed"] = seed;
  j["paradigm"] = to_string(paradigm);
  j["protocol"] = qrsim::to_string(protocol);
  j["distances_km"] = distances_km;
  j["repeaters"] = repeaters;
  auto rgs = nlohmann::ordered_json::array();
  for (const auto& r : rgs_list) rgs.push_back({r.m, r.b0, r.b1});
  j["rgs"] = rgs;
  j["overrides"] = overrides;
  j["sim_overrides"] = sim_overrides;
  j["iterations"] = iterations;
  j["target_successes"] = target_successes;
  j["photon_budget"] = photon_budget;
  j["memory_dephasing"] = memory_dephasing;
  j["out_path"] = out_path;
  j["trial_log_path"] = trial_log_path;
  j["workers"] = workers;
  return j;
}

std::string RunManifest::hash() const {
  // Worker count does not change results, so it stays out of the hash.
  auto j = to_json();
  j.erase("workers");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

int to_int(const std::string& s) {
  std::size_t pos = 0;
  const int v = std::stoi(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("not an integer: " + s);
  return v;
}

}  // namespace

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  for (const auto& item : split(s, ',')) {
    const auto dots = item.find("..");
    if (dots == std::string::npos) {
      out.push_back(to_int(item));
      continue;
    }
    const int lo = to_int(item.substr(0, dots));
    const int hi = to_int(item.substr(dots + 2));
    if (hi < lo) throw std::invalid_argument("empty range: " + item);
    for (int v = lo; v <= hi; ++v) out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split(s, ',')) {
    std::size_t pos = 0;
    out.push_back(std::stod(item, &pos));
    if (pos != item.size()) throw std::invalid_argument("not a number: " + item);
  }
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

std::vector<RgsParams> parse_rgs_list(const std::string& s) {
  std::vector<RgsParams> out;
  for (const auto& item : split(s, ';')) {
    const auto parts = split(item, ',');
    if (parts.size() != 3) throw std::invalid_argument("RGS must be m,b0,b1: " + item);
    RgsParams r{to_int(parts[0]), to_int(parts[1]), to_int(parts[2])};
    r.validate();
    out.push_back(r);
  }
  if (out.empty()) throw std::invalid_argument("empty RGS list");
  return out;
}

Config resolve_config(const std::string& path, const std::vector<std::string>& overrides) {
  nlohmann::json j;
  if (path.empty()) {
    j = config_to_json(Config{});
  } else {
    j = config_to_json(load_config(path));
  }
  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos) throw ConfigError(ov, "override must be section.key=value");
    const std::string key = ov.substr(0, eq);
    const auto dot = key.find('.');
    if (dot == std::string::npos) throw ConfigError(key, "override key must be section.key");
    const std::string section = key.substr(0, dot);
    const std::string field = key.substr(dot + 1);
    const std::string path_str = "/" + section + "/" + field;
    nlohmann::json value;
    try {
      value = nlohmann::json::parse(ov.substr(eq + 1));
    } catch (const nlohmann::json::parse_error&) {
      throw ConfigError(path_str, "override value is not valid JSON");
    }
    if (!j.contains(section)) j[section] = nlohmann::json::object();
    j[section][field] = value;
    // alpha and L_att must stay consistent; an explicit alpha wins.
    if (section == "topology" && field == "attenuation_db_per_km")
      j[section].erase("attenuation_length_km");
  }
  return config_from_json(j);
}

}  // namespace qrsim::cli
