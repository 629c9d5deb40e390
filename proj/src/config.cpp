#include "qrsim/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>

namespace qrsim {
namespace {

using nlohmann::json;

// Field table for one section: key -> setter. Setters throw ConfigError on
// type mismatch so the path is always reported.
using Setter = std::function<void(const json&, const std::string& path)>;

double as_double(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  return v.get<double>();
}

int as_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
  return v.get<int>();
}

void apply_section(const json& j, const std::string& section,
                   const std::map<std::string, Setter>& fields) {
  const std::string base = "/" + section;
  if (!j.is_object()) throw ConfigError(base, "expected an object");
  for (const auto& [key, value] : j.items()) {
    auto it = fields.find(key);
    if (it == fields.end()) throw ConfigError(base + "/" + key, "unknown key");
    it->second(value, base + "/" + key);
  }
}

Setter dbl(double& target) {
  return [&target](const json& v, const std::string& p) { target = as_double(v, p); };
}

Setter opt_dbl(std::optional<double>& target) {
  return [&target](const json& v, const std::string& p) {
    if (v.is_null()) {
      target.reset();
    } else {
      target = as_double(v, p);
    }
  };
}

Setter integer(int& target) {
  return [&target](const json& v, const std::string& p) { target = as_int(v, p); };
}

template <class T>
void validate_section(const T& params, const std::string& section) {
  try {
    params.validate();
  } catch (const InvalidParameter& e) {
    throw ConfigError("/" + section + "/" + e.field(), e.what());
  }
}

}  // namespace

Config config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("", "top level must be an object");
  Config c;
  std::optional<double> alpha;
  bool have_l_att = false;

  for (const auto& [key, value] : j.items()) {
    if (key == "topology") {
      auto& t = c.topology;
      apply_section(value, key,
                    {{"n_repeaters", integer(t.n_repeaters)},
                     {"chain_length_km", dbl(t.chain_length_km)},
                     {"signal_speed_km_per_s", dbl(t.signal_speed_km_per_s)},
                     {"attenuation_length_km",
                      [&](const json& v, const std::string& p) {
                        t.attenuation_length_km = as_double(v, p);
                        have_l_att = true;
                      }},
                     {"attenuation_db_per_km", [&](const json& v, const std::string& p) {
                        alpha = as_double(v, p);
                      }}});
    } else if (key == "trapped_ion") {
      auto& t = c.trapped_ion;
      apply_section(value, key,
                    {{"f_1q", dbl(t.f_1q)},
                     {"f_2q", dbl(t.f_2q)},
                     {"tau_coherence_s", dbl(t.tau_coherence_s)},
                     {"f_em_trap", dbl(t.f_em_trap)},
                     {"eta_qfc", dbl(t.eta_qfc)},
                     {"eta_det", dbl(t.eta_det)},
                     {"eta_coll", dbl(t.eta_coll)},
                     {"t_1q_s", dbl(t.t_1q_s)},
                     {"t_ms_s", dbl(t.t_ms_s)},
                     {"t_meas_s", dbl(t.t_meas_s)},
                     {"h_max", integer(t.h_max)},
                     {"t_init_s", dbl(t.t_init_s)},
                     {"t_attempt_s", opt_dbl(t.t_attempt_s)},
                     {"p_ms", opt_dbl(t.p_ms)}});
    } else if (key == "ape") {
      auto& a = c.ape;
      apply_section(value, key,
                    {{"t_cz_s", dbl(a.t_cz_s)},
                     {"t_meas_s", dbl(a.t_meas_s)},
                     {"t_emit_s", dbl(a.t_emit_s)},
                     {"t2_emitter_s", dbl(a.t2_emitter_s)},
                     {"t2_memory_s", dbl(a.t2_memory_s)},
                     {"eta_qfc", dbl(a.eta_qfc)},
                     {"eta_det", dbl(a.eta_det)},
                     {"eta_coll", dbl(a.eta_coll)},
                     {"p_single_mode", dbl(a.p_single_mode)},
                     {"eta_delay", dbl(a.eta_delay)}});
    } else if (key == "rgs") {
      auto& r = c.rgs;
      apply_section(value, key,
                    {{"m", integer(r.m)}, {"b0", integer(r.b0)}, {"b1", integer(r.b1)}});
    } else {
      throw ConfigError("/" + key, "unknown key");
    }
  }

  if (alpha) {
    if (!(*alpha > 0.0))
      throw ConfigError("/topology/attenuation_db_per_km", "must be > 0");
    const double from_alpha = attenuation_length_from_db(*alpha);
    if (have_l_att) {
      const double l = c.topology.attenuation_length_km;
      if (std::abs(from_alpha - l) > 1e-9 * std::abs(l))
        throw ConfigError("/topology/attenuation_db_per_km",
                          "disagrees with attenuation_length_km");
    } else {
      c.topology.attenuation_length_km = from_alpha;
    }
  }

  validate_section(c.topology, "topology");
  validate_section(c.trapped_ion, "trapped_ion");
  validate_section(c.ape, "ape");
  validate_section(c.rgs, "rgs");
  return c;
}

json config_to_json(const Config& c) {
  json j;
  const auto& t = c.topology;
  j["topology"] = {{"n_repeaters", t.n_repeaters},
                   {"chain_length_km", t.chain_length_km},
                   {"signal_speed_km_per_s", t.signal_speed_km_per_s},
                   {"attenuation_length_km", t.attenuation_length_km}};
  const auto& ion = c.trapped_ion;
  j["trapped_ion"] = {{"f_1q", ion.f_1q},
                      {"f_2q", ion.f_2q},
                      {"tau_coherence_s", ion.tau_coherence_s},
                      {"f_em_trap", ion.f_em_trap},
                      {"eta_qfc", ion.eta_qfc},
                      {"eta_det", ion.eta_det},
                      {"eta_coll", ion.eta_coll},
                      {"t_1q_s", ion.t_1q_s},
                      {"t_ms_s", ion.t_ms_s},
                      {"t_meas_s", ion.t_meas_s},
                      {"h_max", ion.h_max},
                      {"t_init_s", ion.t_init_s}};
  if (ion.t_attempt_s) j["trapped_ion"]["t_attempt_s"] = *ion.t_attempt_s;
  if (ion.p_ms) j["trapped_ion"]["p_ms"] = *ion.p_ms;
  const auto& a = c.ape;
  j["ape"] = {{"t_cz_s", a.t_cz_s},
              {"t_meas_s", a.t_meas_s},
              {"t_emit_s", a.t_emit_s},
              {"t2_emitter_s", a.t2_emitter_s},
              {"t2_memory_s", a.t2_memory_s},
              {"eta_qfc", a.eta_qfc},
              {"eta_det", a.eta_det},
              {"eta_coll", a.eta_coll},
              {"p_single_mode", a.p_single_mode},
              {"eta_delay", a.eta_delay}};
  j["rgs"] = {{"m", c.rgs.m}, {"b0", c.rgs.b0}, {"b1", c.rgs.b1}};
  return j;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
  return config_from_json(j);
}

}  // namespace qrsim
