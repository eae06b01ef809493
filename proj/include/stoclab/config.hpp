#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "stoclab/common.hpp"
#include "stoclab/langevin.hpp"
#include "stoclab/master.hpp"
#include "stoclab/polynomial.hpp"

namespace stoclab {

using json = nlohmann::json;

inline json polynomial_to_json(const Polynomial& p) {
  return p.coeffs().empty() ? json::array({0.0}) : json(p.coeffs());
}

inline Polynomial polynomial_from_json(const json& j) {
  require(j.is_array() || j.is_number(), errc::config_parse_error,
          "polynomial must be a coefficient array or a scalar");
  if (j.is_number()) return Polynomial::constant(j.get<double>());
  std::vector<double> c;
  for (const auto& v : j) {
    require(v.is_number(), errc::config_parse_error, "polynomial coefficients must be numbers");
    c.push_back(v.get<double>());
  }
  return Polynomial(std::move(c));
}

inline json langevin_to_json(const LangevinSpec& spec) {
  return json{{"k_relax", spec.k_relax},
              {"drift_poly", polynomial_to_json(spec.drift_poly)},
              {"noise_poly", polynomial_to_json(spec.noise_poly)},
              {"noise_strength", spec.noise_strength},
              {"interpretation", to_string(spec.interpretation)}};
}

inline LangevinSpec langevin_from_json(const json& j) {
  LangevinSpec spec;
  try {
    spec.k_relax = j.at("k_relax").get<double>();
    spec.drift_poly = polynomial_from_json(j.at("drift_poly"));
    spec.noise_poly = polynomial_from_json(j.at("noise_poly"));
    spec.noise_strength = j.at("noise_strength").get<double>();
    const std::string interp = j.at("interpretation").get<std::string>();
    if (interp == "ito")
      spec.interpretation = Interpretation::Ito;
    else if (interp == "stratonovich")
      spec.interpretation = Interpretation::Stratonovich;
    else
      fail(errc::config_parse_error, "interpretation must be 'ito' or 'stratonovich'");
  } catch (const json::exception& e) {
    fail(errc::config_parse_error, std::string("bad langevin spec: ") + e.what());
  }
  return spec;
}

inline json master_to_json(const MasterSpec& spec) {
  json channels = json::array();
  for (const auto& c : spec.channels)
    channels.push_back(json{{"delta", c.delta}, {"rate_poly", polynomial_to_json(c.rate_poly)}});
  json out{{"channels", channels}};
  if (spec.verhulst) {
    out["preset"] = json{{"name", "verhulst"},
                         {"beta", spec.verhulst->beta},
                         {"lambda", spec.verhulst->lambda},
                         {"gamma", spec.verhulst->gamma}};
  }
  return out;
}

inline MasterSpec master_from_json(const json& j) {
  try {
    if (j.contains("preset")) {
      const json& p = j.at("preset");
      const std::string name = p.at("name").get<std::string>();
      if (name == "verhulst")
        return MasterSpec::verhulst_preset(p.at("beta").get<double>(),
                                           p.at("lambda").get<double>(),
                                           p.at("gamma").get<double>());
      if (name == "annihilation_to_a")
        return MasterSpec::annihilation_to_a(p.at("gamma").get<double>());
      if (name == "annihilation_to_zero")
        return MasterSpec::annihilation_to_zero(p.at("k").get<double>());
      fail(errc::config_parse_error, "unknown preset '" + name + "'");
    }
    MasterSpec spec;
    for (const auto& c : j.at("channels")) {
      ReactionChannel channel;
      channel.delta = c.at("delta").get<int>();
      channel.rate_poly = polynomial_from_json(c.at("rate_poly"));
      spec.channels.push_back(std::move(channel));
    }
    return spec;
  } catch (const json::exception& e) {
    fail(errc::config_parse_error, std::string("bad master spec: ") + e.what());
  }
}

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), errc::config_parse_error, "cannot open config file " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(errc::config_parse_error, std::string("cannot parse ") + path + ": " + e.what());
  }
}

/// FNV-1a over the canonical dump; stable across runs and platforms.
inline std::uint64_t config_hash(const json& j) {
  const std::string s = j.dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace stoclab
