#pragma once

// Pipeline configuration: a flat JSON object whose keys can be overridden
// individually with "key=value" strings (value parsed as JSON, bare words
// taken as strings).
//
//   {"P": 256, "U": 1.0, "floor_eps": 0.01,
//    "saliency_h": 64, "saliency_w": 64,
//    "grid_h": 31, "grid_w": 31, "kernel_sigma": null,
//    "t1": 1024, "t2": 9216,
//    "prior": "instance", "vp": null, "spread": 64}

#include <array>
#include <fstream>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "salwarp/error.hpp"
#include "salwarp/geometry.hpp"
#include "salwarp/grid.hpp"
#include "salwarp/saliency.hpp"

namespace salwarp {

enum class Prior { Instance, Static, Geometric };

inline Prior parse_prior(const std::string& s) {
  if (s == "instance") return Prior::Instance;
  if (s == "static") return Prior::Static;
  if (s == "geometric") return Prior::Geometric;
  throw ConfigError("unknown prior '" + s + "' (expected instance|static|geometric)");
}

inline const char* to_string(Prior p) {
  switch (p) {
    case Prior::Instance: return "instance";
    case Prior::Static: return "static";
    case Prior::Geometric: return "geometric";
  }
  return "?";
}

struct Config {
  SaliencyParams saliency;
  GridParams grid;
  SizeThresholds thresholds;
  Prior prior = Prior::Instance;
  std::optional<std::array<double, 2>> vp;
  double spread = 64.0;

  void validate() const {
    saliency.validate();
    grid.validate();
    thresholds.validate();
    if (!(spread > 0.0)) throw ConfigError("spread must be > 0");
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["P"] = saliency.P;
    j["U"] = saliency.U;
    j["floor_eps"] = saliency.floor_eps;
    j["saliency_h"] = saliency.grid_h;
    j["saliency_w"] = saliency.grid_w;
    j["grid_h"] = grid.grid_h;
    j["grid_w"] = grid.grid_w;
    j["kernel_sigma"] = grid.kernel_sigma ? nlohmann::json(*grid.kernel_sigma) : nlohmann::json(nullptr);
    j["t1"] = thresholds.t1;
    j["t2"] = thresholds.t2;
    j["prior"] = salwarp::to_string(prior);
    j["vp"] = vp ? nlohmann::json{(*vp)[0], (*vp)[1]} : nlohmann::json(nullptr);
    j["spread"] = spread;
    return j;
  }

  /// Applies one key. Unknown keys are configuration errors.
  void set(const std::string& key, const nlohmann::json& v) {
    try {
      if (key == "P") saliency.P = v.get<double>();
      else if (key == "U") saliency.U = v.get<double>();
      else if (key == "floor_eps") saliency.floor_eps = v.get<double>();
      else if (key == "saliency_h") saliency.grid_h = v.get<int>();
      else if (key == "saliency_w") saliency.grid_w = v.get<int>();
      else if (key == "grid_h") grid.grid_h = v.get<int>();
      else if (key == "grid_w") grid.grid_w = v.get<int>();
      else if (key == "kernel_sigma") {
        if (v.is_null()) grid.kernel_sigma.reset();
        else grid.kernel_sigma = v.get<double>();
      } else if (key == "t1") thresholds.t1 = v.get<double>();
      else if (key == "t2") thresholds.t2 = v.get<double>();
      else if (key == "prior") prior = parse_prior(v.get<std::string>());
      else if (key == "vp") {
        if (v.is_null()) vp.reset();
        else if (v.is_array() && v.size() == 2) vp = std::array<double, 2>{v[0].get<double>(), v[1].get<double>()};
        else throw ConfigError("vp must be [x, y] or null");
      } else if (key == "spread") spread = v.get<double>();
      else if (key == "schema") {
      } else throw ConfigError("unknown config key '" + key + "'");
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("bad value for config key '" + key + "': " + e.what());
    }
  }

  /// "key=value" override.
  void apply_override(const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError("override must look like key=value, got '" + kv + "'");
    }
    const std::string key = kv.substr(0, eq);
    const std::string text = kv.substr(eq + 1);
    nlohmann::json v;
    try {
      v = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception&) {
      v = text;
    }
    set(key, v);
  }

  static Config from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    Config c;
    for (const auto& [k, v] : j.items()) c.set(k, v);
    c.validate();
    return c;
  }

  static Config load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("cannot parse config '" + path + "': " + e.what());
    }
    return from_json(j);
  }
};

}  // namespace salwarp
