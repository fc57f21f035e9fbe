#pragma once

#include <string>

#include <json.hpp>

namespace localfactor {

inline constexpr const char* kToolName = "localfactor";
inline constexpr const char* kToolVersion = "0.1.0";

// Structured run record: the exact configuration needed to replay the run
// plus the outputs. Serialization round-trips losslessly.
struct Report {
  std::string subcommand;
  nlohmann::json config;
  nlohmann::json results;
  double wall_time_ms = 0;

  nlohmann::json to_json() const {
    return nlohmann::json{{"tool", kToolName},        {"version", kToolVersion},
                          {"subcommand", subcommand}, {"config", config},
                          {"results", results},       {"wall_time_ms", wall_time_ms}};
  }

  static Report from_json(const nlohmann::json& j) {
    Report r;
    r.subcommand = j.at("subcommand").get<std::string>();
    r.config = j.at("config");
    r.results = j.at("results");
    r.wall_time_ms = j.at("wall_time_ms").get<double>();
    return r;
  }
};

}  // namespace localfactor
