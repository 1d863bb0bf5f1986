#pragma once

#include <cstdint>
#include <cstdio>
#include <string>

#include <json.hpp>

#include "sacl/rng.hpp"
#include "sacl/version.hpp"

namespace sacl {

inline std::string to_hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return std::string(buf);
}

// Hash of the fully resolved run configuration. Two runs share a hash iff
// every resolved config field matches.
inline std::string config_hash(const nlohmann::json& config) {
  return to_hex64(fnv1a64(config.dump()));
}

// Common envelope carried by every JSON document artifact.
inline void stamp_artifact(nlohmann::json& doc, const nlohmann::json& config) {
  doc["schema_version"] = kSchemaVersion;
  doc["generator_version"] = kGeneratorVersion;
  doc["config"] = config;
  doc["config_hash"] = config_hash(config);
}

}  // namespace sacl
