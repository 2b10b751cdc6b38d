#pragma once

// Central configuration file (YAML). Every key is optional; unknown keys
// are rejected so typos do not silently fall back to defaults. See
// config/devassist.yaml for the full reference with default values.

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "devassist/code_embed.hpp"
#include "devassist/fusion.hpp"
#include "devassist/harness.hpp"

namespace devassist {

class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

struct AppConfig {
  harness::SimConfig sim;  // router, network, workload and simulation sections
  embed::BandConfig embed;
  fusion::FusionWeights fusion;
  size_t max_files = 500;

  void validate() const;
};

AppConfig load_config_text(std::string_view yaml);
AppConfig load_config_file(const std::filesystem::path& path);

// Canonical JSON rendering (sorted keys) of every setting.
nlohmann::json config_to_json(const AppConfig& config);

// Fingerprint of the settings that determine the routing policy.
std::string router_config_hash(const AppConfig& config);
// Fingerprint of the settings that determine a simulation run.
std::string simulation_config_hash(const AppConfig& config);

}  // namespace devassist
