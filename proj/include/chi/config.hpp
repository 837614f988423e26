#pragma once

#include <string>

#include "chi/agent.hpp"
#include "chi/env.hpp"

namespace chi {

// Full experiment configuration. Serialises to an ordered key = value
// document; re-loading reproduces the run bit-for-bit given the same build.
struct RunConfig {
  std::string env = "pointmass";
  std::string agent = "chi";
  std::uint64_t seed = 1;
  int episodes = 30;
  int eval_every = 5;
  std::string out_dir;

  int episode_len = 50;
  WallGeometry wall;

  PlanConfig plan;
  std::string plan_init = "amortised";      // amortised | broad
  std::string plan_propagation = "mean";    // mean | member
  SacConfig sac;
  EnsembleConfig ensemble;

  double noise_std = 0.3;
  int m_top = 5;
  int m_rand = 5;
  bool sample_advance = false;

  std::size_t buffer_capacity = 100000;

  AgentConfig agent_config() const;
  EnvOverrides env_overrides() const;
};

// Desk-scale defaults per environment; full-scale values stay reachable
// through the config keys.
RunConfig default_config(const std::string& env_name);

// Applies one "key = value" assignment; throws on unknown keys or bad values.
void apply_config_key(RunConfig& cfg, const std::string& key, const std::string& value);

RunConfig load_config_file(const std::string& path);
std::string serialize_config(const RunConfig& cfg);
void save_config_file(const std::string& path, const RunConfig& cfg);

std::string format_double(double x);  // shortest round-trip decimal form

}  // namespace chi
