#include "chi/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace chi {

std::string format_double(double x) {
  char buf[40];
  // Shortest representation that parses back to the same double.
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) return buf;
  }
  return buf;
}

AgentConfig RunConfig::agent_config() const {
  AgentConfig a;
  a.kind = parse_agent_kind(agent);
  a.plan = plan;
  if (plan_init == "amortised") {
    a.init_mode = InitMode::Amortised;
  } else if (plan_init == "broad") {
    a.init_mode = InitMode::Broad;
  } else {
    throw std::invalid_argument("plan.init must be amortised or broad");
  }
  if (plan_propagation == "mean") {
    a.plan.propagation = Propagation::Mean;
  } else if (plan_propagation == "member") {
    a.plan.propagation = Propagation::Member;
  } else {
    throw std::invalid_argument("plan.propagation must be mean or member");
  }
  a.sac = sac;
  a.ensemble = ensemble;
  a.noise_std = noise_std;
  a.m_top = m_top;
  a.m_rand = m_rand;
  a.sample_advance = sample_advance;
  return a;
}

EnvOverrides RunConfig::env_overrides() const {
  EnvOverrides o;
  o.episode_len = episode_len;
  o.wall = wall;
  return o;
}

RunConfig default_config(const std::string& env_name) {
  RunConfig cfg;
  cfg.env = env_name;
  if (env_name == "pointmass") {
    cfg.episode_len = 50;
    cfg.plan.samples = 200;
    cfg.ensemble.hidden = 64;
    cfg.ensemble.depth = 2;
  } else if (env_name == "pendulum") {
    cfg.episode_len = 100;
    cfg.plan.samples = 200;
    cfg.ensemble.hidden = 128;
    cfg.ensemble.depth = 2;
  } else {
    throw std::invalid_argument("unknown environment: " + env_name);
  }
  return cfg;
}

namespace {

int parse_int(const std::string& v) {
  std::size_t pos = 0;
  int x = std::stoi(v, &pos);
  if (pos != v.size()) throw std::invalid_argument("bad integer: " + v);
  return x;
}

std::uint64_t parse_u64(const std::string& v) {
  std::size_t pos = 0;
  unsigned long long x = std::stoull(v, &pos);
  if (pos != v.size()) throw std::invalid_argument("bad integer: " + v);
  return static_cast<std::uint64_t>(x);
}

double parse_real(const std::string& v) {
  std::size_t pos = 0;
  double x = std::stod(v, &pos);
  if (pos != v.size()) throw std::invalid_argument("bad real: " + v);
  return x;
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument("bad boolean: " + v);
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  std::size_t e = s.find_last_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

}  // namespace

void apply_config_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "env") cfg.env = value;
  else if (key == "agent") cfg.agent = value;
  else if (key == "seed") cfg.seed = parse_u64(value);
  else if (key == "episodes") cfg.episodes = parse_int(value);
  else if (key == "eval_every") cfg.eval_every = parse_int(value);
  else if (key == "out_dir") cfg.out_dir = value;
  else if (key == "env.episode_len") cfg.episode_len = parse_int(value);
  else if (key == "env.wall_center_x") cfg.wall.center_x = parse_real(value);
  else if (key == "env.wall_half_thickness") cfg.wall.half_thickness = parse_real(value);
  else if (key == "env.wall_gap_lo") cfg.wall.gap_lo = parse_real(value);
  else if (key == "env.wall_gap_hi") cfg.wall.gap_hi = parse_real(value);
  else if (key == "plan.horizon") cfg.plan.horizon = parse_int(value);
  else if (key == "plan.iters") cfg.plan.iterations = parse_int(value);
  else if (key == "plan.samples") cfg.plan.samples = parse_int(value);
  else if (key == "plan.kappa") cfg.plan.kappa = parse_real(value);
  else if (key == "plan.elite_fraction") cfg.plan.elite_fraction = parse_real(value);
  else if (key == "plan.sigma_min") cfg.plan.sigma_min = parse_real(value);
  else if (key == "plan.sigma_max") cfg.plan.sigma_max = parse_real(value);
  else if (key == "plan.state_samples") cfg.plan.state_samples = parse_int(value);
  else if (key == "plan.init") cfg.plan_init = value;
  else if (key == "plan.propagation") cfg.plan_propagation = value;
  else if (key == "agent.noise_std") cfg.noise_std = parse_real(value);
  else if (key == "agent.m_top") cfg.m_top = parse_int(value);
  else if (key == "agent.m_rand") cfg.m_rand = parse_int(value);
  else if (key == "agent.sample_advance") cfg.sample_advance = parse_bool(value);
  else if (key == "sac.alpha") cfg.sac.alpha = parse_real(value);
  else if (key == "sac.gamma") cfg.sac.gamma = parse_real(value);
  else if (key == "sac.tau") cfg.sac.tau = parse_real(value);
  else if (key == "sac.lr") cfg.sac.lr = parse_real(value);
  else if (key == "sac.batch_size") cfg.sac.batch_size = parse_int(value);
  else if (key == "sac.hidden") cfg.sac.hidden = parse_int(value);
  else if (key == "sac.update_start") cfg.sac.update_start = parse_int(value);
  else if (key == "sac.synthetic_cap") cfg.sac.synthetic_cap = parse_real(value);
  else if (key == "dyn.members") cfg.ensemble.members = parse_int(value);
  else if (key == "dyn.hidden") cfg.ensemble.hidden = parse_int(value);
  else if (key == "dyn.depth") cfg.ensemble.depth = parse_int(value);
  else if (key == "dyn.lr") cfg.ensemble.lr = parse_real(value);
  else if (key == "dyn.epochs") cfg.ensemble.train_epochs = parse_int(value);
  else if (key == "dyn.batch") cfg.ensemble.train_batch = parse_int(value);
  else if (key == "buffer.capacity") cfg.buffer_capacity = static_cast<std::size_t>(parse_u64(value));
  else throw std::invalid_argument("unknown config key: " + key);
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config file: " + path);
  // First pass to find the environment so defaults are right.
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  while (std::getline(is, line)) {
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("malformed config line: " + line);
    entries.emplace_back(trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
  }
  std::string env_name = "pointmass";
  for (const auto& [k, v] : entries)
    if (k == "env") env_name = v;
  RunConfig cfg = default_config(env_name);
  for (const auto& [k, v] : entries) apply_config_key(cfg, k, v);
  return cfg;
}

std::string serialize_config(const RunConfig& cfg) {
  std::ostringstream os;
  os << "env = " << cfg.env << "\n";
  os << "agent = " << cfg.agent << "\n";
  os << "seed = " << cfg.seed << "\n";
  os << "episodes = " << cfg.episodes << "\n";
  os << "eval_every = " << cfg.eval_every << "\n";
  os << "out_dir = " << cfg.out_dir << "\n";
  os << "env.episode_len = " << cfg.episode_len << "\n";
  os << "env.wall_center_x = " << format_double(cfg.wall.center_x) << "\n";
  os << "env.wall_half_thickness = " << format_double(cfg.wall.half_thickness) << "\n";
  os << "env.wall_gap_lo = " << format_double(cfg.wall.gap_lo) << "\n";
  os << "env.wall_gap_hi = " << format_double(cfg.wall.gap_hi) << "\n";
  os << "plan.horizon = " << cfg.plan.horizon << "\n";
  os << "plan.iters = " << cfg.plan.iterations << "\n";
  os << "plan.samples = " << cfg.plan.samples << "\n";
  os << "plan.kappa = " << format_double(cfg.plan.kappa) << "\n";
  os << "plan.elite_fraction = " << format_double(cfg.plan.elite_fraction) << "\n";
  os << "plan.sigma_min = " << format_double(cfg.plan.sigma_min) << "\n";
  os << "plan.sigma_max = " << format_double(cfg.plan.sigma_max) << "\n";
  os << "plan.state_samples = " << cfg.plan.state_samples << "\n";
  os << "plan.init = " << cfg.plan_init << "\n";
  os << "plan.propagation = " << cfg.plan_propagation << "\n";
  os << "agent.noise_std = " << format_double(cfg.noise_std) << "\n";
  os << "agent.m_top = " << cfg.m_top << "\n";
  os << "agent.m_rand = " << cfg.m_rand << "\n";
  os << "agent.sample_advance = " << (cfg.sample_advance ? "true" : "false") << "\n";
  os << "sac.alpha = " << format_double(cfg.sac.alpha) << "\n";
  os << "sac.gamma = " << format_double(cfg.sac.gamma) << "\n";
  os << "sac.tau = " << format_double(cfg.sac.tau) << "\n";
  os << "sac.lr = " << format_double(cfg.sac.lr) << "\n";
  os << "sac.batch_size = " << cfg.sac.batch_size << "\n";
  os << "sac.hidden = " << cfg.sac.hidden << "\n";
  os << "sac.update_start = " << cfg.sac.update_start << "\n";
  os << "sac.synthetic_cap = " << format_double(cfg.sac.synthetic_cap) << "\n";
  os << "dyn.members = " << cfg.ensemble.members << "\n";
  os << "dyn.hidden = " << cfg.ensemble.hidden << "\n";
  os << "dyn.depth = " << cfg.ensemble.depth << "\n";
  os << "dyn.lr = " << format_double(cfg.ensemble.lr) << "\n";
  os << "dyn.epochs = " << cfg.ensemble.train_epochs << "\n";
  os << "dyn.batch = " << cfg.ensemble.train_batch << "\n";
  os << "buffer.capacity = " << cfg.buffer_capacity << "\n";
  return os.str();
}

void save_config_file(const std::string& path, const RunConfig& cfg) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write config file: " + path);
  os << serialize_config(cfg);
}

}  // namespace chi
