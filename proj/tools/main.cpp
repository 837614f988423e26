#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "chi/config.hpp"
#include "chi/harness.hpp"

namespace fs = std::filesystem;

namespace {

std::string output_root() {
  const char* root = std::getenv("CHI_OUTPUT_ROOT");
  return root != nullptr ? root : "runs";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid amortised/iterative inference agents for continuous control"};
  app.require_subcommand(1);

  // run
  auto* run_cmd = app.add_subcommand("run", "Run one experiment from a config file");
  std::string config_path;
  std::optional<std::string> env_name, agent_name, out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> episodes, horizon, iters, samples;
  std::optional<double> kappa, elite_fraction;
  run_cmd->add_option("--config", config_path, "Config file (key = value lines)");
  run_cmd->add_option("--env", env_name, "Environment: pointmass | pendulum");
  run_cmd->add_option("--agent", agent_name, "Agent: chi | sac | cem");
  run_cmd->add_option("--seed", seed, "Run seed");
  run_cmd->add_option("--episodes", episodes, "Training episodes");
  run_cmd->add_option("--horizon", horizon, "Planning horizon");
  run_cmd->add_option("--iters", iters, "Planner optimisation iterations");
  run_cmd->add_option("--samples", samples, "Planner candidate sequences per iteration");
  run_cmd->add_option("--kappa", kappa, "Score temperature");
  run_cmd->add_option("--elite-fraction", elite_fraction, "CEM elite fraction");
  run_cmd->add_option("--out", out_dir, "Output directory (defaults under $CHI_OUTPUT_ROOT)");

  // compare
  auto* cmp_cmd = app.add_subcommand("compare", "Run several configs over seeds and tabulate");
  std::vector<std::string> cmp_configs;
  std::string cmp_seeds = "1,2,3";
  std::string cmp_out;
  int cmp_jobs = static_cast<int>(std::thread::hardware_concurrency());
  double threshold_frac = 0.9;
  cmp_cmd->add_option("--configs", cmp_configs, "Config files")->required()->delimiter(',');
  cmp_cmd->add_option("--seeds", cmp_seeds, "Comma-separated seeds");
  cmp_cmd->add_option("--out", cmp_out, "Output directory");
  cmp_cmd->add_option("--jobs", cmp_jobs, "Concurrent runs");
  cmp_cmd->add_option("--threshold-frac", threshold_frac,
                      "Fraction of the best final median defining the threshold");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      chi::RunConfig cfg = config_path.empty()
                               ? chi::default_config(env_name.value_or("pointmass"))
                               : chi::load_config_file(config_path);
      if (env_name) cfg.env = *env_name;
      if (agent_name) cfg.agent = *agent_name;
      if (seed) cfg.seed = *seed;
      if (episodes) cfg.episodes = *episodes;
      if (horizon) cfg.plan.horizon = *horizon;
      if (iters) cfg.plan.iterations = *iters;
      if (samples) cfg.plan.samples = *samples;
      if (kappa) cfg.plan.kappa = *kappa;
      if (elite_fraction) cfg.plan.elite_fraction = *elite_fraction;
      if (out_dir) {
        cfg.out_dir = *out_dir;
      } else if (cfg.out_dir.empty()) {
        cfg.out_dir = (fs::path(output_root()) /
                       (cfg.agent + "-" + cfg.env + "-seed" + std::to_string(cfg.seed)))
                          .string();
      }
      const chi::RunResult result = chi::run(cfg);
      if (result.failed) {
        std::cerr << "run failed: " << result.failure << "\n";
        return 1;
      }
      std::cout << "metrics: " << result.metrics_path << "\n";
      return 0;
    }

    if (cmp_cmd->parsed()) {
      std::vector<chi::RunConfig> configs;
      for (const std::string& path : cmp_configs) configs.push_back(chi::load_config_file(path));
      std::vector<std::uint64_t> seeds_list;
      std::stringstream ss(cmp_seeds);
      std::string tok;
      while (std::getline(ss, tok, ',')) seeds_list.push_back(std::stoull(tok));
      if (cmp_out.empty()) cmp_out = (fs::path(output_root()) / "compare").string();
      const chi::CompareResult result =
          chi::compare(configs, seeds_list, cmp_out, cmp_jobs, threshold_frac);
      std::cout << chi::render_compare_table(result);
      std::cout << "summary: " << result.summary_path << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
