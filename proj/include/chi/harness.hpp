#pragma once

#include <span>
#include <string>
#include <vector>

#include "chi/agent.hpp"
#include "chi/config.hpp"
#include "chi/metrics.hpp"
#include "chi/rng.hpp"

namespace chi {

// Named substreams derived from the single run seed; no other entropy enters
// a run.
struct Streams {
  RandomStream env;
  RandomStream policy;
  RandomStream planner;
  RandomStream ensemble;
  RandomStream buffer;
};

Streams make_streams(std::uint64_t seed);

// Variational-bound diagnostic: cumulative reward plus the per-step policy
// entropies recorded along the trajectory.
double elbo_estimate(std::span<const double> rewards, std::span<const double> entropies);

struct RunResult {
  std::vector<MetricsRow> rows;
  std::string out_dir;
  std::string metrics_path;
  bool failed = false;
  std::string failure;
};

// Executes a full experiment: per-episode dynamics training, per-step SAC
// updates, interleaved evaluation episodes, metrics and checkpoints written
// under cfg.out_dir. Throws on configuration errors; mid-run component
// failures flush partial metrics and a failure record first.
RunResult run(const RunConfig& cfg);

struct CompareCurvePoint {
  int episode = 0;
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
};

struct CompareEntry {
  std::string label;
  std::vector<CompareCurvePoint> curve;  // evaluation-return quartiles per eval episode
  double final_median = 0.0;
  int episodes_to_threshold = -1;  // -1: never reached
  std::vector<std::string> missing;  // failed runs, reported not fabricated
};

struct CompareResult {
  std::vector<CompareEntry> entries;
  double threshold = 0.0;
  std::string summary_path;
};

// Runs every (config, seed) pair, then tabulates median and interquartile
// evaluation-return curves and the episodes-to-threshold statistic, where the
// threshold is threshold_frac times the best final median across configs.
CompareResult compare(const std::vector<RunConfig>& configs,
                      const std::vector<std::uint64_t>& seeds, const std::string& out_dir,
                      int jobs, double threshold_frac);

std::string render_compare_table(const CompareResult& result);

}  // namespace chi
