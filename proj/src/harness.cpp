#include "chi/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

namespace chi {

namespace fs = std::filesystem;

Streams make_streams(std::uint64_t seed) {
  return Streams{substream(seed, "env"), substream(seed, "policy"), substream(seed, "planner"),
                 substream(seed, "ensemble"), substream(seed, "buffer")};
}

double elbo_estimate(std::span<const double> rewards, std::span<const double> entropies) {
  double acc = 0.0;
  for (double r : rewards) acc += r;
  for (double h : entropies) acc += h;
  return acc;
}

namespace {

double mean_last_epoch_nll(const TrainReport& report) {
  double acc = 0.0;
  int count = 0;
  for (const auto& per_epoch : report.member_epoch_nll) {
    if (per_epoch.empty()) continue;
    acc += per_epoch.back();
    count += 1;
  }
  return count == 0 ? 0.0 : acc / count;
}

}  // namespace

RunResult run(const RunConfig& cfg) {
  if (cfg.out_dir.empty()) throw std::invalid_argument("run: out_dir must be set");
  if (cfg.episodes < 0) throw std::invalid_argument("run: episodes must be >= 0");
  cfg.plan.validate();

  fs::create_directories(cfg.out_dir);
  const std::string metrics_path = (fs::path(cfg.out_dir) / "metrics.csv").string();
  const std::string timings_path = (fs::path(cfg.out_dir) / "timings.csv").string();
  save_config_file((fs::path(cfg.out_dir) / "config.txt").string(), cfg);

  std::ofstream metrics(metrics_path, std::ios::trunc);
  if (!metrics) throw std::runtime_error("run: cannot write " + metrics_path);
  metrics << metrics_header() << "\n";
  metrics.flush();
  // Wall-clock timings live in a sidecar so the metrics file stays
  // byte-reproducible for identical configs and seeds.
  std::ofstream timings(timings_path, std::ios::trunc);
  timings << "episode,seconds\n";

  RunResult result;
  result.out_dir = cfg.out_dir;
  result.metrics_path = metrics_path;

  Streams streams = make_streams(cfg.seed);
  auto env = make_env(cfg.env, cfg.env_overrides());
  auto eval_env = make_env(cfg.env, cfg.env_overrides());
  Agent agent(env->spec(), cfg.agent_config(), env->reward_fn(), streams.policy,
              streams.ensemble);
  ReplayBuffer buffer(cfg.buffer_capacity);

  try {
    for (int episode = 1; episode <= cfg.episodes; ++episode) {
      const auto t0 = std::chrono::steady_clock::now();
      const std::uint64_t reset_seed = streams.env.next_u64();
      EpisodeResult ep = run_episode(agent, *env, &buffer, /*training=*/true, reset_seed,
                                     streams.planner, streams.policy, streams.buffer);

      MetricsRow row;
      row.episode = episode;
      row.train_return = ep.total_reward;
      row.mean_step_kl = ep.mean_step_kl;
      if (ep.mean_amortised_sigma) row.amortised_sigma = ep.mean_amortised_sigma;
      if (!ep.policy_entropies.empty())
        row.elbo = elbo_estimate(ep.rewards, ep.policy_entropies);

      if (agent.has_model()) {
        const auto real = buffer.real_transitions();
        const TrainReport report = agent.ensemble().train(real, streams.ensemble);
        if (report.epochs > 0) row.ensemble_nll = mean_last_epoch_nll(report);
      }

      if (cfg.eval_every > 0 && episode % cfg.eval_every == 0) {
        const std::uint64_t eval_seed = streams.env.next_u64();
        EpisodeResult eval = run_episode(agent, *eval_env, nullptr, /*training=*/false, eval_seed,
                                         streams.planner, streams.policy, streams.buffer);
        row.eval_return = eval.total_reward;
      }

      result.rows.push_back(row);
      metrics << format_metrics_row(row) << "\n";
      metrics.flush();
      const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
      timings << episode << ',' << format_double(dt.count()) << "\n";
      timings.flush();
      std::cout << "[" << cfg.agent << "/" << cfg.env << " seed=" << cfg.seed << "] episode "
                << episode << " return=" << format_double(ep.total_reward);
      if (row.eval_return) std::cout << " eval=" << format_double(*row.eval_return);
      std::cout << std::endl;
    }

    // Final checkpoints.
    if (agent.has_policy())
      agent.sac().save((fs::path(cfg.out_dir) / "policy.ckpt").string(),
                       (fs::path(cfg.out_dir) / "critics.ckpt").string());
    if (agent.has_model())
      agent.ensemble().save((fs::path(cfg.out_dir) / "ensemble.ckpt").string());
  } catch (const std::exception& e) {
    result.failed = true;
    result.failure = e.what();
    std::ofstream fail((fs::path(cfg.out_dir) / "failure.txt").string(), std::ios::trunc);
    fail << e.what() << "\n";
    metrics.flush();
  }
  return result;
}

namespace {

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

}  // namespace

CompareResult compare(const std::vector<RunConfig>& configs,
                      const std::vector<std::uint64_t>& seeds, const std::string& out_dir,
                      int jobs, double threshold_frac) {
  if (configs.empty()) throw std::invalid_argument("compare: need at least one config");
  if (seeds.empty()) throw std::invalid_argument("compare: need at least one seed");
  fs::create_directories(out_dir);

  struct Job {
    RunConfig cfg;
    std::string label;
    std::uint64_t seed;
    RunResult result;
  };
  std::vector<Job> jobs_list;
  for (const RunConfig& base : configs) {
    const std::string label = base.agent + "-" + base.env;
    for (std::uint64_t seed : seeds) {
      Job j;
      j.cfg = base;
      j.cfg.seed = seed;
      j.cfg.out_dir = (fs::path(out_dir) / (label + "-seed" + std::to_string(seed))).string();
      j.label = label;
      j.seed = seed;
      jobs_list.push_back(std::move(j));
    }
  }

  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(jobs_list.size())));
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs_list.size()) return;
      jobs_list[i].result = run(jobs_list[i].cfg);
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  // Group evaluation returns by label and eval episode.
  CompareResult result;
  for (const RunConfig& base : configs) {
    const std::string label = base.agent + "-" + base.env;
    if (std::any_of(result.entries.begin(), result.entries.end(),
                    [&](const CompareEntry& e) { return e.label == label; }))
      continue;
    CompareEntry entry;
    entry.label = label;
    std::map<int, std::vector<double>> by_episode;
    for (const Job& j : jobs_list) {
      if (j.label != label) continue;
      if (j.result.failed) {
        entry.missing.push_back(label + "-seed" + std::to_string(j.seed) + ": " +
                                j.result.failure);
        continue;
      }
      for (const MetricsRow& row : j.result.rows)
        if (row.eval_return) by_episode[row.episode].push_back(*row.eval_return);
    }
    for (const auto& [episode, values] : by_episode) {
      CompareCurvePoint p;
      p.episode = episode;
      p.median = quantile(values, 0.5);
      p.q25 = quantile(values, 0.25);
      p.q75 = quantile(values, 0.75);
      entry.curve.push_back(p);
    }
    if (!entry.curve.empty()) entry.final_median = entry.curve.back().median;
    result.entries.push_back(std::move(entry));
  }

  double best_final = 0.0;
  bool have_final = false;
  for (const CompareEntry& e : result.entries) {
    if (e.curve.empty()) continue;
    best_final = have_final ? std::max(best_final, e.final_median) : e.final_median;
    have_final = true;
  }
  result.threshold = threshold_frac * best_final;
  for (CompareEntry& e : result.entries) {
    e.episodes_to_threshold = -1;
    for (const CompareCurvePoint& p : e.curve) {
      if (p.median >= result.threshold) {
        e.episodes_to_threshold = p.episode;
        break;
      }
    }
  }

  const std::string summary_path = (fs::path(out_dir) / "summary.csv").string();
  std::ofstream os(summary_path, std::ios::trunc);
  os << "label,episode,median,q25,q75\n";
  for (const CompareEntry& e : result.entries)
    for (const CompareCurvePoint& p : e.curve)
      os << e.label << ',' << p.episode << ',' << format_double(p.median) << ','
         << format_double(p.q25) << ',' << format_double(p.q75) << "\n";
  result.summary_path = summary_path;

  std::ofstream table((fs::path(out_dir) / "table.txt").string(), std::ios::trunc);
  table << render_compare_table(result);
  return result;
}

std::string render_compare_table(const CompareResult& result) {
  std::ostringstream os;
  os << "threshold (eval return): " << format_double(result.threshold) << "\n";
  os << "label              final_median  episodes_to_threshold\n";
  for (const CompareEntry& e : result.entries) {
    os << e.label;
    for (std::size_t i = e.label.size(); i < 19; ++i) os << ' ';
    os << format_double(e.final_median) << "  ";
    if (e.episodes_to_threshold < 0) {
      os << "never";
    } else {
      os << e.episodes_to_threshold;
    }
    os << "\n";
    for (const std::string& m : e.missing) os << "  missing: " << m << "\n";
  }
  return os.str();
}

}  // namespace chi
