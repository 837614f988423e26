#pragma once

#include <optional>
#include <string>
#include <vector>

namespace chi {

// One diagnostic record per episode. Optional fields are written as empty
// CSV cells and parse back as absent.
struct MetricsRow {
  int episode = 0;
  double train_return = 0.0;
  std::optional<double> eval_return;
  std::optional<double> amortised_sigma;
  std::optional<double> mean_step_kl;
  std::optional<double> ensemble_nll;
  std::optional<double> elbo;
};

std::string metrics_header();
std::string format_metrics_row(const MetricsRow& row);
MetricsRow parse_metrics_row(const std::string& line);
std::vector<MetricsRow> load_metrics_file(const std::string& path);

}  // namespace chi
