#include "chi/metrics.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "chi/config.hpp"

namespace chi {

std::string metrics_header() {
  return "episode,train_return,eval_return,amortised_sigma,mean_step_kl,ensemble_nll,elbo";
}

namespace {

std::string cell(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

std::optional<double> parse_cell(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return std::stod(s);
}

}  // namespace

std::string format_metrics_row(const MetricsRow& row) {
  std::ostringstream os;
  os << row.episode << ',' << format_double(row.train_return) << ',' << cell(row.eval_return)
     << ',' << cell(row.amortised_sigma) << ',' << cell(row.mean_step_kl) << ','
     << cell(row.ensemble_nll) << ',' << cell(row.elbo);
  return os.str();
}

MetricsRow parse_metrics_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  cells.push_back(cur);
  if (cells.size() != 7) throw std::runtime_error("metrics row has wrong number of cells: " + line);
  MetricsRow row;
  row.episode = std::stoi(cells[0]);
  row.train_return = std::stod(cells[1]);
  row.eval_return = parse_cell(cells[2]);
  row.amortised_sigma = parse_cell(cells[3]);
  row.mean_step_kl = parse_cell(cells[4]);
  row.ensemble_nll = parse_cell(cells[5]);
  row.elbo = parse_cell(cells[6]);
  return row;
}

std::vector<MetricsRow> load_metrics_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open metrics file: " + path);
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("metrics file empty: " + path);
  if (line != metrics_header()) throw std::runtime_error("metrics header mismatch in " + path);
  std::vector<MetricsRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    rows.push_back(parse_metrics_row(line));
  }
  return rows;
}

}  // namespace chi
