#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qdistill/experiment.hpp"

namespace qdistill {

struct RunSummary {
  std::string run_id;
  Algorithm algorithm = Algorithm::Dqn;
  Mode mode = Mode::Teacher;
  std::uint64_t seed = 0;
  bool diverged = false;
  std::optional<int> episodes_to_avg_300;
  double avg_score_at_500 = 0.0;
  std::optional<int> first_episode_score_500;
  int metrics_window = 100;
};

// Median across seeds; for episode-count metrics an absent value counts as
// worst, so the median is absent when at least half the seeds never got there.
struct ReportCell {
  int n_seeds = 0;
  std::optional<double> episodes_to_avg_300;
  std::optional<double> avg_score_at_500;
  std::optional<double> first_episode_score_500;
};

struct Report {
  // [mode][algorithm]
  std::map<Mode, std::map<Algorithm, ReportCell>> cells;
  std::vector<RunSummary> runs;
  std::vector<std::string> warnings;
};

// Reads metrics.json from each run directory; corrupt or incomplete
// directories are skipped with a warning.
Report build_report(const std::vector<std::filesystem::path>& run_dirs);

std::string render_report_text(const Report& report);
std::string render_report_json(const Report& report);

// Parameter accounting for the 128/128 teacher vs 64/64 student pairs.
std::string compression_table_text();

double median(std::vector<double> values);

}  // namespace qdistill
