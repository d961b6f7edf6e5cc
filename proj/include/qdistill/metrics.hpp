#pragma once

#include <optional>
#include <vector>

namespace qdistill {

struct EpisodeRecord {
  int episode = 0;  // 1-based
  double score = 0.0;
  double epsilon = 0.0;
  double mean_loss = 0.0;
};

struct MetricsConfig {
  int window = 100;          // running-average window (growing below it)
  double avg_target = 300.0;
  double max_score = 500.0;
};

struct RunMetrics {
  std::optional<int> episodes_to_avg_target;   // first episode with windowed mean >= target
  double avg_score_at_end = 0.0;               // windowed mean at the final episode
  std::optional<int> first_episode_max_score;  // first episode scoring max_score
  double final_episode_score = 0.0;            // the last episode's own score
};

// Running average at episode k covers episodes max(1, k-window+1)..k.
std::vector<double> running_average(const std::vector<EpisodeRecord>& records, int window);

// Throws std::invalid_argument on an empty record list.
RunMetrics compute_metrics(const std::vector<EpisodeRecord>& records,
                           const MetricsConfig& config = {});

}  // namespace qdistill
