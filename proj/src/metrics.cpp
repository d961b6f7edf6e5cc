#include "qdistill/metrics.hpp"

#include <stdexcept>

namespace qdistill {

std::vector<double> running_average(const std::vector<EpisodeRecord>& records, int window) {
  std::vector<double> avgs(records.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < records.size(); ++k) {
    sum += records[k].score;
    if (k >= static_cast<std::size_t>(window)) {
      sum -= records[k - window].score;
    }
    const auto count = std::min<std::size_t>(k + 1, static_cast<std::size_t>(window));
    avgs[k] = sum / static_cast<double>(count);
  }
  return avgs;
}

RunMetrics compute_metrics(const std::vector<EpisodeRecord>& records,
                           const MetricsConfig& config) {
  if (records.empty()) {
    throw std::invalid_argument("compute_metrics: empty record list");
  }
  const std::vector<double> avgs = running_average(records, config.window);
  RunMetrics metrics;
  for (std::size_t k = 0; k < records.size(); ++k) {
    if (!metrics.episodes_to_avg_target && avgs[k] >= config.avg_target) {
      metrics.episodes_to_avg_target = records[k].episode;
    }
    if (!metrics.first_episode_max_score && records[k].score >= config.max_score) {
      metrics.first_episode_max_score = records[k].episode;
    }
  }
  metrics.avg_score_at_end = avgs.back();
  metrics.final_episode_score = records.back().score;
  return metrics;
}

}  // namespace qdistill
