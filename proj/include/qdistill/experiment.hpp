#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "qdistill/agent.hpp"
#include "qdistill/distill.hpp"
#include "qdistill/metrics.hpp"

namespace qdistill {

enum class Mode { Teacher, Student, Distilled };

std::string mode_name(Mode mode);
Mode mode_from_name(const std::string& name);

// Teacher nets are 4-128-128-2, students (scratch or distilled) 4-64-64-2.
AgentConfig default_agent_config(Algorithm algorithm, Mode mode);

struct ExperimentSpec {
  Algorithm algorithm = Algorithm::Dqn;
  Mode mode = Mode::Teacher;
  std::vector<std::uint64_t> seeds = {1};
  int episodes = 500;
  AgentConfig agent = default_agent_config(Algorithm::Dqn, Mode::Teacher);
  DistillConfig distill;  // Distilled mode only
  MetricsConfig metrics;

  void validate() const;
};

struct RunResult {
  std::uint64_t seed = 0;
  bool diverged = false;
  std::string divergence_message;
  std::vector<EpisodeRecord> records;
  RunMetrics metrics;
  std::filesystem::path run_dir;
};

std::string run_id(const ExperimentSpec& spec, std::uint64_t seed);

// Trains one seed to the episode budget and writes the run artifacts
// (config.json, episodes.csv, curve.csv, metrics.json, checkpoint.json) into
// run_dir. Divergence is recorded in the result, not thrown.
RunResult run_single(const ExperimentSpec& spec, std::uint64_t seed,
                     const std::filesystem::path& run_dir);

// One run directory per seed under out_root, named by run_id.
std::vector<RunResult> run_experiment(const ExperimentSpec& spec,
                                      const std::filesystem::path& out_root);

std::string episodes_csv(const ExperimentSpec& spec, std::uint64_t seed,
                         const std::vector<EpisodeRecord>& records);
std::string curve_csv(const std::vector<EpisodeRecord>& records, int window);
std::string effective_config_json(const ExperimentSpec& spec, std::uint64_t seed);
std::string metrics_json(const ExperimentSpec& spec, const RunResult& result);

}  // namespace qdistill
