#include "qdistill/experiment.hpp"

#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>

#include "qdistill/checkpoint.hpp"
#include "qdistill/io.hpp"

namespace qdistill {
namespace {

using OrderedJson = nlohmann::ordered_json;

std::string td_loss_name(TdLossKind kind) {
  return kind == TdLossKind::Huber ? "huber" : "squared";
}

}  // namespace

std::string mode_name(Mode mode) {
  switch (mode) {
    case Mode::Teacher: return "teacher";
    case Mode::Student: return "student";
    case Mode::Distilled: return "distilled";
  }
  throw std::logic_error("unknown mode");
}

Mode mode_from_name(const std::string& name) {
  if (name == "teacher") return Mode::Teacher;
  if (name == "student") return Mode::Student;
  if (name == "distilled") return Mode::Distilled;
  throw std::invalid_argument("unknown mode: " + name);
}

AgentConfig default_agent_config(Algorithm algorithm, Mode mode) {
  AgentConfig config;
  config.algorithm = algorithm;
  const int width = mode == Mode::Teacher ? 128 : 64;
  config.hidden1 = width;
  config.hidden2 = width;
  return config;
}

void ExperimentSpec::validate() const {
  agent.validate();
  if (seeds.empty()) {
    throw std::invalid_argument("seeds must not be empty");
  }
  if (episodes < 1) {
    throw std::invalid_argument("episodes must be >= 1");
  }
  if (mode == Mode::Distilled) {
    distill.validate();
    if (distill.teacher_checkpoint.empty()) {
      throw std::invalid_argument("distilled mode requires teacher_checkpoint");
    }
  }
}

std::string run_id(const ExperimentSpec& spec, std::uint64_t seed) {
  return algorithm_name(spec.algorithm) + "_" + mode_name(spec.mode) + "_seed" +
         std::to_string(seed);
}

std::string episodes_csv(const ExperimentSpec& spec, std::uint64_t seed,
                         const std::vector<EpisodeRecord>& records) {
  std::ostringstream out;
  out << "run_id,algorithm,mode,seed,episode,score,epsilon,mean_loss\n";
  const std::string id = run_id(spec, seed);
  for (const auto& r : records) {
    out << id << ',' << algorithm_name(spec.algorithm) << ',' << mode_name(spec.mode)
        << ',' << seed << ',' << r.episode << ',' << format_double(r.score) << ','
        << format_double(r.epsilon) << ',' << format_double(r.mean_loss) << '\n';
  }
  return out.str();
}

std::string curve_csv(const std::vector<EpisodeRecord>& records, int window) {
  const std::vector<double> avgs = running_average(records, window);
  std::ostringstream out;
  out << "episode,score,running_avg\n";
  for (std::size_t k = 0; k < records.size(); ++k) {
    out << records[k].episode << ',' << format_double(records[k].score) << ','
        << format_double(avgs[k]) << '\n';
  }
  return out.str();
}

std::string effective_config_json(const ExperimentSpec& spec, std::uint64_t seed) {
  OrderedJson doc;
  doc["run_id"] = run_id(spec, seed);
  doc["algorithm"] = algorithm_name(spec.algorithm);
  doc["mode"] = mode_name(spec.mode);
  doc["seed"] = seed;
  doc["episodes"] = spec.episodes;
  OrderedJson agent;
  agent["hidden1"] = spec.agent.hidden1;
  agent["hidden2"] = spec.agent.hidden2;
  agent["gamma"] = spec.agent.gamma;
  agent["epsilon_start"] = spec.agent.epsilon.start;
  agent["epsilon_end"] = spec.agent.epsilon.end;
  agent["epsilon_decay"] = spec.agent.epsilon.decay;
  agent["batch_size"] = spec.agent.batch_size;
  agent["buffer_capacity"] = spec.agent.buffer_capacity;
  agent["target_sync_interval"] = spec.agent.target_sync_interval;
  agent["sequence_length"] = spec.agent.sequence_length;
  agent["learning_rate"] = spec.agent.learning_rate;
  agent["td_loss"] = td_loss_name(spec.agent.td_loss);
  doc["agent"] = std::move(agent);
  if (spec.mode == Mode::Distilled) {
    OrderedJson distill;
    distill["temperature"] = spec.distill.temperature;
    distill["alpha"] = spec.distill.alpha;
    distill["teacher_checkpoint"] = spec.distill.teacher_checkpoint;
    doc["distill"] = std::move(distill);
  }
  doc["metrics_window"] = spec.metrics.window;
  doc["parameter_count"] = spec.agent.architecture().parameter_count();
  return doc.dump(2) + "\n";
}

std::string metrics_json(const ExperimentSpec& spec, const RunResult& result) {
  OrderedJson doc;
  doc["run_id"] = run_id(spec, result.seed);
  doc["algorithm"] = algorithm_name(spec.algorithm);
  doc["mode"] = mode_name(spec.mode);
  doc["seed"] = result.seed;
  doc["diverged"] = result.diverged;
  if (result.diverged) {
    doc["divergence_message"] = result.divergence_message;
  }
  doc["episodes_completed"] = result.records.size();
  if (result.metrics.episodes_to_avg_target) {
    doc["episodes_to_avg_300"] = *result.metrics.episodes_to_avg_target;
  } else {
    doc["episodes_to_avg_300"] = nullptr;
  }
  doc["avg_score_at_500"] = result.metrics.avg_score_at_end;
  if (result.metrics.first_episode_max_score) {
    doc["first_episode_score_500"] = *result.metrics.first_episode_max_score;
  } else {
    doc["first_episode_score_500"] = nullptr;
  }
  doc["final_episode_score"] = result.metrics.final_episode_score;
  doc["metrics_window"] = spec.metrics.window;
  doc["parameter_count"] = spec.agent.architecture().parameter_count();
  return doc.dump(2) + "\n";
}

RunResult run_single(const ExperimentSpec& spec, std::uint64_t seed,
                     const std::filesystem::path& run_dir) {
  spec.validate();
  std::filesystem::create_directories(run_dir);

  RunResult result;
  result.seed = seed;
  result.run_dir = run_dir;
  atomic_write_file(run_dir / "config.json", effective_config_json(spec, seed));

  Agent agent(spec.agent, seed);
  std::optional<TeacherHandle> teacher;
  if (spec.mode == Mode::Distilled) {
    teacher = TeacherHandle::load(spec.distill.teacher_checkpoint, spec.algorithm);
  }
  CartPole env;
  for (int ep = 0; ep < spec.episodes; ++ep) {
    try {
      const Agent::EpisodeOutcome outcome =
          teacher ? distill_train_episode(agent, *teacher, env, spec.distill)
                  : agent.train_episode(env);
      result.records.push_back({ep + 1, outcome.score, outcome.epsilon, outcome.mean_loss});
    } catch (const TrainingDivergence& e) {
      result.diverged = true;
      result.divergence_message = e.what();
      break;
    }
  }
  if (!result.records.empty()) {
    result.metrics = compute_metrics(result.records, spec.metrics);
  }

  atomic_write_file(run_dir / "episodes.csv", episodes_csv(spec, seed, result.records));
  atomic_write_file(run_dir / "curve.csv", curve_csv(result.records, spec.metrics.window));
  atomic_write_file(run_dir / "metrics.json", metrics_json(spec, result));
  save_checkpoint(run_dir / "checkpoint.json", agent.online(), seed,
                  static_cast<int>(result.records.size()));
  return result;
}

std::vector<RunResult> run_experiment(const ExperimentSpec& spec,
                                      const std::filesystem::path& out_root) {
  spec.validate();
  std::vector<RunResult> results;
  results.reserve(spec.seeds.size());
  for (const std::uint64_t seed : spec.seeds) {
    results.push_back(run_single(spec, seed, out_root / run_id(spec, seed)));
  }
  return results;
}

}  // namespace qdistill
