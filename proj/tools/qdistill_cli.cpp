#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "qdistill/checkpoint.hpp"
#include "qdistill/experiment.hpp"
#include "qdistill/io.hpp"
#include "qdistill/report.hpp"

namespace fs = std::filesystem;
using namespace qdistill;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitDivergence = 2;

struct CliOptions {
  std::string algo = "dqn";
  std::string mode = "teacher";
  std::vector<std::uint64_t> seed_list;
  std::string seeds_range;  // "N..M"
  int episodes = 500;
  std::string config_path;
  std::string teacher_ckpt;
  double alpha = 0.5;
  double temperature = 5.0;
  std::string out_dir;
};

fs::path default_out_root() {
  if (const char* env = std::getenv("QDISTILL_OUT")) {
    return env;
  }
  return "runs";
}

std::vector<std::uint64_t> resolve_seeds(const CliOptions& opts) {
  if (!opts.seeds_range.empty()) {
    const auto dots = opts.seeds_range.find("..");
    if (dots == std::string::npos) {
      throw std::invalid_argument("--seeds expects the form N..M");
    }
    const std::uint64_t lo = std::stoull(opts.seeds_range.substr(0, dots));
    const std::uint64_t hi = std::stoull(opts.seeds_range.substr(dots + 2));
    if (hi < lo) {
      throw std::invalid_argument("--seeds range is empty");
    }
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t s = lo; s <= hi; ++s) {
      seeds.push_back(s);
    }
    return seeds;
  }
  if (!opts.seed_list.empty()) {
    return opts.seed_list;
  }
  return {1};
}

// Config file: JSON object or key=value lines; '#' starts a comment.
void apply_config_entry(ExperimentSpec& spec, const std::string& key,
                        const nlohmann::json& value) {
  auto as_double = [&] { return value.is_string()
                                    ? std::stod(value.get<std::string>())
                                    : value.get<double>(); };
  auto as_int = [&] { return value.is_string() ? std::stoi(value.get<std::string>())
                                               : value.get<int>(); };
  auto as_string = [&] { return value.get<std::string>(); };

  if (key == "gamma") spec.agent.gamma = as_double();
  else if (key == "epsilon_start") spec.agent.epsilon.start = as_double();
  else if (key == "epsilon_end") spec.agent.epsilon.end = as_double();
  else if (key == "epsilon_decay") spec.agent.epsilon.decay = as_double();
  else if (key == "batch_size") spec.agent.batch_size = as_int();
  else if (key == "buffer_capacity") spec.agent.buffer_capacity = as_int();
  else if (key == "target_sync_interval") spec.agent.target_sync_interval = as_int();
  else if (key == "sequence_length") spec.agent.sequence_length = as_int();
  else if (key == "learning_rate") spec.agent.learning_rate = as_double();
  else if (key == "hidden1") spec.agent.hidden1 = as_int();
  else if (key == "hidden2") spec.agent.hidden2 = as_int();
  else if (key == "episodes") spec.episodes = as_int();
  else if (key == "metrics_window") spec.metrics.window = as_int();
  else if (key == "alpha") spec.distill.alpha = as_double();
  else if (key == "temperature") spec.distill.temperature = as_double();
  else if (key == "td_loss") {
    const std::string name = as_string();
    if (name == "huber") spec.agent.td_loss = TdLossKind::Huber;
    else if (name == "squared") spec.agent.td_loss = TdLossKind::Squared;
    else throw std::invalid_argument("config key 'td_loss' must be huber or squared");
  } else {
    throw std::invalid_argument("unknown config key '" + key + "'");
  }
}

void load_config_file(ExperimentSpec& spec, const std::string& path) {
  const std::string text = read_file(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    const auto doc = nlohmann::json::parse(text);
    for (const auto& [key, value] : doc.items()) {
      apply_config_entry(spec, key, value);
    }
    return;
  }
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      line.resize(hash);
    }
    const auto begin = line.find_first_not_of(" \t\r");
    if (begin == std::string::npos) {
      continue;
    }
    const auto end = line.find_last_not_of(" \t\r");
    line = line.substr(begin, end - begin + 1);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line is not key=value: '" + line + "'");
    }
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    apply_config_entry(spec, key, nlohmann::json(value));
  }
}

ExperimentSpec build_spec(const CliOptions& opts, Mode mode) {
  ExperimentSpec spec;
  spec.algorithm = algorithm_from_name(opts.algo);
  spec.mode = mode;
  spec.agent = default_agent_config(spec.algorithm, mode);
  spec.seeds = resolve_seeds(opts);
  spec.episodes = opts.episodes;
  spec.distill.alpha = opts.alpha;
  spec.distill.temperature = opts.temperature;
  spec.distill.teacher_checkpoint = opts.teacher_ckpt;
  if (!opts.config_path.empty()) {
    load_config_file(spec, opts.config_path);
  }
  return spec;
}

int run_spec(const ExperimentSpec& spec, const CliOptions& opts) {
  const fs::path out_root = opts.out_dir.empty() ? default_out_root() : fs::path(opts.out_dir);
  const auto results = run_experiment(spec, out_root);
  bool any_diverged = false;
  for (const auto& result : results) {
    std::cout << run_id(spec, result.seed) << ": ";
    if (result.diverged) {
      std::cout << "DIVERGED after " << result.records.size() << " episodes ("
                << result.divergence_message << ")\n";
      any_diverged = true;
      continue;
    }
    std::cout << "avg_score_at_500=" << result.metrics.avg_score_at_end;
    if (result.metrics.episodes_to_avg_target) {
      std::cout << " episodes_to_avg_300=" << *result.metrics.episodes_to_avg_target;
    }
    if (result.metrics.first_episode_max_score) {
      std::cout << " first_score_500=" << *result.metrics.first_episode_max_score;
    }
    std::cout << " -> " << result.run_dir.string() << "\n";
  }
  return any_diverged ? kExitDivergence : kExitOk;
}

int cmd_eval(const std::string& ckpt_path, const std::string& algo, int episodes,
             std::uint64_t seed) {
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  AgentConfig config;
  config.algorithm = algorithm_from_name(algo);
  if (kind_for(config.algorithm) != ckpt.net.arch.kind) {
    throw std::runtime_error("checkpoint kind '" + kind_name(ckpt.net.arch.kind) +
                             "' does not match --algo " + algo);
  }
  config.hidden1 = ckpt.net.arch.hidden1;
  config.hidden2 = ckpt.net.arch.hidden2;
  Agent agent(config, seed);
  agent.online_mutable() = ckpt.net;

  CartPole env;
  double total = 0.0;
  Rng rng(seed);
  for (int ep = 0; ep < episodes; ++ep) {
    const double score = agent.run_greedy_episode(env, rng.next_u64());
    std::cout << "episode " << ep + 1 << ": score=" << score << "\n";
    total += score;
  }
  std::cout << "mean_score=" << total / episodes << " over " << episodes << " episodes\n";
  return kExitOk;
}

int cmd_report(const std::vector<std::string>& run_dirs, const std::string& out_dir) {
  if (run_dirs.empty()) {
    std::cerr << "report: at least one run directory is required\n";
    return kExitUsage;
  }
  std::vector<fs::path> paths(run_dirs.begin(), run_dirs.end());
  const Report report = build_report(paths);
  const std::string text = render_report_text(report);
  std::cout << text;
  const fs::path out = out_dir.empty() ? fs::path(".") : fs::path(out_dir);
  fs::create_directories(out);
  atomic_write_file(out / "report.txt", text);
  atomic_write_file(out / "report.json", render_report_json(report));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CartPole Q-learning benchmark with teacher-student distillation"};
  app.require_subcommand(1);

  CliOptions opts;
  std::string eval_ckpt;
  std::uint64_t eval_seed = 1;
  int eval_episodes = 10;
  std::vector<std::string> report_dirs;
  std::string report_out;

  auto add_common = [&](CLI::App* cmd, bool with_mode) {
    cmd->add_option("--algo", opts.algo, "Algorithm: dqn, ddqn, drqn, dueling");
    if (with_mode) {
      cmd->add_option("--mode", opts.mode, "teacher or student");
    }
    cmd->add_option("--seed", opts.seed_list, "Seed (repeatable)");
    cmd->add_option("--seeds", opts.seeds_range, "Seed range N..M");
    cmd->add_option("--episodes", opts.episodes, "Episode budget");
    cmd->add_option("--config", opts.config_path, "Config file (JSON or key=value)");
    cmd->add_option("--out", opts.out_dir, "Output root directory");
  };

  CLI::App* train = app.add_subcommand("train", "Train a teacher or scratch student");
  add_common(train, true);

  CLI::App* distill = app.add_subcommand("distill", "Train a student against a frozen teacher");
  add_common(distill, false);
  distill->add_option("--teacher-ckpt", opts.teacher_ckpt, "Teacher checkpoint path")
      ->required();
  distill->add_option("--alpha", opts.alpha, "Weight on the student's own TD loss");
  distill->add_option("--temperature", opts.temperature, "Softening temperature");

  CLI::App* eval = app.add_subcommand("eval", "Greedy rollouts from a checkpoint");
  eval->add_option("--ckpt", eval_ckpt, "Checkpoint path")->required();
  eval->add_option("--algo", opts.algo, "Algorithm the checkpoint belongs to");
  eval->add_option("--episodes", eval_episodes, "Number of rollouts");
  eval->add_option("--seed", eval_seed, "Evaluation seed");

  CLI::App* report = app.add_subcommand("report", "Aggregate run directories into tables");
  report->add_option("dirs", report_dirs, "Run directories");
  report->add_option("--out", report_out, "Directory for report.txt/report.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (train->parsed()) {
      const Mode mode = mode_from_name(opts.mode);
      if (mode == Mode::Distilled) {
        throw std::invalid_argument("use the distill subcommand for distilled runs");
      }
      return run_spec(build_spec(opts, mode), opts);
    }
    if (distill->parsed()) {
      return run_spec(build_spec(opts, Mode::Distilled), opts);
    }
    if (eval->parsed()) {
      return cmd_eval(eval_ckpt, opts.algo, eval_episodes, eval_seed);
    }
    if (report->parsed()) {
      return cmd_report(report_dirs, report_out);
    }
  } catch (const TrainingDivergence& e) {
    std::cerr << "training diverged: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
