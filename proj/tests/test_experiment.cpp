#include <doctest.h>

#include <algorithm>
#include <filesystem>

#include "qdistill/checkpoint.hpp"
#include "qdistill/experiment.hpp"
#include "qdistill/io.hpp"
#include "qdistill/report.hpp"

using namespace qdistill;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "qdistill_exp_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ExperimentSpec small_spec(Algorithm algo, Mode mode, int episodes = 12) {
  ExperimentSpec spec;
  spec.algorithm = algo;
  spec.mode = mode;
  spec.agent = default_agent_config(algo, mode);
  spec.agent.hidden1 = 16;
  spec.agent.hidden2 = 16;
  spec.agent.batch_size = 8;
  spec.episodes = episodes;
  spec.seeds = {1};
  return spec;
}

}  // namespace

TEST_CASE("run_single writes the full artifact set") {
  const fs::path dir = fresh_dir("artifacts");
  const RunResult result = run_single(small_spec(Algorithm::Dqn, Mode::Teacher), 1, dir);
  CHECK_FALSE(result.diverged);
  CHECK(result.records.size() == 12);
  for (const char* name :
       {"config.json", "episodes.csv", "curve.csv", "metrics.json", "checkpoint.json"}) {
    CHECK(fs::exists(dir / name));
  }
  // episodes.csv: header + one row per episode
  const std::string csv = read_file(dir / "episodes.csv");
  CHECK(csv.starts_with("run_id,algorithm,mode,seed,episode,score,epsilon,mean_loss\n"));
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 13);
}

TEST_CASE("identical spec and seed reproduce byte-identical artifacts") {
  const fs::path a = fresh_dir("det_a");
  const fs::path b = fresh_dir("det_b");
  const ExperimentSpec spec = small_spec(Algorithm::Dueling, Mode::Student);
  run_single(spec, 9, a);
  run_single(spec, 9, b);
  for (const char* name : {"episodes.csv", "curve.csv", "metrics.json", "checkpoint.json"}) {
    CHECK(read_file(a / name) == read_file(b / name));
  }
}

TEST_CASE("teacher and student defaults follow the published layer sizes") {
  const AgentConfig teacher = default_agent_config(Algorithm::Dqn, Mode::Teacher);
  CHECK(teacher.hidden1 == 128);
  CHECK(teacher.hidden2 == 128);
  CHECK(teacher.architecture().parameter_count() == 17410);
  const AgentConfig student = default_agent_config(Algorithm::Dqn, Mode::Distilled);
  CHECK(student.hidden1 == 64);
  CHECK(student.architecture().parameter_count() == 4610);
}

TEST_CASE("distilled mode requires a teacher checkpoint and matching kind") {
  ExperimentSpec spec = small_spec(Algorithm::Dqn, Mode::Distilled);
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);

  // Wrong-kind checkpoint is rejected before any training happens.
  const fs::path dir = fresh_dir("mismatch");
  const Network dueling_net = make_network({NetKind::Dueling, 4, 8, 8, 2}, 0);
  save_checkpoint(dir / "teacher.json", dueling_net, 0, 0);
  spec.distill.teacher_checkpoint = (dir / "teacher.json").string();
  CHECK_THROWS_AS(run_single(spec, 1, dir / "run"), std::runtime_error);
}

TEST_CASE("distilled run trains against a saved teacher") {
  const fs::path dir = fresh_dir("distilled");
  const ExperimentSpec teacher_spec = small_spec(Algorithm::Dqn, Mode::Teacher, 6);
  run_single(teacher_spec, 2, dir / "teacher");

  ExperimentSpec spec = small_spec(Algorithm::Dqn, Mode::Distilled, 6);
  spec.distill.teacher_checkpoint = (dir / "teacher" / "checkpoint.json").string();
  const RunResult result = run_single(spec, 3, dir / "student");
  CHECK_FALSE(result.diverged);
  CHECK(result.records.size() == 6);
}

TEST_CASE("run_experiment creates one directory per seed") {
  const fs::path root = fresh_dir("per_seed");
  ExperimentSpec spec = small_spec(Algorithm::Ddqn, Mode::Student, 4);
  spec.seeds = {1, 2, 3};
  const auto results = run_experiment(spec, root);
  CHECK(results.size() == 3);
  CHECK(fs::exists(root / "ddqn_student_seed1" / "metrics.json"));
  CHECK(fs::exists(root / "ddqn_student_seed3" / "metrics.json"));
}

TEST_CASE("build_report aggregates runs and renders absent metrics as an em dash") {
  const fs::path root = fresh_dir("report");
  ExperimentSpec spec = small_spec(Algorithm::Dqn, Mode::Student, 8);
  spec.seeds = {1, 2};
  run_experiment(spec, root);

  const Report report = build_report(
      {root / "dqn_student_seed1", root / "dqn_student_seed2"});
  CHECK(report.runs.size() == 2);
  const ReportCell& cell = report.cells.at(Mode::Student).at(Algorithm::Dqn);
  CHECK(cell.n_seeds == 2);
  // 8 episodes of warm-up play cannot reach the thresholds
  CHECK_FALSE(cell.episodes_to_avg_300.has_value());

  const std::string text = render_report_text(report);
  CHECK(text.find("PERFORMANCE OF STUDENT MODELS") != std::string::npos);
  CHECK(text.find("—") != std::string::npos);
  CHECK(text.find("26.48%") != std::string::npos);

  // single seed: median equals that seed's value
  const Report single = build_report({root / "dqn_student_seed1"});
  CHECK(single.cells.at(Mode::Student).at(Algorithm::Dqn).avg_score_at_500 ==
        report.runs[0].avg_score_at_500);
}

TEST_CASE("report skips corrupt run directories with a warning") {
  const fs::path root = fresh_dir("corrupt");
  fs::create_directories(root / "broken");
  atomic_write_file(root / "broken" / "metrics.json", "{not json");
  ExperimentSpec spec = small_spec(Algorithm::Drqn, Mode::Student, 4);
  run_single(spec, 5, root / "ok");

  const Report report = build_report({root / "broken", root / "ok"});
  CHECK(report.runs.size() == 1);
  CHECK(report.warnings.size() == 1);
}

TEST_CASE("report generation is idempotent over persisted runs") {
  const fs::path root = fresh_dir("idempotent");
  run_single(small_spec(Algorithm::Dqn, Mode::Teacher, 5), 4, root / "run");
  const Report a = build_report({root / "run"});
  const Report b = build_report({root / "run"});
  CHECK(render_report_json(a) == render_report_json(b));
  CHECK(render_report_text(a) == render_report_text(b));
}

TEST_CASE("median helper") {
  CHECK(median({3.0}) == 3.0);
  CHECK(median({1.0, 2.0, 9.0}) == 2.0);
  CHECK(median({1.0, 2.0, 3.0, 4.0}) == 2.5);
}
