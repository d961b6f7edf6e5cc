#include "qdistill/report.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <nlohmann/json.hpp>
#include <sstream>

#include "qdistill/io.hpp"

namespace qdistill {
namespace {

using OrderedJson = nlohmann::ordered_json;

constexpr Algorithm kAlgorithms[] = {Algorithm::Dqn, Algorithm::Drqn, Algorithm::Ddqn,
                                     Algorithm::Dueling};
constexpr Mode kModes[] = {Mode::Teacher, Mode::Student, Mode::Distilled};

const char* table_title(Mode mode) {
  switch (mode) {
    case Mode::Teacher: return "PERFORMANCE OF TEACHER MODELS";
    case Mode::Student: return "PERFORMANCE OF STUDENT MODELS";
    case Mode::Distilled: return "PERFORMANCE OF DISTILLED MODELS";
  }
  return "";
}

// Median where absent = worst possible (never reached).
std::optional<double> median_with_absent(std::vector<std::optional<int>> values) {
  if (values.empty()) {
    return std::nullopt;
  }
  std::vector<double> v;
  v.reserve(values.size());
  for (const auto& x : values) {
    v.push_back(x ? static_cast<double>(*x) : std::numeric_limits<double>::infinity());
  }
  const double m = median(std::move(v));
  if (std::isinf(m)) {
    return std::nullopt;
  }
  return m;
}

std::string cell_text(const std::optional<double>& value) {
  if (!value) {
    return "—";  // em dash for "never reached"
  }
  std::ostringstream out;
  if (*value == std::floor(*value)) {
    out << static_cast<long long>(*value);
  } else {
    out << std::fixed << std::setprecision(1) << *value;
  }
  return out.str();
}

}  // namespace

double median(std::vector<double> values) {
  if (values.empty()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) {
    return values[n / 2];
  }
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

Report build_report(const std::vector<std::filesystem::path>& run_dirs) {
  Report report;
  for (const auto& dir : run_dirs) {
    const auto metrics_path = dir / "metrics.json";
    try {
      const OrderedJson doc = OrderedJson::parse(read_file(metrics_path));
      RunSummary summary;
      summary.run_id = doc.at("run_id").get<std::string>();
      summary.algorithm = algorithm_from_name(doc.at("algorithm").get<std::string>());
      summary.mode = mode_from_name(doc.at("mode").get<std::string>());
      summary.seed = doc.at("seed").get<std::uint64_t>();
      summary.diverged = doc.at("diverged").get<bool>();
      if (!doc.at("episodes_to_avg_300").is_null()) {
        summary.episodes_to_avg_300 = doc.at("episodes_to_avg_300").get<int>();
      }
      summary.avg_score_at_500 = doc.at("avg_score_at_500").get<double>();
      if (!doc.at("first_episode_score_500").is_null()) {
        summary.first_episode_score_500 = doc.at("first_episode_score_500").get<int>();
      }
      summary.metrics_window = doc.at("metrics_window").get<int>();
      report.runs.push_back(std::move(summary));
    } catch (const std::exception& e) {
      report.warnings.push_back("skipping " + dir.string() + ": " + e.what());
    }
  }

  for (const Mode mode : kModes) {
    for (const Algorithm algo : kAlgorithms) {
      std::vector<std::optional<int>> to_avg, to_max;
      std::vector<double> avg_scores;
      for (const auto& run : report.runs) {
        if (run.mode != mode || run.algorithm != algo || run.diverged) {
          continue;
        }
        to_avg.push_back(run.episodes_to_avg_300);
        to_max.push_back(run.first_episode_score_500);
        avg_scores.push_back(run.avg_score_at_500);
      }
      if (avg_scores.empty()) {
        continue;
      }
      ReportCell cell;
      cell.n_seeds = static_cast<int>(avg_scores.size());
      cell.episodes_to_avg_300 = median_with_absent(std::move(to_avg));
      cell.first_episode_score_500 = median_with_absent(std::move(to_max));
      cell.avg_score_at_500 = median(std::move(avg_scores));
      report.cells[mode][algo] = cell;
    }
  }
  return report;
}

std::string render_report_text(const Report& report) {
  std::ostringstream out;
  for (const Mode mode : kModes) {
    out << table_title(mode) << "\n";
    out << std::left << std::setw(30) << "Indicators";
    for (const Algorithm algo : kAlgorithms) {
      out << std::setw(14) << algorithm_name(algo);
    }
    out << "\n";
    const auto mode_it = report.cells.find(mode);
    auto row = [&](const char* label, auto getter) {
      out << std::left << std::setw(30) << label;
      for (const Algorithm algo : kAlgorithms) {
        std::string text = "n/a";
        if (mode_it != report.cells.end()) {
          const auto it = mode_it->second.find(algo);
          if (it != mode_it->second.end()) {
            text = cell_text(getter(it->second));
          }
        }
        out << std::setw(14) << text;
      }
      out << "\n";
    };
    row("episode_num (Avg score=300)",
        [](const ReportCell& c) { return c.episodes_to_avg_300; });
    row("Average score (500 episodes)",
        [](const ReportCell& c) { return c.avg_score_at_500; });
    row("episode_num (Score=500)",
        [](const ReportCell& c) { return c.first_episode_score_500; });
    out << "\n";
  }
  out << compression_table_text();
  if (!report.warnings.empty()) {
    out << "\nWarnings:\n";
    for (const auto& w : report.warnings) {
      out << "  " << w << "\n";
    }
  }
  return out.str();
}

std::string render_report_json(const Report& report) {
  OrderedJson doc;
  OrderedJson tables;
  for (const Mode mode : kModes) {
    OrderedJson table;
    const auto mode_it = report.cells.find(mode);
    for (const Algorithm algo : kAlgorithms) {
      OrderedJson cell;
      if (mode_it != report.cells.end()) {
        const auto it = mode_it->second.find(algo);
        if (it != mode_it->second.end()) {
          const ReportCell& c = it->second;
          cell["n_seeds"] = c.n_seeds;
          cell["episodes_to_avg_300"] =
              c.episodes_to_avg_300 ? OrderedJson(*c.episodes_to_avg_300) : OrderedJson(nullptr);
          cell["avg_score_at_500"] =
              c.avg_score_at_500 ? OrderedJson(*c.avg_score_at_500) : OrderedJson(nullptr);
          cell["first_episode_score_500"] = c.first_episode_score_500
                                                ? OrderedJson(*c.first_episode_score_500)
                                                : OrderedJson(nullptr);
        }
      }
      table[algorithm_name(algo)] = std::move(cell);
    }
    tables[mode_name(mode)] = std::move(table);
  }
  doc["tables"] = std::move(tables);

  OrderedJson compression = OrderedJson::array();
  for (const Algorithm algo : kAlgorithms) {
    const Architecture teacher{kind_for(algo), 4, 128, 128, 2};
    const Architecture student{kind_for(algo), 4, 64, 64, 2};
    OrderedJson entry;
    entry["algorithm"] = algorithm_name(algo);
    entry["teacher_parameters"] = teacher.parameter_count();
    entry["student_parameters"] = student.parameter_count();
    entry["compression_ratio"] = static_cast<double>(student.parameter_count()) /
                                 static_cast<double>(teacher.parameter_count());
    compression.push_back(std::move(entry));
  }
  doc["compression"] = std::move(compression);
  doc["compression_note"] =
      "Exact bias-inclusive counts. For the 4-128-128-2 / 4-64-64-2 MLP pair the "
      "ratio is 4610/17410 = 26.48%, which differs from the previously reported "
      "25.34% figure; that figure is not reproducible from the stated layer sizes.";

  OrderedJson runs = OrderedJson::array();
  for (const auto& run : report.runs) {
    OrderedJson entry;
    entry["run_id"] = run.run_id;
    entry["algorithm"] = algorithm_name(run.algorithm);
    entry["mode"] = mode_name(run.mode);
    entry["seed"] = run.seed;
    entry["diverged"] = run.diverged;
    entry["episodes_to_avg_300"] =
        run.episodes_to_avg_300 ? OrderedJson(*run.episodes_to_avg_300) : OrderedJson(nullptr);
    entry["avg_score_at_500"] = run.avg_score_at_500;
    entry["first_episode_score_500"] = run.first_episode_score_500
                                           ? OrderedJson(*run.first_episode_score_500)
                                           : OrderedJson(nullptr);
    runs.push_back(std::move(entry));
  }
  doc["runs"] = std::move(runs);
  doc["warnings"] = report.warnings;
  return doc.dump(2) + "\n";
}

std::string compression_table_text() {
  std::ostringstream out;
  out << "PARAMETER COMPRESSION (teacher 128-128 vs student 64-64)\n";
  out << std::left << std::setw(12) << "algorithm" << std::setw(12) << "teacher"
      << std::setw(12) << "student" << "ratio\n";
  for (const Algorithm algo : kAlgorithms) {
    const Architecture teacher{kind_for(algo), 4, 128, 128, 2};
    const Architecture student{kind_for(algo), 4, 64, 64, 2};
    const double ratio = static_cast<double>(student.parameter_count()) /
                         static_cast<double>(teacher.parameter_count());
    out << std::left << std::setw(12) << algorithm_name(algo) << std::setw(12)
        << teacher.parameter_count() << std::setw(12) << student.parameter_count()
        << std::fixed << std::setprecision(2) << 100.0 * ratio << "%\n";
  }
  out << "Note: exact bias-inclusive counts; the MLP pair gives 26.48%, not the\n"
         "previously reported 25.34%, which the stated layer sizes do not yield.\n";
  return out.str();
}

}  // namespace qdistill
