#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cleki/errors.hpp"
#include "cleki/evaluation.hpp"

#include <json.hpp>

namespace cleki {

DiagnosisReport diagnosis_report(const TrainState& state, const Matrix& sim_renorm,
                                 int student, const QMatrix& q,
                                 std::span<const ResponseLog> train_logs,
                                 std::span<const ResponseLog> test_logs, int top_related) {
  const ModelParams& params = state.inference_params();
  if (student < 0 || student >= params.n_students)
    throw DataError("diagnosis_report: student index out of range");

  const int k_total = params.n_concepts;
  DiagnosisReport report;
  report.student = student;
  report.concepts.resize(k_total);

  const auto scalars = concept_scalar(student_proficiency(params, student));
  const double norm = std::sqrt(static_cast<double>(params.dim));

  for (int k = 0; k < k_total; ++k) {
    auto& row = report.concepts[k];
    row.concept_id = k;
    row.mastery = scalars[k] / norm;

    // top related concepts by latent similarity weight
    std::vector<int> candidates;
    for (int j = 0; j < k_total; ++j)
      if (sim_renorm(k, j) > 0.0) candidates.push_back(j);
    std::sort(candidates.begin(), candidates.end(), [&](int a, int b) {
      if (sim_renorm(k, a) != sim_renorm(k, b)) return sim_renorm(k, a) > sim_renorm(k, b);
      return a < b;
    });
    if (static_cast<int>(candidates.size()) > top_related) candidates.resize(top_related);
    for (int j : candidates) row.related.emplace_back(j, sim_renorm(k, j));
  }

  auto tally = [&](std::span<const ResponseLog> logs, bool train) {
    for (const auto& log : logs) {
      if (log.student != student) continue;
      for (int k : q.concepts_of[log.exercise]) {
        auto& row = report.concepts[k];
        if (train) {
          ++row.train_total;
          row.train_correct += log.score;
        } else {
          ++row.test_total;
          row.test_correct += log.score;
        }
      }
    }
  };
  tally(train_logs, true);
  tally(test_logs, false);
  return report;
}

std::string format_report(const DiagnosisReport& report, const Dataset& dataset) {
  std::ostringstream os;
  os.precision(3);
  os << "diagnosis report for student " << dataset.student_ids.to_raw[report.student] << "\n";
  os << "concept  mastery  train(ok/all)  test(ok/all)  related concepts (weight)\n";
  for (const auto& row : report.concepts) {
    os << dataset.concept_ids.to_raw[row.concept_id] << "  " << std::fixed << row.mastery << "  "
       << row.train_correct << "/" << row.train_total << "  " << row.test_correct << "/"
       << row.test_total << "  ";
    for (size_t i = 0; i < row.related.size(); ++i) {
      os << (i ? ", " : "") << dataset.concept_ids.to_raw[row.related[i].first] << " ("
         << row.related[i].second << ")";
    }
    os << "\n";
  }
  return os.str();
}

void write_report_json(const std::string& path, const DiagnosisReport& report,
                       const Dataset& dataset) {
  nlohmann::json doc;
  doc["student_id"] = dataset.student_ids.to_raw[report.student];
  auto& rows = doc["concepts"];
  rows = nlohmann::json::array();
  for (const auto& row : report.concepts) {
    nlohmann::json j;
    j["concept_id"] = dataset.concept_ids.to_raw[row.concept_id];
    j["mastery"] = row.mastery;
    j["train"] = {{"correct", row.train_correct}, {"total", row.train_total}};
    j["test"] = {{"correct", row.test_correct}, {"total", row.test_total}};
    auto& rel = j["related"];
    rel = nlohmann::json::array();
    for (const auto& [rel_concept, weight] : row.related)
      rel.push_back({{"concept_id", dataset.concept_ids.to_raw[rel_concept]}, {"weight", weight}});
    rows.push_back(std::move(j));
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  out << doc.dump(2) << '\n';
}

}  // namespace cleki
