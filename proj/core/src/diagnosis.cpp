#include "cleki/diagnosis.hpp"

#include <cmath>
#include <fstream>
#include <unordered_map>

#include "cleki/errors.hpp"
#include "cleki/latent.hpp"

namespace cleki {

double explicit_score(std::span<const double> mastery, std::span<const double> difficulty,
                      std::span<const double> q_row) {
  double c = 0.0;
  double s = 0.0;
  for (size_t k = 0; k < q_row.size(); ++k) {
    if (q_row[k] == 0.0) continue;
    c += q_row[k];
    s += q_row[k] * (mastery[k] - difficulty[k]);
  }
  if (c < 1.0) throw DataError("explicit_score: exercise has no tagged concept");
  return sigmoid(s / c);
}

double latent_score(std::span<const double> mastery, std::span<const double> difficulty,
                    std::span<const double> q_tilde_row, int c_explicit, bool* flagged,
                    bool nonzero_denominator) {
  if (c_explicit < 1) throw DataError("latent_score: explicit concept count must be >= 1");
  double s = 0.0;
  int support = 0;
  for (size_t k = 0; k < q_tilde_row.size(); ++k) {
    if (q_tilde_row[k] == 0.0) continue;
    ++support;
    s += q_tilde_row[k] * (mastery[k] - difficulty[k]);
  }
  if (flagged) *flagged = support == 0;
  if (support == 0) return 0.5;
  const double denom = nonzero_denominator ? support : c_explicit;
  return sigmoid(s / denom);
}

double combine(double explicit_prob, double latent_prob, double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw DataError("epsilon must be in [0, 1]");
  return epsilon * explicit_prob + (1.0 - epsilon) * latent_prob;
}

double bce_loss(std::span<const double> predictions, std::span<const double> labels) {
  if (predictions.size() != labels.size())
    throw DataError("bce_loss: predictions and labels differ in length");
  double loss = 0.0;
  for (size_t i = 0; i < predictions.size(); ++i) {
    const double y = std::clamp(predictions[i], kProbClip, 1.0 - kProbClip);
    loss -= labels[i] * std::log(y) + (1.0 - labels[i]) * std::log(1.0 - y);
  }
  return loss;
}

std::vector<Prediction> predict_batch(const ModelParams& params, const QMatrix& q,
                                      const Matrix& sim_renorm,
                                      std::span<const std::pair<int, int>> pairs,
                                      const ScoreOptions& opts) {
  std::unordered_map<int, std::vector<double>> mastery_cache;
  std::unordered_map<int, std::vector<double>> difficulty_cache;
  std::vector<double> q_tilde(params.n_concepts);

  std::vector<Prediction> out;
  out.reserve(pairs.size());
  for (size_t idx = 0; idx < pairs.size(); ++idx) {
    const auto [i, j] = pairs[idx];
    try {
      if (i < 0 || i >= params.n_students)
        throw DataError("student index out of range: " + std::to_string(i));
      if (j < 0 || j >= params.n_exercises)
        throw DataError("exercise index out of range: " + std::to_string(j));

      auto mit = mastery_cache.find(i);
      if (mit == mastery_cache.end())
        mit = mastery_cache.emplace(i, concept_scalar(student_proficiency(params, i))).first;
      auto dit = difficulty_cache.find(j);
      if (dit == difficulty_cache.end())
        dit = difficulty_cache.emplace(j, concept_scalar(exercise_difficulty(params, j))).first;
      const auto& mastery = mit->second;
      const auto& difficulty = dit->second;

      const auto& tags = q.concepts_of[j];
      if (tags.empty()) throw DataError("exercise has no tagged concept");
      double s = 0.0;
      for (int k : tags) s += mastery[k] - difficulty[k];

      latent_q_row(q, sim_renorm, j, q_tilde, opts.zero_explicit);

      Prediction p;
      p.explicit_prob = sigmoid(s / static_cast<double>(tags.size()));
      p.latent_prob = latent_score(mastery, difficulty, q_tilde,
                                   static_cast<int>(tags.size()), &p.no_latent_evidence,
                                   opts.nonzero_denominator);
      p.combined = combine(p.explicit_prob, p.latent_prob, opts.epsilon);
      out.push_back(p);
    } catch (const DataError& e) {
      throw DataError("pair " + std::to_string(idx) + ": " + e.what());
    }
  }
  return out;
}

void write_predictions(const std::string& path, std::span<const std::pair<int, int>> pairs,
                       std::span<const Prediction> predictions, std::span<const double> labels,
                       const IdMap& student_ids, const IdMap& exercise_ids) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  out.precision(10);
  out << "student_id,exercise_id,explicit,latent,combined" << (labels.empty() ? "" : ",label")
      << "\n";
  for (size_t i = 0; i < pairs.size(); ++i) {
    out << student_ids.to_raw[pairs[i].first] << ',' << exercise_ids.to_raw[pairs[i].second]
        << ',' << predictions[i].explicit_prob << ',' << predictions[i].latent_prob << ','
        << predictions[i].combined;
    if (!labels.empty()) out << ',' << labels[i];
    out << '\n';
  }
}

}  // namespace cleki
