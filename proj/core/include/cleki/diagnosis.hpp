// Explicit, latent, and combined diagnosis scores plus the cross-entropy
// training loss.
#pragma once

#include <span>
#include <utility>
#include <vector>

#include "cleki/data.hpp"
#include "cleki/matrix.hpp"
#include "cleki/model.hpp"

namespace cleki {

struct Prediction {
  double explicit_prob = 0.0;  // from the expert Q-matrix
  double latent_prob = 0.0;    // from the generated latent Q-matrix
  double combined = 0.0;       // epsilon-weighted sum of the two
  bool no_latent_evidence = false;
};

struct ScoreOptions {
  double epsilon = 0.5;
  bool zero_explicit = false;
  bool nonzero_denominator = false;  // divide latent score by its own support size

  static ScoreOptions from_config(const ModelConfig& c) {
    return {c.epsilon, c.zero_explicit_latent, c.latent_nonzero_denominator};
  }
};

// Probability clip applied before logs in the loss.
constexpr double kProbClip = 1e-7;

// sigma((1/c_j) sum_k q[k] (mastery[k] - difficulty[k])). Throws DataError
// when the exercise has no tagged concept.
double explicit_score(std::span<const double> mastery, std::span<const double> difficulty,
                      std::span<const double> q_row);

// Same interaction with the latent row; c_explicit is reused as denominator
// unless nonzero_denominator is set. An all-zero latent row scores 0.5 and is
// flagged (no latent evidence).
double latent_score(std::span<const double> mastery, std::span<const double> difficulty,
                    std::span<const double> q_tilde_row, int c_explicit,
                    bool* flagged = nullptr, bool nonzero_denominator = false);

double combine(double explicit_prob, double latent_prob, double epsilon);

// Eq-13-style summed cross-entropy with predictions clipped to
// [kProbClip, 1 - kProbClip].
double bce_loss(std::span<const double> predictions, std::span<const double> labels);

// Scores (student, exercise) pairs against the current latent similarity
// matrix. Deterministic, element-wise identical to the scalar path.
std::vector<Prediction> predict_batch(const ModelParams& params, const QMatrix& q,
                                      const Matrix& sim_renorm,
                                      std::span<const std::pair<int, int>> pairs,
                                      const ScoreOptions& opts);

void write_predictions(const std::string& path, std::span<const std::pair<int, int>> pairs,
                       std::span<const Prediction> predictions,
                       std::span<const double> labels,  // may be empty
                       const IdMap& student_ids, const IdMap& exercise_ids);

}  // namespace cleki
