// Trainable parameter store and the concept-aware proficiency/difficulty
// transforms, with the positivity constraint that carries the monotonicity
// assumption.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cleki/matrix.hpp"

namespace cleki {

struct ModelConfig {
  int dim = 16;                 // D, embedding width per concept
  int heads = 4;                // H, attention heads
  int top_p = 8;                // P, latent concepts kept per row
  double epsilon = 0.5;         // explicit/latent combination weight
  double learning_rate = 1e-3;
  int batch_size = 256;
  int epochs = 50;
  uint64_t seed = 1;
  double leaky_slope = 0.2;

  // training behaviour
  int patience = 5;              // early stop on validation AUC
  double train_fraction = 0.8;   // train/test split
  double val_fraction = 0.1;     // of the train portion, for early stopping
  bool latent_per_epoch = false; // refresh latent Q once per epoch instead of per step
  bool latent_nonzero_denominator = false;  // latent score divides by nonzero count
  bool zero_explicit_latent = false;        // zero latent Q at explicit positions
  bool loss_mean = true;         // scale steps by batch mean (sum kept for reporting)
  bool prereq_flow_reverse = false;
  bool uniform_attention = false;  // ablation: replace attention with neighbor averaging

  // Throws DataError when invariants are violated for a K-concept graph.
  void validate(int n_concepts) const;
};

// Loads "key = value" lines into the config; unknown keys are an error.
ModelConfig load_model_config(const std::string& path, ModelConfig base = {});
std::string format_model_config(const ModelConfig& config);

struct ModelParams {
  int n_students = 0;
  int n_exercises = 0;
  int n_concepts = 0;
  int dim = 0;
  int heads = 0;

  Matrix concept_emb;                 // K x D
  Matrix student_emb;                 // N x (K*D), row = flattened K x D block
  Matrix exercise_emb;                // M x (K*D)
  Matrix w1;                          // D x D, proficiency transform, entries >= 0
  std::vector<double> b1;             // D
  Matrix w2;                          // D x D, difficulty transform, entries >= 0
  std::vector<double> b2;             // D
  std::vector<Matrix> gat_w;          // H of D x D
  std::vector<std::vector<double>> gat_a;  // H of 2D attention vectors

  std::span<const double> student_row(int i) const { return student_emb.row_span(i); }
  std::span<const double> exercise_row(int j) const { return exercise_emb.row_span(j); }

  bool operator==(const ModelParams&) const = default;
};

// Deterministic init: embeddings ~ N(0, 1/sqrt(D)); W1/W2 take absolute
// values so the positivity constraint holds from the start.
ModelParams init_params(const ModelConfig& config, int n_students, int n_exercises,
                        int n_concepts, uint64_t seed);

// sigma(x W + b) applied row-wise to a K x D embedding block.
Matrix proficiency_from_rows(std::span<const double> flat_kd, int n_concepts, int dim,
                             const Matrix& w, std::span<const double> b);

Matrix student_proficiency(const ModelParams& params, int student);
Matrix exercise_difficulty(const ModelParams& params, int exercise);

// Row-wise L2 norms of a K x D matrix: the per-concept scalar levels.
std::vector<double> concept_scalar(const Matrix& kd);

// Clamps negative entries of W1/W2 to zero. Idempotent.
void project_positive(ModelParams& params);

}  // namespace cleki
