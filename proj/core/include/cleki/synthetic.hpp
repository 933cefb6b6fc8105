// Synthetic worlds with known ground truth: mastery correlated along the
// prerequisite structure, slip/guess response noise, and recovery scoring of
// trained models against the truth.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cleki/concept_graph.hpp"
#include "cleki/data.hpp"
#include "cleki/matrix.hpp"
#include "cleki/metrics.hpp"
#include "cleki/training.hpp"

namespace cleki {

struct GroundTruth {
  int n_students = 0;
  int n_exercises = 0;
  int n_concepts = 0;
  Matrix mastery;     // N x K in [0, 1]
  Matrix difficulty;  // M x K in [0, 1]
  QMatrix q;          // 1-3 concepts per exercise
  ConceptGraph graph; // acyclic on prerequisite edges
  double slip = 0.0;
  double guess = 0.0;
  // curriculum position per student: practice concentrates on exercises
  // whose concepts sit near this position on the concept circle
  std::vector<double> focus;
};

// Deterministic world generator. Mastery follows each prerequisite chain
// downward (dependent <= prerequisite + noise), similarity edges connect
// index-adjacent concepts, and extra association edges densify the map.
GroundTruth gen_world(int n_students, int n_exercises, int n_concepts, uint64_t seed,
                      double slip, double guess);

// Bernoulli responses: correct with probability 1-slip when the mean tagged
// mastery-difficulty gap is positive, guess otherwise (ties fall to guess).
std::vector<ResponseLog> gen_responses(const GroundTruth& truth, int logs_per_student,
                                       uint64_t seed);

// In-memory dataset over a world (identity raw ids).
Dataset make_dataset(const GroundTruth& truth, std::vector<ResponseLog> logs);

struct RecoveryReport {
  double pooled_rank_correlation = 0.0;
  std::vector<double> per_concept;  // rank correlation across students, per concept
  Metrics test;
};

// Rank correlation between learned per-concept mastery scalars and the true
// mastery, plus test metrics of the trained state.
RecoveryReport recovery_score(const TrainState& state, const GroundTruth& truth,
                              std::span<const ResponseLog> test_logs);

// Spearman correlation with midranks.
double rank_correlation(std::span<const double> a, std::span<const double> b);

// Emits q.csv, graph.csv, mastery.csv, difficulty.csv in the formats the
// loaders consume.
void write_world(const GroundTruth& truth, const std::string& dir);

}  // namespace cleki
