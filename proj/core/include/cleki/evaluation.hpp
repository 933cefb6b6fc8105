// Metric computation and the experiment harness: held-out evaluation,
// ablation variants, coverage-robustness and hyperparameter sweeps,
// per-student diagnosis reports, and embedding export.
#pragma once

#include <span>
#include <string>
#include <vector>

#include "cleki/concept_graph.hpp"
#include "cleki/data.hpp"
#include "cleki/irt.hpp"
#include "cleki/metrics.hpp"
#include "cleki/training.hpp"

namespace cleki {

enum class AblationVariant { full, no_mrp, no_agm, no_cdlk, no_cdek };

AblationVariant parse_variant(const std::string& name);
std::string variant_name(AblationVariant variant);

// no_mrp collapses embeddings to scalars (D = 1), no_agm averages neighbors
// uniformly, no_cdlk keeps only the explicit branch (epsilon = 1), no_cdek
// keeps only the latent branch (epsilon = 0).
ModelConfig apply_variant(ModelConfig config, AblationVariant variant);

struct EvalOutcome {
  Metrics metrics;
  long long excluded = 0;  // logs with ids unseen by the model
};

// Scores held-out logs with the best-validation snapshot.
EvalOutcome evaluate(const TrainState& state, const ConceptGraph& graph, const QMatrix& q,
                     std::span<const ResponseLog> logs);

// Canonical split -> train -> test-evaluate path shared by all experiments.
struct ExperimentResult {
  TrainResult training;
  Metrics test;
  SplitResult split;
};
ExperimentResult run_experiment(const Dataset& dataset, const ConceptGraph& graph,
                                const ModelConfig& config);

Metrics run_ablation(const Dataset& dataset, const ConceptGraph& graph,
                     const ModelConfig& config, AblationVariant variant);

enum class ModelKind { cleki, irt };

struct CoveragePoint {
  double fraction = 1.0;
  Metrics metrics;
  long long dropped_students = 0;  // students left with zero training logs
};

// Subsamples the training logs per fraction (fixed test split), retrains and
// evaluates. fraction 1.0 reproduces the standard run exactly.
std::vector<CoveragePoint> coverage_sweep(const Dataset& dataset, const ConceptGraph& graph,
                                          const ModelConfig& config,
                                          std::span<const double> fractions,
                                          ModelKind kind = ModelKind::cleki);

enum class SweepKnob { top_p, epsilon };

struct SweepRow {
  double value = 0.0;
  Metrics metrics;
};

std::vector<SweepRow> hyper_sweep(const Dataset& dataset, const ConceptGraph& graph,
                                  const ModelConfig& config, SweepKnob knob,
                                  std::span<const double> values);

void write_sweep_table(const std::string& path, const std::string& knob,
                       std::span<const SweepRow> rows, uint64_t seed);
void write_coverage_curve(const std::string& path, std::span<const CoveragePoint> points,
                          uint64_t seed);

// Per-student/per-exercise concept-scalar vectors (normalized by sqrt(D))
// with a correct-rate column; entities filtered by minimum log count
// (strictly greater than the threshold).
void export_embeddings(const TrainState& state, const Dataset& dataset,
                       std::span<const ResponseLog> logs, const std::string& out_dir,
                       int min_student_logs = 0, int min_exercise_logs = 0);

// Per-student diagnosis report: normalized mastery, top related concepts by
// latent similarity weight, and per-concept response summaries.
struct ConceptDiagnosis {
  int concept_id = 0;
  double mastery = 0.0;  // in (0, 1)
  std::vector<std::pair<int, double>> related;  // top concepts by similarity weight
  int train_correct = 0;
  int train_total = 0;
  int test_correct = 0;
  int test_total = 0;
};

struct DiagnosisReport {
  int student = 0;  // internal id
  std::vector<ConceptDiagnosis> concepts;
};

DiagnosisReport diagnosis_report(const TrainState& state, const Matrix& sim_renorm,
                                 int student, const QMatrix& q,
                                 std::span<const ResponseLog> train_logs,
                                 std::span<const ResponseLog> test_logs,
                                 int top_related = 5);

std::string format_report(const DiagnosisReport& report, const Dataset& dataset);
void write_report_json(const std::string& path, const DiagnosisReport& report,
                       const Dataset& dataset);

void write_matrix_csv(const std::string& path, const Matrix& m);

}  // namespace cleki
