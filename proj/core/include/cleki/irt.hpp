// Two-parameter logistic baseline sigma(a(theta - b)), trained with the same
// optimizer and early-stopping scheme as the main model. Comparison harness
// for the coverage-robustness experiment.
#pragma once

#include <span>
#include <vector>

#include "cleki/data.hpp"
#include "cleki/metrics.hpp"
#include "cleki/model.hpp"
#include "cleki/training.hpp"

namespace cleki {

struct IrtModel {
  std::vector<double> ability;         // theta, per student
  std::vector<double> discrimination;  // a, per exercise
  std::vector<double> difficulty;      // b, per exercise
};

double irt_predict(const IrtModel& model, int student, int exercise);

struct IrtResult {
  IrtModel model;
  TrainHistory history;
  bool diverged = false;
};

IrtResult train_irt(const Dataset& dataset, const ModelConfig& config,
                    std::span<const ResponseLog> train_logs);

Metrics evaluate_irt(const IrtModel& model, std::span<const ResponseLog> logs);

}  // namespace cleki
