#pragma once

#include <span>

namespace cleki {

// ACC/AUC/RMSE, percent-scaled to match the usual reporting convention.
struct Metrics {
  double acc = 0.0;
  double auc = 0.0;
  double rmse = 0.0;
  bool auc_degenerate = false;  // single-class labels: AUC pinned to 50
};

// ACC by threshold, AUC by midrank statistic (ties get midranks), RMSE on
// raw probabilities. Throws DataError on empty or mismatched input.
Metrics compute_metrics(std::span<const double> predictions, std::span<const double> labels,
                        double threshold = 0.5);

}  // namespace cleki
