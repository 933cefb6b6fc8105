#include "cleki/irt.hpp"

#include <cmath>

#include "cleki/diagnosis.hpp"
#include "cleki/errors.hpp"
#include "cleki/rng.hpp"

namespace cleki {

double irt_predict(const IrtModel& model, int student, int exercise) {
  return sigmoid(model.discrimination[exercise] *
                 (model.ability[student] - model.difficulty[exercise]));
}

Metrics evaluate_irt(const IrtModel& model, std::span<const ResponseLog> logs) {
  std::vector<double> preds, labels;
  preds.reserve(logs.size());
  labels.reserve(logs.size());
  for (const auto& log : logs) {
    if (log.student < 0 || log.student >= static_cast<int>(model.ability.size())) continue;
    if (log.exercise < 0 || log.exercise >= static_cast<int>(model.difficulty.size())) continue;
    preds.push_back(irt_predict(model, log.student, log.exercise));
    labels.push_back(static_cast<double>(log.score));
  }
  return compute_metrics(preds, labels);
}

IrtResult train_irt(const Dataset& dataset, const ModelConfig& config,
                    std::span<const ResponseLog> train_logs) {
  if (train_logs.empty()) throw DataError("train_irt: no training logs");

  SplitResult fit_val;
  if (config.val_fraction > 0.0 && train_logs.size() > 1) {
    fit_val = split_logs(train_logs, dataset.n_students, 1.0 - config.val_fraction,
                         mix_seed(config.seed, 0x7a1));
  } else {
    fit_val.train.assign(train_logs.begin(), train_logs.end());
  }
  const auto& fit = fit_val.train;
  const auto& val = fit_val.test;

  const int n = dataset.n_students;
  const int m = dataset.n_exercises;
  IrtModel model;
  model.ability.assign(n, 0.0);
  model.discrimination.assign(m, 1.0);
  model.difficulty.assign(m, 0.0);

  // adaptive moments per scalar parameter
  std::vector<double> m_th(n, 0.0), v_th(n, 0.0);
  std::vector<double> m_a(m, 0.0), v_a(m, 0.0);
  std::vector<double> m_b(m, 0.0), v_b(m, 0.0);
  constexpr double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
  long long t = 0;

  IrtResult result;
  Rng rng(mix_seed(config.seed, 0x1f2));
  std::vector<int> order(fit.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

  IrtModel best = model;
  double best_auc = -1.0;
  long long best_epoch = -1;

  std::vector<double> g_th(n), g_a(m), g_b(m);
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    bool diverged = false;

    for (size_t start = 0; start < order.size(); start += config.batch_size) {
      const size_t stop = std::min(order.size(), start + config.batch_size);
      std::fill(g_th.begin(), g_th.end(), 0.0);
      std::fill(g_a.begin(), g_a.end(), 0.0);
      std::fill(g_b.begin(), g_b.end(), 0.0);

      double batch_loss = 0.0;
      for (size_t idx = start; idx < stop; ++idx) {
        const auto& log = fit[order[idx]];
        const double p = irt_predict(model, log.student, log.exercise);
        const double pc = std::clamp(p, kProbClip, 1.0 - kProbClip);
        const double r = static_cast<double>(log.score);
        batch_loss -= r * std::log(pc) + (1.0 - r) * std::log(1.0 - pc);
        double dp = -(r / pc - (1.0 - r) / (1.0 - pc));
        if (p != pc) dp = 0.0;
        const double core = dp * p * (1.0 - p);
        const double a = model.discrimination[log.exercise];
        const double gap = model.ability[log.student] - model.difficulty[log.exercise];
        g_th[log.student] += core * a;
        g_a[log.exercise] += core * gap;
        g_b[log.exercise] -= core * a;
      }
      if (!std::isfinite(batch_loss)) {
        diverged = true;
        break;
      }
      epoch_loss += batch_loss;

      const double scale = config.loss_mean ? 1.0 / static_cast<double>(stop - start) : 1.0;
      ++t;
      const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
      const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
      auto update = [&](std::vector<double>& param, std::vector<double>& mm,
                        std::vector<double>& vv, const std::vector<double>& grad) {
        for (size_t i = 0; i < param.size(); ++i) {
          if (grad[i] == 0.0) continue;  // untouched this batch
          const double g = grad[i] * scale;
          mm[i] = beta1 * mm[i] + (1.0 - beta1) * g;
          vv[i] = beta2 * vv[i] + (1.0 - beta2) * g * g;
          param[i] -= config.learning_rate * (mm[i] / bc1) / (std::sqrt(vv[i] / bc2) + adam_eps);
        }
      };
      update(model.ability, m_th, v_th, g_th);
      update(model.discrimination, m_a, v_a, g_a);
      update(model.difficulty, m_b, v_b, g_b);
    }

    if (diverged) {
      result.diverged = true;
      break;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = epoch_loss;
    if (!val.empty()) {
      rec.val = evaluate_irt(model, val);
      if (rec.val.auc > best_auc) {
        best_auc = rec.val.auc;
        best_epoch = epoch;
        best = model;
      } else if (epoch - best_epoch > config.patience) {
        result.history.push_back(rec);
        break;
      }
    }
    result.history.push_back(rec);
  }

  result.model = best_auc >= 0.0 ? best : model;
  return result;
}

}  // namespace cleki
