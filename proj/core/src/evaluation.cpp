#include "cleki/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "cleki/diagnosis.hpp"
#include "cleki/errors.hpp"
#include "cleki/latent.hpp"

namespace cleki {

Metrics compute_metrics(std::span<const double> predictions, std::span<const double> labels,
                        double threshold) {
  if (predictions.empty()) throw DataError("compute_metrics: empty input");
  if (predictions.size() != labels.size())
    throw DataError("compute_metrics: predictions and labels differ in length");

  const size_t n = predictions.size();
  size_t correct = 0;
  size_t n_pos = 0;
  double sq_sum = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double r = labels[i];
    if (r != 0.0 && r != 1.0) throw DataError("compute_metrics: labels must be binary");
    const int hard = predictions[i] >= threshold ? 1 : 0;
    correct += hard == static_cast<int>(r);
    n_pos += r == 1.0;
    const double d = predictions[i] - r;
    sq_sum += d * d;
  }
  const size_t n_neg = n - n_pos;

  Metrics m;
  m.acc = 100.0 * static_cast<double>(correct) / static_cast<double>(n);
  m.rmse = 100.0 * std::sqrt(sq_sum / static_cast<double>(n));

  if (n_pos == 0 || n_neg == 0) {
    m.auc = 50.0;
    m.auc_degenerate = true;
    return m;
  }

  // midrank statistic: AUC = (sum of positive ranks - P(P+1)/2) / (P*N)
  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](size_t a, size_t b) { return predictions[a] < predictions[b]; });
  double pos_rank_sum = 0.0;
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j < n && predictions[idx[j]] == predictions[idx[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
    for (size_t k = i; k < j; ++k)
      if (labels[idx[k]] == 1.0) pos_rank_sum += midrank;
    i = j;
  }
  const double p = static_cast<double>(n_pos);
  m.auc = 100.0 * (pos_rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(n_neg));
  return m;
}

AblationVariant parse_variant(const std::string& name) {
  if (name == "full") return AblationVariant::full;
  if (name == "no_mrp") return AblationVariant::no_mrp;
  if (name == "no_agm") return AblationVariant::no_agm;
  if (name == "no_cdlk") return AblationVariant::no_cdlk;
  if (name == "no_cdek") return AblationVariant::no_cdek;
  throw DataError("unknown ablation variant: " + name);
}

std::string variant_name(AblationVariant variant) {
  switch (variant) {
    case AblationVariant::full: return "full";
    case AblationVariant::no_mrp: return "no_mrp";
    case AblationVariant::no_agm: return "no_agm";
    case AblationVariant::no_cdlk: return "no_cdlk";
    case AblationVariant::no_cdek: return "no_cdek";
  }
  return "full";
}

ModelConfig apply_variant(ModelConfig config, AblationVariant variant) {
  switch (variant) {
    case AblationVariant::full: break;
    case AblationVariant::no_mrp: config.dim = 1; break;
    case AblationVariant::no_agm: config.uniform_attention = true; break;
    case AblationVariant::no_cdlk: config.epsilon = 1.0; break;
    case AblationVariant::no_cdek: config.epsilon = 0.0; break;
  }
  return config;
}

EvalOutcome evaluate(const TrainState& state, const ConceptGraph& graph, const QMatrix& q,
                     std::span<const ResponseLog> logs) {
  const ModelParams& params = state.inference_params();
  const GraphContext ctx = GraphContext::build(
      graph, state.config.prereq_flow_reverse ? PrereqFlow::prereq_from_dependent
                                              : PrereqFlow::dependent_from_prereq);
  LatentOptions lopts;
  lopts.top_p = state.config.top_p;
  lopts.leaky_slope = state.config.leaky_slope;
  lopts.uniform_attention = state.config.uniform_attention;
  lopts.zero_explicit = state.config.zero_explicit_latent;
  const LatentState latent = compute_latent(params, ctx.nbrs, ctx.mask, lopts);

  EvalOutcome outcome;
  std::vector<std::pair<int, int>> pairs;
  std::vector<double> labels;
  for (const auto& log : logs) {
    if (log.student < 0 || log.student >= params.n_students || log.exercise < 0 ||
        log.exercise >= params.n_exercises) {
      ++outcome.excluded;
      continue;
    }
    pairs.emplace_back(log.student, log.exercise);
    labels.push_back(static_cast<double>(log.score));
  }
  if (pairs.empty()) throw DataError("evaluate: no scorable logs");

  const auto preds = predict_batch(params, q, latent.sim_renorm, pairs,
                                   ScoreOptions::from_config(state.config));
  std::vector<double> y(preds.size());
  for (size_t i = 0; i < preds.size(); ++i) y[i] = preds[i].combined;
  outcome.metrics = compute_metrics(y, labels);
  return outcome;
}

ExperimentResult run_experiment(const Dataset& dataset, const ConceptGraph& graph,
                                const ModelConfig& config) {
  ExperimentResult result;
  result.split = split_logs(dataset, config.train_fraction, config.seed);
  result.training = train(dataset, graph, config, result.split.train);
  result.test = evaluate(result.training.state, graph, dataset.q, result.split.test).metrics;
  return result;
}

Metrics run_ablation(const Dataset& dataset, const ConceptGraph& graph,
                     const ModelConfig& config, AblationVariant variant) {
  return run_experiment(dataset, graph, apply_variant(config, variant)).test;
}

std::vector<CoveragePoint> coverage_sweep(const Dataset& dataset, const ConceptGraph& graph,
                                          const ModelConfig& config,
                                          std::span<const double> fractions, ModelKind kind) {
  for (double f : fractions)
    if (!(f > 0.0 && f <= 1.0)) throw DataError("coverage fraction must be in (0, 1]");

  const SplitResult split = split_logs(dataset, config.train_fraction, config.seed);

  std::vector<std::vector<int>> per_student(dataset.n_students);
  for (int i = 0; i < static_cast<int>(split.train.size()); ++i)
    per_student[split.train[i].student].push_back(i);

  std::vector<CoveragePoint> curve;
  for (double fraction : fractions) {
    CoveragePoint point;
    point.fraction = fraction;

    std::vector<ResponseLog> sub;
    if (fraction == 1.0) {
      sub = split.train;
    } else {
      std::vector<uint8_t> keep(split.train.size(), 0);
      Rng rng(mix_seed(config.seed, 0xc0f ^ static_cast<uint64_t>(fraction * 1e6)));
      for (int s = 0; s < dataset.n_students; ++s) {
        auto idxs = per_student[s];
        if (idxs.empty()) continue;
        const long long n_keep =
            std::llround(fraction * static_cast<double>(idxs.size()));
        if (n_keep == 0) {
          ++point.dropped_students;
          continue;
        }
        rng.shuffle(idxs);
        for (long long k = 0; k < n_keep && k < static_cast<long long>(idxs.size()); ++k)
          keep[idxs[k]] = 1;
      }
      for (size_t i = 0; i < split.train.size(); ++i)
        if (keep[i]) sub.push_back(split.train[i]);
    }

    if (kind == ModelKind::cleki) {
      TrainResult tr = train(dataset, graph, config, sub);
      point.metrics = evaluate(tr.state, graph, dataset.q, split.test).metrics;
    } else {
      IrtResult ir = train_irt(dataset, config, sub);
      point.metrics = evaluate_irt(ir.model, split.test);
    }
    curve.push_back(std::move(point));
  }
  return curve;
}

std::vector<SweepRow> hyper_sweep(const Dataset& dataset, const ConceptGraph& graph,
                                  const ModelConfig& config, SweepKnob knob,
                                  std::span<const double> values) {
  std::vector<SweepRow> rows;
  for (double value : values) {
    ModelConfig c = config;
    if (knob == SweepKnob::top_p) {
      const int p = static_cast<int>(std::llround(value));
      if (p < 1 || static_cast<double>(p) != value)
        throw DataError("top_p sweep values must be positive integers");
      c.top_p = p;
    } else {
      if (!(value >= 0.0 && value <= 1.0)) throw DataError("epsilon sweep values must be in [0, 1]");
      c.epsilon = value;
    }
    SweepRow row;
    row.value = value;
    row.metrics = run_experiment(dataset, graph, c).test;
    rows.push_back(row);
  }
  return rows;
}

void write_sweep_table(const std::string& path, const std::string& knob,
                       std::span<const SweepRow> rows, uint64_t seed) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  out.precision(10);
  out << knob << ",acc,auc,rmse,seed\n";
  for (const auto& row : rows)
    out << row.value << ',' << row.metrics.acc << ',' << row.metrics.auc << ','
        << row.metrics.rmse << ',' << seed << '\n';
}

void write_coverage_curve(const std::string& path, std::span<const CoveragePoint> points,
                          uint64_t seed) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  out.precision(10);
  out << "fraction,acc,auc,rmse,dropped_students,seed\n";
  for (const auto& p : points)
    out << p.fraction << ',' << p.metrics.acc << ',' << p.metrics.auc << ',' << p.metrics.rmse
        << ',' << p.dropped_students << ',' << seed << '\n';
}

void export_embeddings(const TrainState& state, const Dataset& dataset,
                       std::span<const ResponseLog> logs, const std::string& out_dir,
                       int min_student_logs, int min_exercise_logs) {
  const ModelParams& params = state.inference_params();
  const double norm = std::sqrt(static_cast<double>(params.dim));

  std::vector<long long> s_total(params.n_students, 0), s_correct(params.n_students, 0);
  std::vector<long long> e_total(params.n_exercises, 0), e_correct(params.n_exercises, 0);
  for (const auto& log : logs) {
    if (log.student >= 0 && log.student < params.n_students) {
      ++s_total[log.student];
      s_correct[log.student] += log.score;
    }
    if (log.exercise >= 0 && log.exercise < params.n_exercises) {
      ++e_total[log.exercise];
      e_correct[log.exercise] += log.score;
    }
  }

  auto open = [&](const std::string& name) {
    std::ofstream out(out_dir + "/" + name);
    if (!out) throw DataError("cannot write file: " + out_dir + "/" + name);
    out.precision(10);
    return out;
  };

  {
    auto out = open("student_embeddings.csv");
    out << "student_id,correct_rate";
    for (int k = 0; k < params.n_concepts; ++k) out << ",c" << k;
    out << '\n';
    for (int i = 0; i < params.n_students; ++i) {
      if (s_total[i] <= min_student_logs) continue;
      const auto scalars = concept_scalar(student_proficiency(params, i));
      out << dataset.student_ids.to_raw[i] << ','
          << static_cast<double>(s_correct[i]) / static_cast<double>(s_total[i]);
      for (double v : scalars) out << ',' << v / norm;
      out << '\n';
    }
  }
  {
    auto out = open("exercise_embeddings.csv");
    out << "exercise_id,correct_rate";
    for (int k = 0; k < params.n_concepts; ++k) out << ",c" << k;
    out << '\n';
    for (int j = 0; j < params.n_exercises; ++j) {
      if (e_total[j] <= min_exercise_logs) continue;
      const auto scalars = concept_scalar(exercise_difficulty(params, j));
      out << dataset.exercise_ids.to_raw[j] << ','
          << static_cast<double>(e_correct[j]) / static_cast<double>(e_total[j]);
      for (double v : scalars) out << ',' << v / norm;
      out << '\n';
    }
  }
}

void write_matrix_csv(const std::string& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  out.precision(10);
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) out << (c ? "," : "") << m(r, c);
    out << '\n';
  }
}

}  // namespace cleki
