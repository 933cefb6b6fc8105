// Acceptance suite: one pass/fail line per criterion.
//
//  1 gradient fidelity          6 synthetic recovery
//  2 monotonicity               7 coverage robustness vs IRT
//  3 latent-Q structure         8 hyperparameter trends
//  4 metric oracles             9 real-data reproduction (conditional)
//  5 combination identities
//
// Criterion 9 runs only when CLEKI_ASSIST_LOGS / _Q / _GRAPH point at the
// dataset files; on its own it does not fail the suite.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <sstream>
#include <vector>

#include "cleki/concept_graph.hpp"
#include "cleki/diagnosis.hpp"
#include "cleki/evaluation.hpp"
#include "cleki/irt.hpp"
#include "cleki/latent.hpp"
#include "cleki/synthetic.hpp"
#include "cleki/training.hpp"

using namespace cleki;

namespace {

struct Outcome {
  bool pass = false;
  bool skipped = false;
  std::string detail;
};

double median3(double a, double b, double c) {
  return std::max(std::min(a, b), std::min(std::max(a, b), c));
}

// Pinned configuration for the synthetic-scale criteria (the desk-scale
// world is far smaller than real datasets, so the embedding width and step
// size differ from the library defaults).
ModelConfig base_config(uint64_t seed) {
  ModelConfig c;
  c.dim = 2;
  c.learning_rate = 3e-3;
  c.seed = seed;
  return c;
}

struct SeedWorld {
  GroundTruth truth;
  Dataset data;
};

SeedWorld make_world(uint64_t seed) {
  SeedWorld w;
  w.truth = gen_world(300, 100, 20, seed, 0.1, 0.1);
  w.data = make_dataset(w.truth, gen_responses(w.truth, 40, seed));
  return w;
}

// ------------------------------------------------------------ criterion 1

Outcome criterion_gradient_fidelity() {
  const auto report = reference_gradient_check(7, 1e-4, 5, 6, 4, 3, 2, 2, 0.5);
  Outcome o;
  o.pass = report.pass && !report.near_boundary;
  std::ostringstream os;
  os << "max rel err " << report.max_rel_error << " (worst " << report.worst_tensor
     << ", seed " << report.seed << ")";
  o.detail = os.str();
  return o;
}

// ------------------------------------------------------------ criterion 2

Outcome criterion_monotonicity() {
  Rng rng(0xacc2);
  long long violations = 0;
  long long comparisons = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 3, m = 6, k = 4 + rng.uniform_int(5);
    ModelConfig cfg;
    cfg.dim = 2 + rng.uniform_int(5);
    cfg.heads = 1 + rng.uniform_int(2);
    cfg.top_p = 1 + rng.uniform_int(k - 1);
    cfg.epsilon = rng.uniform();
    auto params = init_params(cfg, n, m, k, rng.next());
    for (double& v : params.b1) v = rng.uniform(-0.5, 0.5);
    for (double& v : params.b2) v = rng.uniform(-0.5, 0.5);
    project_positive(params);

    ConceptGraph graph;
    graph.n_concepts = k;
    for (int i = 0; i < k; ++i)
      for (int j = i + 1; j < k; ++j)
        if (rng.uniform() < 0.5)
          graph.edges.push_back({i, j, rng.uniform() < 0.5 ? EdgeKind::similarity
                                                           : EdgeKind::prerequisite});
    QMatrix q;
    q.n_exercises = m;
    q.n_concepts = k;
    q.concepts_of.resize(m);
    for (int j = 0; j < m; ++j) {
      q.concepts_of[j].push_back(rng.uniform_int(k));
      if (rng.uniform() < 0.5) q.concepts_of[j].push_back(rng.uniform_int(k));
      std::sort(q.concepts_of[j].begin(), q.concepts_of[j].end());
      q.concepts_of[j].erase(
          std::unique(q.concepts_of[j].begin(), q.concepts_of[j].end()),
          q.concepts_of[j].end());
    }

    const GraphContext ctx = GraphContext::build(graph);
    LatentOptions lopts;
    lopts.top_p = cfg.top_p;
    const auto latent = compute_latent(params, ctx.nbrs, ctx.mask, lopts);

    const int student = rng.uniform_int(n);
    std::vector<std::pair<int, int>> pairs;
    for (int j = 0; j < m; ++j) pairs.emplace_back(student, j);
    ScoreOptions sopts;
    sopts.epsilon = cfg.epsilon;

    const auto before = predict_batch(params, q, latent.sim_renorm, pairs, sopts);
    for (double& v : params.student_emb.row_span(student)) v += 0.1;
    const auto after = predict_batch(params, q, latent.sim_renorm, pairs, sopts);
    for (size_t i = 0; i < pairs.size(); ++i) {
      ++comparisons;
      if (after[i].combined < before[i].combined) ++violations;
    }
  }
  Outcome o;
  o.pass = violations == 0;
  o.detail = std::to_string(violations) + " violations over " +
             std::to_string(comparisons) + " comparisons";
  return o;
}

// ------------------------------------------------------------ criterion 3

Outcome criterion_latent_structure() {
  Rng rng(0xacc3);
  long long violations = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int k = 3 + rng.uniform_int(10);
    const int top_p = 1 + rng.uniform_int(std::max(1, k - 1));
    ModelConfig cfg;
    cfg.dim = 2 + rng.uniform_int(4);
    cfg.heads = 1 + rng.uniform_int(3);
    cfg.top_p = std::min(top_p, k - 1 > 0 ? k - 1 : 1);
    auto params = init_params(cfg, 1, 1, k, rng.next());

    ConceptGraph graph;
    graph.n_concepts = k;
    for (int i = 0; i < k; ++i)
      for (int j = i + 1; j < k; ++j)
        if (rng.uniform() < 0.4)
          graph.edges.push_back({i, j, rng.uniform() < 0.5 ? EdgeKind::similarity
                                                           : EdgeKind::prerequisite});

    const auto mask = build_mask(graph);
    const auto nbrs = neighbor_lists(build_adjacency(graph));
    LatentOptions lopts;
    lopts.top_p = cfg.top_p;
    const auto st = compute_latent(params, nbrs, mask, lopts);

    for (int i = 0; i < k; ++i) {
      int associated = 0;
      for (int j = 0; j < k; ++j) associated += mask.at(i, j);
      int nonzeros = 0;
      double row_sum = 0.0;
      for (int j = 0; j < k; ++j) {
        const double v = st.sim_renorm(i, j);
        if (v < 0.0) ++violations;
        if (v != 0.0) {
          ++nonzeros;
          row_sum += v;
        }
      }
      if (associated == 0) {
        if (nonzeros != 0) ++violations;
      } else {
        if (nonzeros != std::min(cfg.top_p, associated)) ++violations;
        if (std::fabs(row_sum - 1.0) > 1e-6) ++violations;
      }
    }

    QMatrix q;
    q.n_exercises = 4;
    q.n_concepts = k;
    q.concepts_of.resize(4);
    for (int j = 0; j < 4; ++j) {
      q.concepts_of[j].push_back(rng.uniform_int(k));
      if (rng.uniform() < 0.6) q.concepts_of[j].push_back(rng.uniform_int(k));
      std::sort(q.concepts_of[j].begin(), q.concepts_of[j].end());
      q.concepts_of[j].erase(
          std::unique(q.concepts_of[j].begin(), q.concepts_of[j].end()),
          q.concepts_of[j].end());
    }
    const auto lq = latent_q(q, st.sim_renorm);
    for (int j = 0; j < 4; ++j) {
      double row_sum = 0.0;
      for (int c = 0; c < k; ++c) {
        if (lq(j, c) < 0.0) ++violations;
        row_sum += lq(j, c);
      }
      if (row_sum > static_cast<double>(q.concepts_of[j].size()) + 1e-6) ++violations;
    }
  }

  // worked value: row (0.9, 0.5, 0.1), P = 2 -> (0.5987, 0.4013, 0)
  Matrix s(4, 4);
  s(0, 1) = 0.9;
  s(0, 2) = 0.5;
  s(0, 3) = 0.1;
  BoolMatrix mask(4);
  mask.at(0, 1) = mask.at(0, 2) = mask.at(0, 3) = 1;
  const auto renorm = top_p_renormalize(s, mask, 2);
  if (std::fabs(renorm(0, 1) - 0.5987) > 1e-4) ++violations;
  if (std::fabs(renorm(0, 2) - 0.4013) > 1e-4) ++violations;
  if (renorm(0, 3) != 0.0) ++violations;

  Outcome o;
  o.pass = violations == 0;
  o.detail = std::to_string(violations) + " structural violations; worked row (" +
             std::to_string(renorm(0, 1)) + ", " + std::to_string(renorm(0, 2)) + ", 0)";
  return o;
}

// ------------------------------------------------------------ criterion 4

Outcome criterion_metric_oracles() {
  Rng rng(0xacc4);
  double worst_auc = 0.0, worst_acc = 0.0, worst_rmse = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + rng.uniform_int(499);
    std::vector<double> preds(n), labels(n);
    for (int i = 0; i < n; ++i) {
      preds[i] = rng.uniform_int(21) / 20.0;  // quantized: ties guaranteed
      labels[i] = static_cast<double>(rng.uniform_int(2));
    }
    labels[0] = 1.0;
    if (n > 1) labels[1] = 0.0;

    const auto m = compute_metrics(preds, labels);

    double wins = 0.0;
    long long pairs = 0;
    long long correct = 0;
    double sq = 0.0;
    for (int i = 0; i < n; ++i) {
      correct += (preds[i] >= 0.5 ? 1.0 : 0.0) == labels[i];
      sq += (preds[i] - labels[i]) * (preds[i] - labels[i]);
      if (labels[i] != 1.0) continue;
      for (int j = 0; j < n; ++j) {
        if (labels[j] != 0.0) continue;
        ++pairs;
        wins += preds[i] > preds[j] ? 1.0 : (preds[i] == preds[j] ? 0.5 : 0.0);
      }
    }
    worst_auc = std::max(worst_auc, std::fabs(m.auc - 100.0 * wins / pairs));
    worst_acc = std::max(worst_acc, std::fabs(m.acc - 100.0 * correct / n));
    worst_rmse = std::max(worst_rmse, std::fabs(m.rmse - 100.0 * std::sqrt(sq / n)));
  }
  Outcome o;
  o.pass = worst_auc < 1e-9 && worst_acc < 1e-12 && worst_rmse < 1e-12;
  std::ostringstream os;
  os << "max |delta| auc " << worst_auc << ", acc " << worst_acc << ", rmse " << worst_rmse;
  o.detail = os.str();
  return o;
}

// ------------------------------------------------------------ criterion 5

Outcome criterion_combination_identities() {
  auto truth = gen_world(40, 25, 8, 5, 0.1, 0.1);
  auto data = make_dataset(truth, gen_responses(truth, 20, 5));
  ModelConfig cfg = base_config(5);
  cfg.dim = 6;
  cfg.heads = 2;
  cfg.top_p = 4;
  cfg.epochs = 4;
  cfg.batch_size = 128;

  long long mismatches = 0;

  // epsilon = 1 reproduces the explicit-only pipeline bit-exactly
  {
    auto c1 = cfg;
    c1.epsilon = 1.0;
    auto direct = run_experiment(data, truth.graph, c1);
    auto viaVariant = apply_variant(cfg, AblationVariant::no_cdlk);
    auto ablated = run_experiment(data, truth.graph, viaVariant);
    if (!(direct.training.state.params == ablated.training.state.params)) ++mismatches;
    if (direct.test.acc != ablated.test.acc || direct.test.auc != ablated.test.auc)
      ++mismatches;

    const GraphContext ctx = GraphContext::build(truth.graph);
    LatentOptions lopts;
    lopts.top_p = c1.top_p;
    const auto latent =
        compute_latent(direct.training.state.inference_params(), ctx.nbrs, ctx.mask, lopts);
    std::vector<std::pair<int, int>> pairs;
    for (const auto& log : direct.split.test) pairs.emplace_back(log.student, log.exercise);
    const auto preds = predict_batch(direct.training.state.inference_params(), data.q,
                                     latent.sim_renorm, pairs, ScoreOptions::from_config(c1));
    for (const auto& p : preds)
      if (p.combined != p.explicit_prob) ++mismatches;
  }

  // epsilon = 0 reproduces the latent-only pipeline bit-exactly
  {
    auto c0 = cfg;
    c0.epsilon = 0.0;
    auto direct = run_experiment(data, truth.graph, c0);
    auto ablated = run_experiment(data, truth.graph, apply_variant(cfg, AblationVariant::no_cdek));
    if (!(direct.training.state.params == ablated.training.state.params)) ++mismatches;

    const GraphContext ctx = GraphContext::build(truth.graph);
    LatentOptions lopts;
    lopts.top_p = c0.top_p;
    const auto latent =
        compute_latent(direct.training.state.inference_params(), ctx.nbrs, ctx.mask, lopts);
    std::vector<std::pair<int, int>> pairs;
    for (const auto& log : direct.split.test) pairs.emplace_back(log.student, log.exercise);
    const auto preds = predict_batch(direct.training.state.inference_params(), data.q,
                                     latent.sim_renorm, pairs, ScoreOptions::from_config(c0));
    for (const auto& p : preds)
      if (p.combined != p.latent_prob) ++mismatches;

    // the explicit-only run above must also never have moved the GAT tensors
    auto c1 = cfg;
    c1.epsilon = 1.0;
    auto explicit_run = train(data, truth.graph, c1, direct.split.train);
    auto fresh = init_params(c1, data.n_students, data.n_exercises, data.n_concepts, c1.seed);
    for (int h = 0; h < fresh.heads; ++h) {
      if (!(explicit_run.state.params.gat_w[h] == fresh.gat_w[h])) ++mismatches;
      if (!(explicit_run.state.params.gat_a[h] == fresh.gat_a[h])) ++mismatches;
    }
  }

  Outcome o;
  o.pass = mismatches == 0;
  o.detail = std::to_string(mismatches) + " bit-exactness mismatches";
  return o;
}

// ------------------------------------------------------------ criterion 6

struct RecoveryRun {
  double auc = 0.0;
  double pooled = 0.0;
};

RecoveryRun recovery_run(uint64_t seed) {
  auto w = make_world(seed);
  ModelConfig cfg = base_config(seed);
  auto split = split_logs(w.data, cfg.train_fraction, cfg.seed);
  auto tr = train(w.data, w.truth.graph, cfg, split.train);
  auto report = recovery_score(tr.state, w.truth, split.test);
  return {report.test.auc, report.pooled_rank_correlation};
}

Outcome criterion_synthetic_recovery() {
  std::vector<double> aucs, pooled;
  for (uint64_t seed : {1, 2, 3}) {
    const auto run = recovery_run(seed);
    aucs.push_back(run.auc);
    pooled.push_back(run.pooled);
  }
  const double med_auc = median3(aucs[0], aucs[1], aucs[2]);
  const double med_pooled = median3(pooled[0], pooled[1], pooled[2]);
  Outcome o;
  o.pass = med_auc >= 80.0 && med_pooled >= 0.5;
  std::ostringstream os;
  os << "median test AUC " << med_auc << " (>= 80), median pooled rank corr " << med_pooled
     << " (>= 0.5)";
  o.detail = os.str();
  return o;
}

// ------------------------------------------------------------ criterion 7

Outcome criterion_coverage_robustness() {
  const double fractions[] = {1.0, 0.4};
  std::vector<double> cleki_drop, irt_drop;
  std::ostringstream per_seed;
  for (uint64_t seed : {1, 2, 3}) {
    auto w = make_world(seed);
    ModelConfig cfg = base_config(seed);
    auto cleki_curve = coverage_sweep(w.data, w.truth.graph, cfg, fractions, ModelKind::cleki);
    auto irt_curve = coverage_sweep(w.data, w.truth.graph, cfg, fractions, ModelKind::irt);
    cleki_drop.push_back(cleki_curve[0].metrics.acc - cleki_curve[1].metrics.acc);
    irt_drop.push_back(irt_curve[0].metrics.acc - irt_curve[1].metrics.acc);
    per_seed << " s" << seed << ":" << cleki_drop.back() << "/" << irt_drop.back();
  }
  const double med_cleki = median3(cleki_drop[0], cleki_drop[1], cleki_drop[2]);
  const double med_irt = median3(irt_drop[0], irt_drop[1], irt_drop[2]);
  Outcome o;
  o.pass = med_cleki <= med_irt;
  std::ostringstream os;
  os << "median ACC drop 1.0->0.4: cleki " << med_cleki << " vs irt " << med_irt
     << " (per-seed cleki/irt:" << per_seed.str() << ")";
  o.detail = os.str();
  return o;
}

// ------------------------------------------------------------ criterion 8

Outcome criterion_hyper_trends() {
  const double eps_values[] = {0.0, 0.5, 1.0};
  const double p_values[] = {1.0, 4.0, 8.0, 16.0};
  std::vector<std::vector<double>> eps_acc(3), p_acc(4);

  for (uint64_t seed : {1, 2, 3}) {
    auto w = make_world(seed);
    ModelConfig cfg = base_config(seed);
    auto eps_rows = hyper_sweep(w.data, w.truth.graph, cfg, SweepKnob::epsilon, eps_values);
    for (size_t i = 0; i < 3; ++i) eps_acc[i].push_back(eps_rows[i].metrics.acc);
    auto p_rows = hyper_sweep(w.data, w.truth.graph, cfg, SweepKnob::top_p, p_values);
    for (size_t i = 0; i < 4; ++i) p_acc[i].push_back(p_rows[i].metrics.acc);
  }

  auto med = [&](std::vector<double>& v) { return median3(v[0], v[1], v[2]); };
  const double eps0 = med(eps_acc[0]), eps_half = med(eps_acc[1]), eps1 = med(eps_acc[2]);
  const bool eps_ok = eps_half >= std::min(eps0, eps1);

  double best = -1.0;
  size_t best_idx = 0;
  std::ostringstream ptrace;
  for (size_t i = 0; i < 4; ++i) {
    const double acc = med(p_acc[i]);
    ptrace << (i ? ", " : "") << "P=" << p_values[i] << ":" << acc;
    if (acc > best) {
      best = acc;
      best_idx = i;
    }
  }
  const bool p_ok = best_idx != 0 && best_idx != 3;

  Outcome o;
  o.pass = eps_ok && p_ok;
  std::ostringstream os;
  os << "eps ACC {0:" << eps0 << ", 0.5:" << eps_half << ", 1:" << eps1 << "} "
     << (eps_ok ? "ok" : "violated") << "; P sweep {" << ptrace.str() << "} best interior "
     << (p_ok ? "ok" : "violated");
  o.detail = os.str();
  return o;
}

// ------------------------------------------------------------ criterion 9

Outcome criterion_real_data() {
  const char* logs = std::getenv("CLEKI_ASSIST_LOGS");
  const char* q = std::getenv("CLEKI_ASSIST_Q");
  const char* graph = std::getenv("CLEKI_ASSIST_GRAPH");
  Outcome o;
  if (!logs || !q || !graph) {
    o.skipped = true;
    o.detail = "ASSIST data not provisioned (set CLEKI_ASSIST_LOGS/_Q/_GRAPH)";
    return o;
  }
  Bundle bundle = load_bundle(logs, q, graph);
  bundle.data = filter_students(bundle.data, 15);
  ModelConfig cfg = base_config(1);
  cfg.train_fraction = 0.8;
  auto result = run_experiment(bundle.data, bundle.graph, cfg);
  o.pass = std::fabs(result.test.acc - 74.35) <= 2.0 && std::fabs(result.test.auc - 77.89) <= 2.0;
  std::ostringstream os;
  os << "acc " << result.test.acc << " (target 74.35 +- 2), auc " << result.test.auc
     << " (target 77.89 +- 2)";
  o.detail = os.str();
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int number;
    const char* name;
    std::function<Outcome()> fn;
  };
  const std::vector<Criterion> criteria = {
      {1, "gradient fidelity", criterion_gradient_fidelity},
      {2, "monotonicity suite", criterion_monotonicity},
      {3, "latent-Q structure", criterion_latent_structure},
      {4, "metric oracles", criterion_metric_oracles},
      {5, "combination identities", criterion_combination_identities},
      {6, "synthetic recovery", criterion_synthetic_recovery},
      {7, "coverage robustness", criterion_coverage_robustness},
      {8, "hyperparameter trends", criterion_hyper_trends},
      {9, "real-data reproduction", criterion_real_data},
  };

  int required_failures = 0;
  for (const auto& criterion : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criterion.fn();
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.detail = std::string("exception: ") + e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const char* verdict = outcome.skipped ? "SKIP" : (outcome.pass ? "PASS" : "FAIL");
    std::cout << "[" << verdict << "] criterion " << criterion.number << " ("
              << criterion.name << "): " << outcome.detail << " [" << seconds << "s]"
              << std::endl;

    if (!outcome.pass && !outcome.skipped && criterion.number <= 8) ++required_failures;
  }

  if (required_failures > 0)
    std::cout << required_failures << " required criteria failed" << std::endl;
  else
    std::cout << "all required criteria passed" << std::endl;
  return required_failures;
}
