#include "cleki/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>

#include "cleki/errors.hpp"
#include "cleki/evaluation.hpp"
#include "cleki/rng.hpp"

namespace cleki {

namespace {

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

}  // namespace

GroundTruth gen_world(int n_students, int n_exercises, int n_concepts, uint64_t seed,
                      double slip, double guess) {
  if (n_students < 1 || n_exercises < 1 || n_concepts < 1)
    throw DataError("gen_world: dimensions must be >= 1");
  if (!(slip >= 0.0 && slip < 0.5) || !(guess >= 0.0 && guess < 0.5))
    throw DataError("gen_world: slip and guess must be in [0, 0.5)");

  GroundTruth truth;
  truth.n_students = n_students;
  truth.n_exercises = n_exercises;
  truth.n_concepts = n_concepts;
  truth.slip = slip;
  truth.guess = guess;

  Rng rng(mix_seed(seed, 0x5e1));

  // prerequisite chain along the concept order plus a few skips; acyclic
  // because edges only point from lower to higher index
  ConceptGraph& graph = truth.graph;
  graph.n_concepts = n_concepts;
  for (int c = 1; c < n_concepts; ++c)
    graph.edges.push_back({c - 1, c, EdgeKind::prerequisite});
  // similarity between index-adjacent concepts, then densify associations
  for (int c = 0; c + 2 < n_concepts; ++c)
    graph.edges.push_back({c, c + 2, EdgeKind::similarity});
  for (int i = 0; i < n_concepts; ++i)
    for (int j = i + 3; j < n_concepts; ++j)
      if (rng.uniform() < 0.85) graph.edges.push_back({i, j, EdgeKind::similarity});

  // mastery: overall ability, a focus region on the concept circle (students
  // are strong near their focus and weaker opposite it), and a gently
  // declining walk down the prerequisite order
  truth.mastery = Matrix(n_students, n_concepts);
  truth.focus.resize(n_students);
  constexpr double kFocusAmp = 0.22;
  for (int s = 0; s < n_students; ++s) {
    const double ability = rng.uniform(0.2, 0.8);
    const double focus = rng.uniform(0.0, static_cast<double>(n_concepts));
    truth.focus[s] = focus;
    double walk = 0.0;
    for (int c = 0; c < n_concepts; ++c) {
      if (c > 0) walk += -std::fabs(0.02 * rng.normal()) + 0.008 * rng.normal();
      const double dev =
          kFocusAmp * std::cos(2.0 * std::numbers::pi * (c - focus) / n_concepts);
      truth.mastery(s, c) = clamp01(ability + dev + walk + 0.015 * rng.normal());
    }
  }

  // difficulty tracks the per-concept mastery spread so that whether a given
  // student clears a given exercise is informative rather than lopsided
  std::vector<double> mean_c(n_concepts, 0.0), sd_c(n_concepts, 0.0);
  for (int c = 0; c < n_concepts; ++c) {
    for (int s = 0; s < n_students; ++s) mean_c[c] += truth.mastery(s, c);
    mean_c[c] /= n_students;
    for (int s = 0; s < n_students; ++s) {
      const double d = truth.mastery(s, c) - mean_c[c];
      sd_c[c] += d * d;
    }
    sd_c[c] = std::max(0.1, std::sqrt(sd_c[c] / n_students));
  }
  truth.difficulty = Matrix(n_exercises, n_concepts);
  for (int e = 0; e < n_exercises; ++e) {
    const double level = rng.normal();  // exercise-wide difficulty quantile
    for (int c = 0; c < n_concepts; ++c)
      truth.difficulty(e, c) = clamp01(mean_c[c] + level * sd_c[c] + 0.1 * rng.normal());
  }

  // exercises tag 1-3 concepts clustered around an anchor
  truth.q.n_exercises = n_exercises;
  truth.q.n_concepts = n_concepts;
  truth.q.concepts_of.resize(n_exercises);
  for (int j = 0; j < n_exercises; ++j) {
    const int anchor = rng.uniform_int(n_concepts);
    auto& tags = truth.q.concepts_of[j];
    tags.push_back(anchor);
    const int extra = rng.uniform_int(3);  // 0, 1 or 2 additional concepts
    for (int t = 0; t < extra; ++t) {
      const int offset = 1 + rng.uniform_int(2);
      const int c = rng.uniform() < 0.5 ? anchor - offset : anchor + offset;
      if (c >= 0 && c < n_concepts) tags.push_back(c);
    }
    std::sort(tags.begin(), tags.end());
    tags.erase(std::unique(tags.begin(), tags.end()), tags.end());
  }
  return truth;
}

std::vector<ResponseLog> gen_responses(const GroundTruth& truth, int logs_per_student,
                                       uint64_t seed) {
  Rng rng(mix_seed(seed, 0x9d2));
  std::vector<ResponseLog> logs;
  logs.reserve(static_cast<size_t>(truth.n_students) * logs_per_student);
  for (int s = 0; s < truth.n_students; ++s) {
    for (int t = 0; t < logs_per_student; ++t) {
      const int e = rng.uniform_int(truth.n_exercises);
      const auto& tags = truth.q.concepts_of[e];
      double gap = 0.0;
      for (int c : tags) gap += truth.mastery(s, c) - truth.difficulty(e, c);
      gap /= static_cast<double>(tags.size());
      const double p_correct = gap > 0.0 ? 1.0 - truth.slip : truth.guess;
      logs.push_back({s, e, rng.uniform() < p_correct ? 1 : 0});
    }
  }
  return logs;
}

Dataset make_dataset(const GroundTruth& truth, std::vector<ResponseLog> logs) {
  Dataset ds;
  ds.n_students = truth.n_students;
  ds.n_exercises = truth.n_exercises;
  ds.n_concepts = truth.n_concepts;
  ds.logs = std::move(logs);
  ds.q = truth.q;
  for (int i = 0; i < ds.n_students; ++i) ds.student_ids.add(i);
  for (int j = 0; j < ds.n_exercises; ++j) ds.exercise_ids.add(j);
  for (int k = 0; k < ds.n_concepts; ++k) ds.concept_ids.add(k);
  ds.exercise_has_logs.assign(ds.n_exercises, 0);
  for (const auto& log : ds.logs) ds.exercise_has_logs[log.exercise] = 1;
  return ds;
}

double rank_correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2)
    throw DataError("rank_correlation: need two equal-length samples");
  const size_t n = a.size();

  auto midranks = [n](std::span<const double> x) {
    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](size_t p, size_t q) { return x[p] < x[q]; });
    std::vector<double> rank(n);
    size_t i = 0;
    while (i < n) {
      size_t j = i;
      while (j < n && x[idx[j]] == x[idx[i]]) ++j;
      const double mid = 0.5 * static_cast<double>(i + 1 + j);
      for (size_t k = i; k < j; ++k) rank[idx[k]] = mid;
      i = j;
    }
    return rank;
  };

  const auto ra = midranks(a);
  const auto rb = midranks(b);
  double mean = (static_cast<double>(n) + 1.0) / 2.0;
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double da = ra[i] - mean;
    const double db = rb[i] - mean;
    cov += da * db;
    va += da * da;
    vb += db * db;
  }
  if (va == 0.0 || vb == 0.0) return 0.0;
  return cov / std::sqrt(va * vb);
}

RecoveryReport recovery_score(const TrainState& state, const GroundTruth& truth,
                              std::span<const ResponseLog> test_logs) {
  const ModelParams& params = state.inference_params();
  if (params.n_students != truth.n_students || params.n_concepts != truth.n_concepts)
    throw DataError("recovery_score: state does not match the world");

  Matrix learned(truth.n_students, truth.n_concepts);
  for (int s = 0; s < truth.n_students; ++s) {
    const auto scalars = concept_scalar(student_proficiency(params, s));
    std::copy(scalars.begin(), scalars.end(), learned.row(s));
  }

  RecoveryReport report;
  report.pooled_rank_correlation =
      rank_correlation({learned.data(), learned.size()},
                       {truth.mastery.data(), truth.mastery.size()});

  report.per_concept.resize(truth.n_concepts);
  std::vector<double> col_l(truth.n_students), col_t(truth.n_students);
  for (int k = 0; k < truth.n_concepts; ++k) {
    for (int s = 0; s < truth.n_students; ++s) {
      col_l[s] = learned(s, k);
      col_t[s] = truth.mastery(s, k);
    }
    report.per_concept[k] = rank_correlation(col_l, col_t);
  }

  if (!test_logs.empty())
    report.test = evaluate(state, truth.graph, truth.q, test_logs).metrics;
  return report;
}

void write_world(const GroundTruth& truth, const std::string& dir) {
  {
    std::ofstream out(dir + "/q.csv");
    if (!out) throw DataError("cannot write file: " + dir + "/q.csv");
    out << "exercise_id,concept_id,value\n";
    for (int j = 0; j < truth.n_exercises; ++j)
      for (int c : truth.q.concepts_of[j]) out << j << ',' << c << ",1\n";
  }
  {
    IdMap ids;
    for (int k = 0; k < truth.n_concepts; ++k) ids.add(k);
    write_concept_edges(dir + "/graph.csv", truth.graph, ids);
  }
  auto dump = [&](const std::string& name, const Matrix& m, const char* id_col) {
    std::ofstream out(dir + "/" + name);
    if (!out) throw DataError("cannot write file: " + dir + "/" + name);
    out.precision(10);
    out << id_col;
    for (int k = 0; k < m.cols(); ++k) out << ",c" << k;
    out << '\n';
    for (int r = 0; r < m.rows(); ++r) {
      out << r;
      for (int k = 0; k < m.cols(); ++k) out << ',' << m(r, k);
      out << '\n';
    }
  };
  dump("mastery.csv", truth.mastery, "student_id");
  dump("difficulty.csv", truth.difficulty, "exercise_id");
}

}  // namespace cleki
