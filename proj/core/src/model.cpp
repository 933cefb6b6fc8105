#include "cleki/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "cleki/errors.hpp"
#include "cleki/rng.hpp"
#include "delimited.hpp"

namespace cleki {

void ModelConfig::validate(int n_concepts) const {
  if (dim < 1) throw DataError("config: dim must be >= 1");
  if (heads < 1) throw DataError("config: heads must be >= 1");
  if (top_p < 1 || (n_concepts > 1 && top_p > n_concepts - 1))
    throw DataError("config: top_p must be in [1, K-1], got " + std::to_string(top_p) +
                    " with K = " + std::to_string(n_concepts));
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw DataError("config: epsilon must be in [0, 1]");
  if (!(learning_rate > 0.0)) throw DataError("config: learning_rate must be > 0");
  if (batch_size < 1) throw DataError("config: batch_size must be >= 1");
  if (epochs < 1) throw DataError("config: epochs must be >= 1");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw DataError("config: train_fraction must be in (0, 1)");
  if (!(val_fraction >= 0.0 && val_fraction < 1.0))
    throw DataError("config: val_fraction must be in [0, 1)");
}

namespace {

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw DataError("config: bad boolean value '" + v + "'");
}

}  // namespace

ModelConfig load_model_config(const std::string& path, ModelConfig base) {
  auto in = detail::open_or_throw(path);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      bool blank = line.find_first_not_of(" \t\r") == std::string::npos;
      if (!blank)
        throw DataError(path + ": expected key = value at line " + std::to_string(line_no));
      continue;
    }
    auto trim = [](std::string s) {
      const size_t b = s.find_first_not_of(" \t\r");
      const size_t e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "dim") base.dim = std::stoi(value);
      else if (key == "heads") base.heads = std::stoi(value);
      else if (key == "top_p") base.top_p = std::stoi(value);
      else if (key == "epsilon") base.epsilon = std::stod(value);
      else if (key == "learning_rate") base.learning_rate = std::stod(value);
      else if (key == "batch_size") base.batch_size = std::stoi(value);
      else if (key == "epochs") base.epochs = std::stoi(value);
      else if (key == "seed") base.seed = std::stoull(value);
      else if (key == "leaky_slope") base.leaky_slope = std::stod(value);
      else if (key == "patience") base.patience = std::stoi(value);
      else if (key == "train_fraction") base.train_fraction = std::stod(value);
      else if (key == "val_fraction") base.val_fraction = std::stod(value);
      else if (key == "latent_per_epoch") base.latent_per_epoch = parse_bool(value);
      else if (key == "latent_nonzero_denominator")
        base.latent_nonzero_denominator = parse_bool(value);
      else if (key == "zero_explicit_latent") base.zero_explicit_latent = parse_bool(value);
      else if (key == "loss_mean") base.loss_mean = parse_bool(value);
      else if (key == "prereq_flow_reverse") base.prereq_flow_reverse = parse_bool(value);
      else if (key == "uniform_attention") base.uniform_attention = parse_bool(value);
      else throw DataError(path + ": unknown config key '" + key + "'");
    } catch (const DataError&) {
      throw;
    } catch (...) {
      throw DataError(path + ": bad value for '" + key + "' at line " + std::to_string(line_no));
    }
  }
  return base;
}

std::string format_model_config(const ModelConfig& c) {
  std::ostringstream os;
  os << "dim = " << c.dim << "\n"
     << "heads = " << c.heads << "\n"
     << "top_p = " << c.top_p << "\n"
     << "epsilon = " << c.epsilon << "\n"
     << "learning_rate = " << c.learning_rate << "\n"
     << "batch_size = " << c.batch_size << "\n"
     << "epochs = " << c.epochs << "\n"
     << "seed = " << c.seed << "\n"
     << "leaky_slope = " << c.leaky_slope << "\n"
     << "patience = " << c.patience << "\n"
     << "train_fraction = " << c.train_fraction << "\n"
     << "val_fraction = " << c.val_fraction << "\n"
     << "latent_per_epoch = " << (c.latent_per_epoch ? "true" : "false") << "\n"
     << "latent_nonzero_denominator = " << (c.latent_nonzero_denominator ? "true" : "false")
     << "\n"
     << "zero_explicit_latent = " << (c.zero_explicit_latent ? "true" : "false") << "\n"
     << "loss_mean = " << (c.loss_mean ? "true" : "false") << "\n"
     << "prereq_flow_reverse = " << (c.prereq_flow_reverse ? "true" : "false") << "\n"
     << "uniform_attention = " << (c.uniform_attention ? "true" : "false") << "\n";
  return os.str();
}

ModelParams init_params(const ModelConfig& config, int n_students, int n_exercises,
                        int n_concepts, uint64_t seed) {
  if (n_students < 1 || n_exercises < 1 || n_concepts < 1 || config.dim < 1 ||
      config.heads < 1)
    throw DataError("init_params: dimensions must be positive");

  const int d = config.dim;
  const int h = config.heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  Rng rng(mix_seed(seed, 0x100));

  ModelParams p;
  p.n_students = n_students;
  p.n_exercises = n_exercises;
  p.n_concepts = n_concepts;
  p.dim = d;
  p.heads = h;

  auto fill_normal = [&](Matrix& m, double s) {
    for (double& x : m.storage()) x = s * rng.normal();
  };

  p.concept_emb = Matrix(n_concepts, d);
  fill_normal(p.concept_emb, scale);
  // student/exercise rows start close to the shared prior: rows an update
  // never touches then predict from the trained transforms instead of noise
  p.student_emb = Matrix(n_students, n_concepts * d);
  fill_normal(p.student_emb, 0.1 * scale);
  p.exercise_emb = Matrix(n_exercises, n_concepts * d);
  fill_normal(p.exercise_emb, 0.1 * scale);

  p.w1 = Matrix(d, d);
  fill_normal(p.w1, scale);
  for (double& x : p.w1.storage()) x = std::fabs(x);
  p.b1.assign(d, 0.0);
  p.w2 = Matrix(d, d);
  fill_normal(p.w2, scale);
  for (double& x : p.w2.storage()) x = std::fabs(x);
  p.b2.assign(d, 0.0);

  const double a_scale = 1.0 / std::sqrt(2.0 * d);
  p.gat_w.resize(h);
  p.gat_a.resize(h);
  for (int i = 0; i < h; ++i) {
    p.gat_w[i] = Matrix(d, d);
    fill_normal(p.gat_w[i], scale);
    p.gat_a[i].assign(2 * d, 0.0);
    for (double& x : p.gat_a[i]) x = a_scale * rng.normal();
  }
  return p;
}

Matrix proficiency_from_rows(std::span<const double> flat_kd, int n_concepts, int dim,
                             const Matrix& w, std::span<const double> b) {
  Matrix out(n_concepts, dim);
  for (int k = 0; k < n_concepts; ++k) {
    affine_row(flat_kd.subspan(static_cast<size_t>(k) * dim, dim), w, b, out.row_span(k));
    for (int c = 0; c < dim; ++c) out(k, c) = sigmoid(out(k, c));
  }
  return out;
}

Matrix student_proficiency(const ModelParams& params, int student) {
  if (student < 0 || student >= params.n_students)
    throw DataError("student index out of range: " + std::to_string(student));
  return proficiency_from_rows(params.student_row(student), params.n_concepts, params.dim,
                               params.w1, params.b1);
}

Matrix exercise_difficulty(const ModelParams& params, int exercise) {
  if (exercise < 0 || exercise >= params.n_exercises)
    throw DataError("exercise index out of range: " + std::to_string(exercise));
  return proficiency_from_rows(params.exercise_row(exercise), params.n_concepts, params.dim,
                               params.w2, params.b2);
}

std::vector<double> concept_scalar(const Matrix& kd) {
  std::vector<double> out(kd.rows());
  for (int k = 0; k < kd.rows(); ++k) out[k] = l2_norm(kd.row_span(k));
  return out;
}

void project_positive(ModelParams& params) {
  for (double& x : params.w1.storage())
    if (x < 0.0) x = 0.0;
  for (double& x : params.w2.storage())
    if (x < 0.0) x = 0.0;
}

}  // namespace cleki
