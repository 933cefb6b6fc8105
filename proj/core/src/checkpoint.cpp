// Binary checkpoint container: named tensors, config, id maps, optimizer
// moments and rng state. Round-trips bit-exactly.
#include <cstring>
#include <fstream>

#include "cleki/errors.hpp"
#include "cleki/training.hpp"

namespace cleki {

namespace {

constexpr char kMagic[8] = {'C', 'L', 'E', 'K', 'I', 'C', 'P', '1'};
constexpr uint32_t kVersion = 1;

void put_bytes(std::ostream& out, const void* p, size_t n) {
  out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}
void get_bytes(std::istream& in, void* p, size_t n) {
  in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (!in) throw RunError("corrupt checkpoint: unexpected end of file");
}

template <class T>
void put(std::ostream& out, T v) {
  put_bytes(out, &v, sizeof(T));
}
template <class T>
T get(std::istream& in) {
  T v;
  get_bytes(in, &v, sizeof(T));
  return v;
}

void put_string(std::ostream& out, const std::string& s) {
  put<uint32_t>(out, static_cast<uint32_t>(s.size()));
  put_bytes(out, s.data(), s.size());
}
std::string get_string(std::istream& in) {
  const uint32_t n = get<uint32_t>(in);
  if (n > (1u << 20)) throw RunError("corrupt checkpoint: oversized string");
  std::string s(n, '\0');
  if (n) get_bytes(in, s.data(), n);
  return s;
}

void put_tensor(std::ostream& out, const std::string& name, std::span<const double> data,
                std::initializer_list<long long> dims) {
  put_string(out, name);
  put<uint32_t>(out, static_cast<uint32_t>(dims.size()));
  size_t expect = 1;
  for (long long d : dims) {
    put<int64_t>(out, d);
    expect *= static_cast<size_t>(d);
  }
  if (expect != data.size()) throw RunError("checkpoint: tensor shape mismatch on write");
  put_bytes(out, data.data(), data.size() * sizeof(double));
}

std::vector<double> get_tensor(std::istream& in, const std::string& expected_name,
                               std::vector<long long>& dims_out) {
  const std::string name = get_string(in);
  if (name != expected_name)
    throw RunError("corrupt checkpoint: expected tensor '" + expected_name + "', found '" +
                   name + "'");
  const uint32_t ndims = get<uint32_t>(in);
  if (ndims > 4) throw RunError("corrupt checkpoint: bad tensor rank");
  dims_out.clear();
  size_t total = 1;
  for (uint32_t i = 0; i < ndims; ++i) {
    const int64_t d = get<int64_t>(in);
    if (d < 0 || d > (1LL << 32)) throw RunError("corrupt checkpoint: bad tensor dim");
    dims_out.push_back(d);
    total *= static_cast<size_t>(d);
  }
  std::vector<double> data(total);
  if (total) get_bytes(in, data.data(), total * sizeof(double));
  return data;
}

void put_params(std::ostream& out, const ModelParams& p, const std::string& prefix) {
  put_tensor(out, prefix + "concept_emb", {p.concept_emb.data(), p.concept_emb.size()},
             {p.n_concepts, p.dim});
  put_tensor(out, prefix + "student_emb", {p.student_emb.data(), p.student_emb.size()},
             {p.n_students, static_cast<long long>(p.n_concepts) * p.dim});
  put_tensor(out, prefix + "exercise_emb", {p.exercise_emb.data(), p.exercise_emb.size()},
             {p.n_exercises, static_cast<long long>(p.n_concepts) * p.dim});
  put_tensor(out, prefix + "w1", {p.w1.data(), p.w1.size()}, {p.dim, p.dim});
  put_tensor(out, prefix + "b1", p.b1, {p.dim});
  put_tensor(out, prefix + "w2", {p.w2.data(), p.w2.size()}, {p.dim, p.dim});
  put_tensor(out, prefix + "b2", p.b2, {p.dim});
  for (int h = 0; h < p.heads; ++h) {
    put_tensor(out, prefix + "gat_w" + std::to_string(h),
               {p.gat_w[h].data(), p.gat_w[h].size()}, {p.dim, p.dim});
    put_tensor(out, prefix + "gat_a" + std::to_string(h), p.gat_a[h], {2LL * p.dim});
  }
}

ModelParams get_params(std::istream& in, int n_students, int n_exercises, int n_concepts,
                       int dim, int heads, const std::string& prefix) {
  ModelParams p;
  p.n_students = n_students;
  p.n_exercises = n_exercises;
  p.n_concepts = n_concepts;
  p.dim = dim;
  p.heads = heads;

  std::vector<long long> dims;
  auto load_matrix = [&](const std::string& name, int rows, int cols) {
    auto data = get_tensor(in, prefix + name, dims);
    if (dims.size() != 2 || dims[0] != rows || dims[1] != cols)
      throw RunError("corrupt checkpoint: dimension mismatch in " + name);
    Matrix m(rows, cols);
    std::copy(data.begin(), data.end(), m.data());
    return m;
  };
  auto load_vector = [&](const std::string& name, int len) {
    auto data = get_tensor(in, prefix + name, dims);
    if (dims.size() != 1 || dims[0] != len)
      throw RunError("corrupt checkpoint: dimension mismatch in " + name);
    return data;
  };

  const long long kd = static_cast<long long>(n_concepts) * dim;
  p.concept_emb = load_matrix("concept_emb", n_concepts, dim);
  p.student_emb = load_matrix("student_emb", n_students, static_cast<int>(kd));
  p.exercise_emb = load_matrix("exercise_emb", n_exercises, static_cast<int>(kd));
  p.w1 = load_matrix("w1", dim, dim);
  p.b1 = load_vector("b1", dim);
  p.w2 = load_matrix("w2", dim, dim);
  p.b2 = load_vector("b2", dim);
  p.gat_w.resize(heads);
  p.gat_a.resize(heads);
  for (int h = 0; h < heads; ++h) {
    p.gat_w[h] = load_matrix("gat_w" + std::to_string(h), dim, dim);
    p.gat_a[h] = load_vector("gat_a" + std::to_string(h), 2 * dim);
  }
  return p;
}

void put_id_map(std::ostream& out, const IdMap& map) {
  put<uint64_t>(out, map.to_raw.size());
  for (long long raw : map.to_raw) put<int64_t>(out, raw);
}

IdMap get_id_map(std::istream& in) {
  const uint64_t n = get<uint64_t>(in);
  if (n > (1ULL << 32)) throw RunError("corrupt checkpoint: oversized id map");
  IdMap map;
  map.to_raw.reserve(n);
  for (uint64_t i = 0; i < n; ++i) map.add(get<int64_t>(in));
  return map;
}

void put_config(std::ostream& out, const ModelConfig& c) {
  put<int32_t>(out, c.dim);
  put<int32_t>(out, c.heads);
  put<int32_t>(out, c.top_p);
  put<double>(out, c.epsilon);
  put<double>(out, c.learning_rate);
  put<int32_t>(out, c.batch_size);
  put<int32_t>(out, c.epochs);
  put<uint64_t>(out, c.seed);
  put<double>(out, c.leaky_slope);
  put<int32_t>(out, c.patience);
  put<double>(out, c.train_fraction);
  put<double>(out, c.val_fraction);
  put<uint8_t>(out, c.latent_per_epoch);
  put<uint8_t>(out, c.latent_nonzero_denominator);
  put<uint8_t>(out, c.zero_explicit_latent);
  put<uint8_t>(out, c.loss_mean);
  put<uint8_t>(out, c.prereq_flow_reverse);
  put<uint8_t>(out, c.uniform_attention);
}

ModelConfig get_config(std::istream& in) {
  ModelConfig c;
  c.dim = get<int32_t>(in);
  c.heads = get<int32_t>(in);
  c.top_p = get<int32_t>(in);
  c.epsilon = get<double>(in);
  c.learning_rate = get<double>(in);
  c.batch_size = get<int32_t>(in);
  c.epochs = get<int32_t>(in);
  c.seed = get<uint64_t>(in);
  c.leaky_slope = get<double>(in);
  c.patience = get<int32_t>(in);
  c.train_fraction = get<double>(in);
  c.val_fraction = get<double>(in);
  c.latent_per_epoch = get<uint8_t>(in);
  c.latent_nonzero_denominator = get<uint8_t>(in);
  c.zero_explicit_latent = get<uint8_t>(in);
  c.loss_mean = get<uint8_t>(in);
  c.prereq_flow_reverse = get<uint8_t>(in);
  c.uniform_attention = get<uint8_t>(in);
  return c;
}

}  // namespace

void save_checkpoint(const TrainState& state, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint: " + path);

  put_bytes(out, kMagic, sizeof(kMagic));
  put<uint32_t>(out, kVersion);
  put_config(out, state.config);

  const ModelParams& p = state.params;
  put<int32_t>(out, p.n_students);
  put<int32_t>(out, p.n_exercises);
  put<int32_t>(out, p.n_concepts);
  put<int32_t>(out, p.dim);
  put<int32_t>(out, p.heads);

  put_id_map(out, state.student_ids);
  put_id_map(out, state.exercise_ids);
  put_id_map(out, state.concept_ids);

  put<int64_t>(out, state.adam_t);
  put<int64_t>(out, state.epoch);
  put<int64_t>(out, state.step);
  for (uint64_t word : state.rng.state()) put<uint64_t>(out, word);
  put<uint8_t>(out, state.has_best);
  put<double>(out, state.best_val_auc);
  put<int64_t>(out, state.best_epoch);

  put_params(out, state.params, "params/");
  put_params(out, state.opt_m, "adam_m/");
  put_params(out, state.opt_v, "adam_v/");
  if (state.has_best) put_params(out, state.best_params, "best/");

  if (!out) throw DataError("write failed: " + path);
}

TrainState load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RunError("cannot open checkpoint: " + path);

  char magic[8];
  get_bytes(in, magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw RunError("corrupt checkpoint: bad magic in " + path);
  const uint32_t version = get<uint32_t>(in);
  if (version != kVersion)
    throw RunError("checkpoint version mismatch: found " + std::to_string(version) +
                   ", expected " + std::to_string(kVersion));

  TrainState state;
  state.config = get_config(in);

  const int n_students = get<int32_t>(in);
  const int n_exercises = get<int32_t>(in);
  const int n_concepts = get<int32_t>(in);
  const int dim = get<int32_t>(in);
  const int heads = get<int32_t>(in);
  if (n_students < 0 || n_exercises < 0 || n_concepts < 0 || dim < 1 || heads < 1)
    throw RunError("corrupt checkpoint: bad dimensions");

  state.student_ids = get_id_map(in);
  state.exercise_ids = get_id_map(in);
  state.concept_ids = get_id_map(in);

  state.adam_t = get<int64_t>(in);
  state.epoch = get<int64_t>(in);
  state.step = get<int64_t>(in);
  std::array<uint64_t, 4> rng_state;
  for (auto& word : rng_state) word = get<uint64_t>(in);
  state.rng.set_state(rng_state);
  state.has_best = get<uint8_t>(in);
  state.best_val_auc = get<double>(in);
  state.best_epoch = get<int64_t>(in);

  state.params = get_params(in, n_students, n_exercises, n_concepts, dim, heads, "params/");
  state.opt_m = get_params(in, n_students, n_exercises, n_concepts, dim, heads, "adam_m/");
  state.opt_v = get_params(in, n_students, n_exercises, n_concepts, dim, heads, "adam_v/");
  if (state.has_best)
    state.best_params = get_params(in, n_students, n_exercises, n_concepts, dim, heads, "best/");
  return state;
}

}  // namespace cleki
