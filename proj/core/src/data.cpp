#include "cleki/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "cleki/errors.hpp"
#include "cleki/rng.hpp"
#include "delimited.hpp"

namespace cleki {

bool QMatrix::has(int exercise, int concept_id) const {
  const auto& row = concepts_of[exercise];
  return std::binary_search(row.begin(), row.end(), concept_id);
}

long long QMatrix::total_tags() const {
  long long n = 0;
  for (const auto& row : concepts_of) n += static_cast<long long>(row.size());
  return n;
}

namespace {

int find_column(const std::vector<std::string>& header,
                std::initializer_list<const char*> keys) {
  for (int i = 0; i < static_cast<int>(header.size()); ++i) {
    std::string low = header[i];
    std::transform(low.begin(), low.end(), low.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    for (const char* key : keys)
      if (low.find(key) != std::string::npos) return i;
  }
  return -1;
}

long long parse_id(const std::string& field, const char* what, size_t line_no) {
  long long v;
  if (!detail::parse_ll(field, v) || v < 0)
    throw DataError(std::string("bad ") + what + " id '" + field + "' at line " +
                    std::to_string(line_no));
  return v;
}

}  // namespace

LoadedLogs load_response_logs(const std::string& path, const LogSchema& schema) {
  auto in = detail::open_or_throw(path);
  LoadedLogs out;

  std::string line;
  size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    header = detail::split_fields(line);
    if (!header.empty()) break;
  }
  if (header.empty()) return out;  // empty file: empty sequence, N = M = 0
  if (!detail::is_header_row(header))
    throw DataError(path + ": header row required in response-log file");

  LogSchema cols = schema;
  if (cols.student_col < 0) cols.student_col = find_column(header, {"student", "user"});
  if (cols.exercise_col < 0)
    cols.exercise_col = find_column(header, {"exercise", "item", "problem", "question"});
  if (cols.score_col < 0) cols.score_col = find_column(header, {"score", "correct", "response"});
  if (cols.student_col < 0 || cols.exercise_col < 0 || cols.score_col < 0) {
    if (header.size() >= 3) {
      cols = LogSchema{0, 1, 2};
    } else {
      throw DataError(path + ": missing student/exercise/score columns");
    }
  }
  const int needed =
      std::max({cols.student_col, cols.exercise_col, cols.score_col}) + 1;

  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = detail::split_fields(line);
    if (fields.empty()) continue;
    if (static_cast<int>(fields.size()) < needed)
      throw DataError(path + ": missing column at line " + std::to_string(line_no));
    const long long raw_s = parse_id(fields[cols.student_col], "student", line_no);
    const long long raw_e = parse_id(fields[cols.exercise_col], "exercise", line_no);
    double score;
    if (!detail::parse_double(fields[cols.score_col], score))
      throw DataError(path + ": unparseable score '" + fields[cols.score_col] +
                      "' at line " + std::to_string(line_no));
    ResponseLog log;
    log.student = out.student_ids.add(raw_s);
    log.exercise = out.exercise_ids.add(raw_e);
    log.score = score >= 0.5 ? 1 : 0;
    out.logs.push_back(log);
  }
  return out;
}

QMatrix load_q_matrix(const std::string& path, IdMap& exercise_ids, IdMap& concept_ids) {
  auto in = detail::open_or_throw(path);

  std::vector<std::vector<std::string>> rows;
  std::string line;
  size_t first_line_no = 0;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = detail::split_fields(line);
    if (fields.empty()) continue;
    if (rows.empty() && detail::is_header_row(fields)) {
      continue;  // optional header
    }
    if (rows.empty()) first_line_no = line_no;
    rows.push_back(std::move(fields));
  }

  std::vector<std::pair<int, int>> tags;
  if (!rows.empty() && rows.front().size() == 3) {
    // triplet form: exercise_id, concept_id, 0/1
    size_t no = first_line_no;
    for (const auto& r : rows) {
      if (r.size() != 3)
        throw DataError(path + ": inconsistent triplet row at line " + std::to_string(no));
      const long long raw_e = parse_id(r[0], "exercise", no);
      const long long raw_c = parse_id(r[1], "concept", no);
      long long v;
      if (!detail::parse_ll(r[2], v) || (v != 0 && v != 1))
        throw DataError(path + ": Q-matrix entry must be 0 or 1 at line " + std::to_string(no));
      const int e = exercise_ids.add(raw_e);
      const int c = concept_ids.add(raw_c);
      if (v == 1) tags.emplace_back(e, c);
      ++no;
    }
  } else {
    // dense 0/1 grid: row ordinal = exercise raw id, column ordinal = concept raw id
    const size_t width = rows.empty() ? 0 : rows.front().size();
    for (size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != width)
        throw DataError(path + ": ragged dense Q-matrix at data row " + std::to_string(r));
      const int e = exercise_ids.add(static_cast<long long>(r));
      for (size_t c = 0; c < width; ++c) {
        long long v;
        if (!detail::parse_ll(rows[r][c], v) || (v != 0 && v != 1))
          throw DataError(path + ": Q-matrix entry must be 0 or 1 at data row " +
                          std::to_string(r));
        const int concept_id = concept_ids.add(static_cast<long long>(c));
        if (v == 1) tags.emplace_back(e, concept_id);
      }
    }
  }

  QMatrix q;
  q.n_exercises = exercise_ids.size();
  q.n_concepts = concept_ids.size();
  q.concepts_of.resize(q.n_exercises);
  for (auto [e, c] : tags) q.concepts_of[e].push_back(c);
  for (auto& row : q.concepts_of) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
  }
  return q;
}

Dataset assemble_dataset(LoadedLogs loaded, QMatrix q, IdMap concept_ids) {
  Dataset ds;
  ds.n_students = loaded.student_ids.size();
  ds.n_exercises = loaded.exercise_ids.size();
  ds.n_concepts = concept_ids.size();
  ds.logs = std::move(loaded.logs);
  ds.student_ids = std::move(loaded.student_ids);
  ds.exercise_ids = std::move(loaded.exercise_ids);
  ds.concept_ids = std::move(concept_ids);
  q.concepts_of.resize(ds.n_exercises);
  q.n_exercises = ds.n_exercises;
  q.n_concepts = ds.n_concepts;
  ds.q = std::move(q);

  ds.exercise_has_logs.assign(ds.n_exercises, 0);
  for (const auto& log : ds.logs) ds.exercise_has_logs[log.exercise] = 1;
  for (int e = 0; e < ds.n_exercises; ++e) {
    if (ds.exercise_has_logs[e] && ds.q.concepts_of[e].empty())
      throw DataError("exercise with raw id " + std::to_string(ds.exercise_ids.to_raw[e]) +
                      " appears in logs but has no tagged concepts");
  }
  return ds;
}

Dataset load_dataset(const std::string& logs_path, const std::string& q_path,
                     const LogSchema& schema) {
  LoadedLogs loaded = load_response_logs(logs_path, schema);
  IdMap concept_ids;
  QMatrix q = load_q_matrix(q_path, loaded.exercise_ids, concept_ids);
  return assemble_dataset(std::move(loaded), std::move(q), std::move(concept_ids));
}

Dataset filter_students(const Dataset& dataset, int min_logs) {
  if (min_logs < 0) throw DataError("min_logs must be >= 0");

  std::vector<long long> counts(dataset.n_students, 0);
  for (const auto& log : dataset.logs) ++counts[log.student];

  std::vector<int> remap(dataset.n_students, -1);
  IdMap kept;
  for (int s = 0; s < dataset.n_students; ++s)
    if (counts[s] >= min_logs) remap[s] = kept.add(dataset.student_ids.to_raw[s]);

  Dataset out;
  out.n_students = kept.size();
  out.n_exercises = dataset.n_exercises;
  out.n_concepts = dataset.n_concepts;
  out.q = dataset.q;
  out.student_ids = std::move(kept);
  out.exercise_ids = dataset.exercise_ids;
  out.concept_ids = dataset.concept_ids;
  out.logs.reserve(dataset.logs.size());
  for (const auto& log : dataset.logs) {
    if (remap[log.student] < 0) continue;
    out.logs.push_back({remap[log.student], log.exercise, log.score});
  }
  out.exercise_has_logs.assign(out.n_exercises, 0);
  for (const auto& log : out.logs) out.exercise_has_logs[log.exercise] = 1;
  return out;
}

Dataset subset_students(const Dataset& dataset, int n_keep, uint64_t seed) {
  if (n_keep < 0) throw DataError("subset size must be >= 0");
  if (n_keep >= dataset.n_students) return dataset;

  std::vector<int> order(dataset.n_students);
  for (int s = 0; s < dataset.n_students; ++s) order[s] = s;
  Rng rng(mix_seed(seed, 0x5b5));
  rng.shuffle(order);
  std::vector<uint8_t> chosen(dataset.n_students, 0);
  for (int i = 0; i < n_keep; ++i) chosen[order[i]] = 1;

  std::vector<int> remap(dataset.n_students, -1);
  IdMap kept;
  for (int s = 0; s < dataset.n_students; ++s)
    if (chosen[s]) remap[s] = kept.add(dataset.student_ids.to_raw[s]);

  Dataset out;
  out.n_students = kept.size();
  out.n_exercises = dataset.n_exercises;
  out.n_concepts = dataset.n_concepts;
  out.q = dataset.q;
  out.student_ids = std::move(kept);
  out.exercise_ids = dataset.exercise_ids;
  out.concept_ids = dataset.concept_ids;
  for (const auto& log : dataset.logs) {
    if (remap[log.student] < 0) continue;
    out.logs.push_back({remap[log.student], log.exercise, log.score});
  }
  out.exercise_has_logs.assign(out.n_exercises, 0);
  for (const auto& log : out.logs) out.exercise_has_logs[log.exercise] = 1;
  return out;
}

SplitResult split_logs(std::span<const ResponseLog> logs, int n_students,
                       double train_fraction, uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw DataError("train_fraction must be in (0, 1)");

  std::vector<std::vector<int>> per_student(n_students);
  for (int i = 0; i < static_cast<int>(logs.size()); ++i)
    per_student[logs[i].student].push_back(i);

  std::vector<uint8_t> in_train(logs.size(), 0);
  Rng rng(seed);
  for (int s = 0; s < n_students; ++s) {
    auto idxs = per_student[s];
    if (idxs.empty()) continue;
    const long long n = static_cast<long long>(idxs.size());
    long long n_train = std::llround(train_fraction * static_cast<double>(n));
    n_train = std::clamp<long long>(n_train, 1, n);
    rng.shuffle(idxs);
    for (long long k = 0; k < n_train; ++k) in_train[idxs[k]] = 1;
  }

  SplitResult out;
  for (int i = 0; i < static_cast<int>(logs.size()); ++i)
    (in_train[i] ? out.train : out.test).push_back(logs[i]);
  return out;
}

SplitResult split_logs(const Dataset& dataset, double train_fraction, uint64_t seed) {
  return split_logs(dataset.logs, dataset.n_students, train_fraction, seed);
}

StatsReport dataset_stats(const Dataset& dataset) {
  StatsReport r;
  r.n_students = dataset.n_students;
  r.n_exercises = dataset.n_exercises;
  r.n_concepts = dataset.n_concepts;
  r.n_logs = static_cast<long long>(dataset.logs.size());
  if (dataset.n_students > 0)
    r.logs_per_student = static_cast<double>(r.n_logs) / dataset.n_students;
  if (dataset.n_exercises > 0)
    r.concepts_per_exercise =
        static_cast<double>(dataset.q.total_tags()) / dataset.n_exercises;

  if (dataset.n_students > 0 && dataset.n_exercises > 0) {
    std::unordered_set<long long> pairs;
    pairs.reserve(dataset.logs.size());
    for (const auto& log : dataset.logs)
      pairs.insert(static_cast<long long>(log.student) * dataset.n_exercises + log.exercise);
    const double total =
        static_cast<double>(dataset.n_students) * static_cast<double>(dataset.n_exercises);
    r.sparsity_percent = (1.0 - static_cast<double>(pairs.size()) / total) * 100.0;
  }
  return r;
}

std::string format_stats(const StatsReport& r) {
  std::ostringstream os;
  os << "students:                     " << r.n_students << "\n"
     << "exercises:                    " << r.n_exercises << "\n"
     << "knowledge concepts:           " << r.n_concepts << "\n"
     << "response logs:                " << r.n_logs << "\n"
     << "logs per student:             " << r.logs_per_student << "\n"
     << "concepts per exercise:        " << r.concepts_per_exercise << "\n"
     << "student-exercise sparsity:    " << r.sparsity_percent << "%\n";
  return os.str();
}

void write_response_logs(const std::string& path, std::span<const ResponseLog> logs,
                         const IdMap& student_ids, const IdMap& exercise_ids) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  out << "student_id,exercise_id,score\n";
  for (const auto& log : logs)
    out << student_ids.to_raw[log.student] << ',' << exercise_ids.to_raw[log.exercise] << ','
        << log.score << '\n';
}

}  // namespace cleki
