// Response-log and Q-matrix ingestion: loading, validation, student
// filtering, per-student stratified splitting, and dataset statistics.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace cleki {

// One (student, exercise, score) interaction. Ids are contiguous internal
// indices; raw file ids are kept in the enclosing IdMaps.
struct ResponseLog {
  int student = 0;
  int exercise = 0;
  int score = 0;  // {0, 1}

  bool operator==(const ResponseLog&) const = default;
};

// Bidirectional mapping between raw file ids and contiguous internal indices,
// in order of first appearance.
struct IdMap {
  std::vector<long long> to_raw;
  std::unordered_map<long long, int> to_internal;

  int add(long long raw) {
    auto it = to_internal.find(raw);
    if (it != to_internal.end()) return it->second;
    const int id = static_cast<int>(to_raw.size());
    to_raw.push_back(raw);
    to_internal.emplace(raw, id);
    return id;
  }
  int lookup(long long raw) const {
    auto it = to_internal.find(raw);
    return it == to_internal.end() ? -1 : it->second;
  }
  int size() const { return static_cast<int>(to_raw.size()); }
};

// Binary exercise-to-concept tagging, stored sparsely per exercise.
struct QMatrix {
  int n_exercises = 0;
  int n_concepts = 0;
  std::vector<std::vector<int>> concepts_of;  // sorted concept ids per exercise

  int concept_count(int exercise) const {
    return static_cast<int>(concepts_of[exercise].size());
  }
  bool has(int exercise, int concept_id) const;
  long long total_tags() const;
};

struct LoadedLogs {
  std::vector<ResponseLog> logs;
  IdMap student_ids;
  IdMap exercise_ids;
};

// Column indices into the log file; -1 means resolve from the header names
// (fallback: positional 0, 1, 2).
struct LogSchema {
  int student_col = -1;
  int exercise_col = -1;
  int score_col = -1;
};

struct Dataset {
  int n_students = 0;
  int n_exercises = 0;
  int n_concepts = 0;
  std::vector<ResponseLog> logs;
  QMatrix q;
  IdMap student_ids;
  IdMap exercise_ids;
  IdMap concept_ids;
  std::vector<uint8_t> exercise_has_logs;
};

struct SplitResult {
  std::vector<ResponseLog> train;
  std::vector<ResponseLog> test;
};

// Fields of the per-dataset statistics table.
struct StatsReport {
  int n_students = 0;
  int n_exercises = 0;
  int n_concepts = 0;
  long long n_logs = 0;
  double logs_per_student = 0.0;
  double concepts_per_exercise = 0.0;
  double sparsity_percent = 0.0;  // 1 - distinct pairs / (N*M), in percent
};

// Loads logs with a required header row. Fractional scores binarize at 0.5.
// Throws DataError on missing columns or unparseable rows (with line number).
LoadedLogs load_response_logs(const std::string& path, const LogSchema& schema = {});

// Loads a Q-matrix, auto-detecting triplet (3 columns) vs dense 0/1 grid by
// column count. Extends the given id maps in place.
QMatrix load_q_matrix(const std::string& path, IdMap& exercise_ids, IdMap& concept_ids);

// Loads logs + Q and validates that every logged exercise has at least one
// tagged concept.
Dataset load_dataset(const std::string& logs_path, const std::string& q_path,
                     const LogSchema& schema = {});

Dataset assemble_dataset(LoadedLogs loaded, QMatrix q, IdMap concept_ids);

// Drops students with fewer than min_logs entries and recompacts student ids.
// Exercises left without logs stay in Q, flagged via exercise_has_logs.
Dataset filter_students(const Dataset& dataset, int min_logs);

// Seeded random subset of n_keep students (ids recompacted); identity when
// n_keep covers everyone. Builds size-comparable dataset slices.
Dataset subset_students(const Dataset& dataset, int n_keep, uint64_t seed);

// Per-student stratified split: each student's logs split independently at
// train_fraction (rounded, at least one train log). Deterministic in seed.
SplitResult split_logs(std::span<const ResponseLog> logs, int n_students,
                       double train_fraction, uint64_t seed);
SplitResult split_logs(const Dataset& dataset, double train_fraction, uint64_t seed);

StatsReport dataset_stats(const Dataset& dataset);
std::string format_stats(const StatsReport& report);

void write_response_logs(const std::string& path, std::span<const ResponseLog> logs,
                         const IdMap& student_ids, const IdMap& exercise_ids);

}  // namespace cleki
