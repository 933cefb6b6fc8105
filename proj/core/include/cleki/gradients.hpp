// Gradient accumulator mirroring ModelParams. Student/exercise gradients are
// sparse by row: a batch only ever touches the rows of entities it contains.
#pragma once

#include <unordered_map>
#include <vector>

#include "cleki/matrix.hpp"
#include "cleki/model.hpp"

namespace cleki {

struct Gradients {
  Matrix d_concept;
  std::unordered_map<int, std::vector<double>> d_student;
  std::unordered_map<int, std::vector<double>> d_exercise;
  Matrix d_w1;
  std::vector<double> d_b1;
  Matrix d_w2;
  std::vector<double> d_b2;
  std::vector<Matrix> d_gat_w;
  std::vector<std::vector<double>> d_gat_a;

  static Gradients zeros_like(const ModelParams& p) {
    Gradients g;
    g.d_concept = Matrix(p.n_concepts, p.dim);
    g.d_w1 = Matrix(p.dim, p.dim);
    g.d_b1.assign(p.dim, 0.0);
    g.d_w2 = Matrix(p.dim, p.dim);
    g.d_b2.assign(p.dim, 0.0);
    g.d_gat_w.assign(p.heads, Matrix(p.dim, p.dim));
    g.d_gat_a.assign(p.heads, std::vector<double>(2 * p.dim, 0.0));
    return g;
  }

  std::vector<double>& student_slot(int i, size_t len) {
    auto& v = d_student[i];
    if (v.empty()) v.assign(len, 0.0);
    return v;
  }
  std::vector<double>& exercise_slot(int j, size_t len) {
    auto& v = d_exercise[j];
    if (v.empty()) v.assign(len, 0.0);
    return v;
  }

  void scale(double s) {
    auto scale_vec = [s](std::vector<double>& v) {
      for (double& x : v) x *= s;
    };
    scale_vec(d_concept.storage());
    for (auto& [_, v] : d_student) scale_vec(v);
    for (auto& [_, v] : d_exercise) scale_vec(v);
    scale_vec(d_w1.storage());
    scale_vec(d_b1);
    scale_vec(d_w2.storage());
    scale_vec(d_b2);
    for (auto& m : d_gat_w) scale_vec(m.storage());
    for (auto& a : d_gat_a) scale_vec(a);
  }
};

}  // namespace cleki
