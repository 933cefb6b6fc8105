#include "cleki/latent.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>

#include "cleki/errors.hpp"

namespace cleki {

namespace {

constexpr double kNormFloor = 1e-12;

double leaky_relu(double x, double slope) { return x > 0.0 ? x : slope * x; }

// z, preact, alpha and the head-averaged aggregation. Mask-independent part
// of the latent pipeline, shared with the standalone op entry points.
void compute_gat(const ModelParams& params, const std::vector<std::vector<int>>& nbrs,
                 const LatentOptions& opts, LatentState& st) {
  const int k_total = params.n_concepts;
  const int d = params.dim;
  const int h_total = params.heads;

  st.n_concepts = k_total;
  st.dim = d;
  st.heads = h_total;
  st.uniform_attention = opts.uniform_attention;
  st.leaky_slope = opts.leaky_slope;

  st.z.assign(h_total, Matrix(k_total, d));
  st.preact.assign(h_total, {});
  st.alpha.assign(h_total, {});
  st.h_agg = Matrix(k_total, d);

  std::vector<double> a_node(k_total), a_nbr(k_total), scores;
  for (int h = 0; h < h_total; ++h) {
    Matrix& z = st.z[h];
    for (int i = 0; i < k_total; ++i)
      matvec(params.gat_w[h], params.concept_emb.row_span(i), z.row_span(i));

    auto& preact = st.preact[h];
    auto& alpha = st.alpha[h];
    preact.resize(k_total);
    alpha.resize(k_total);

    if (!opts.uniform_attention) {
      // a^T [W x_i ; W x_j] splits into per-node halves
      const std::span<const double> a(params.gat_a[h]);
      const auto a_self = a.subspan(0, d);
      const auto a_other = a.subspan(d, d);
      for (int i = 0; i < k_total; ++i) {
        a_node[i] = dot(a_self, z.row_span(i));
        a_nbr[i] = dot(a_other, z.row_span(i));
      }
    }

    for (int i = 0; i < k_total; ++i) {
      const auto& nb = nbrs[i];
      alpha[i].assign(nb.size(), 0.0);
      if (nb.empty()) continue;
      if (opts.uniform_attention) {
        const double w = 1.0 / static_cast<double>(nb.size());
        std::fill(alpha[i].begin(), alpha[i].end(), w);
      } else {
        preact[i].resize(nb.size());
        scores.assign(nb.size(), 0.0);
        double mx = -std::numeric_limits<double>::infinity();
        for (size_t t = 0; t < nb.size(); ++t) {
          const double g = a_node[i] + a_nbr[nb[t]];
          preact[i][t] = g;
          scores[t] = leaky_relu(g, opts.leaky_slope);
          mx = std::max(mx, scores[t]);
        }
        double denom = 0.0;
        for (size_t t = 0; t < nb.size(); ++t) {
          alpha[i][t] = std::exp(scores[t] - mx);
          denom += alpha[i][t];
        }
        for (double& v : alpha[i]) v /= denom;
      }
      double* out = st.h_agg.row(i);
      for (size_t t = 0; t < nb.size(); ++t) {
        const double* zj = z.row(nb[t]);
        const double w = alpha[i][t];
        for (int c = 0; c < d; ++c) out[c] += w * zj[c];
      }
    }
  }
  const double inv_h = 1.0 / h_total;
  for (double& v : st.h_agg.storage()) v *= inv_h;

  st.row_norm.resize(k_total);
  for (int i = 0; i < k_total; ++i) st.row_norm[i] = l2_norm(st.h_agg.row_span(i));
}

}  // namespace

Matrix attention_coefficients(const ModelParams& params,
                              const std::vector<std::vector<int>>& nbrs, int head,
                              double leaky_slope) {
  if (head < 0 || head >= params.heads)
    throw DataError("attention head index out of range: " + std::to_string(head));
  LatentOptions opts;
  opts.leaky_slope = leaky_slope;
  LatentState st;
  compute_gat(params, nbrs, opts, st);

  Matrix out(params.n_concepts, params.n_concepts);
  for (int i = 0; i < params.n_concepts; ++i)
    for (size_t t = 0; t < nbrs[i].size(); ++t) out(i, nbrs[i][t]) = st.alpha[head][i][t];
  return out;
}

Matrix aggregate_concepts(const ModelParams& params,
                          const std::vector<std::vector<int>>& nbrs, double leaky_slope) {
  LatentOptions opts;
  opts.leaky_slope = leaky_slope;
  LatentState st;
  compute_gat(params, nbrs, opts, st);
  return st.h_agg;
}

Matrix masked_cosine(const Matrix& h_agg, const BoolMatrix& mask) {
  const int k_total = h_agg.rows();
  Matrix sim(k_total, k_total);
  std::vector<double> norms(k_total);
  int zero_rows = 0;
  for (int i = 0; i < k_total; ++i) {
    norms[i] = l2_norm(h_agg.row_span(i));
    if (norms[i] < kNormFloor) ++zero_rows;
  }
  if (zero_rows > 0)
    std::cerr << "warning: " << zero_rows
              << " aggregated concept row(s) have zero norm; their similarities are 0\n";
  for (int i = 0; i < k_total; ++i) {
    if (norms[i] < kNormFloor) continue;
    for (int j = 0; j < k_total; ++j) {
      if (!mask.at(i, j) || norms[j] < kNormFloor) continue;
      sim(i, j) = dot(h_agg.row_span(i), h_agg.row_span(j)) / (norms[i] * norms[j]);
    }
  }
  return sim;
}

Matrix top_p_renormalize(const Matrix& sim, const BoolMatrix& mask, int top_p,
                         std::vector<std::vector<int>>* selected_out) {
  if (top_p < 1) throw DataError("top_p must be >= 1");
  const int k_total = sim.rows();
  Matrix out(k_total, k_total);
  if (selected_out) selected_out->assign(k_total, {});

  std::vector<int> candidates;
  for (int i = 0; i < k_total; ++i) {
    candidates.clear();
    for (int j = 0; j < k_total; ++j)
      if (mask.at(i, j)) candidates.push_back(j);
    if (candidates.empty()) continue;

    const int keep = std::min<int>(top_p, static_cast<int>(candidates.size()));
    std::sort(candidates.begin(), candidates.end(), [&](int a, int b) {
      if (sim(i, a) != sim(i, b)) return sim(i, a) > sim(i, b);
      return a < b;  // ties: lower concept index wins
    });
    candidates.resize(keep);
    std::sort(candidates.begin(), candidates.end());

    double mx = -std::numeric_limits<double>::infinity();
    for (int j : candidates) mx = std::max(mx, sim(i, j));
    double denom = 0.0;
    for (int j : candidates) denom += std::exp(sim(i, j) - mx);
    for (int j : candidates) out(i, j) = std::exp(sim(i, j) - mx) / denom;
    if (selected_out) (*selected_out)[i] = candidates;
  }
  return out;
}

LatentState compute_latent(const ModelParams& params,
                           const std::vector<std::vector<int>>& nbrs,
                           const BoolMatrix& mask, const LatentOptions& opts) {
  LatentState st;
  compute_gat(params, nbrs, opts, st);
  st.sim = masked_cosine(st.h_agg, mask);
  st.sim_renorm = top_p_renormalize(st.sim, mask, opts.top_p, &st.selected);
  return st;
}

void latent_q_row(const QMatrix& q, const Matrix& sim_renorm, int exercise,
                  std::span<double> out, bool zero_explicit) {
  std::fill(out.begin(), out.end(), 0.0);
  const auto& tags = q.concepts_of[exercise];
  for (int c : tags) {
    const double* row = sim_renorm.row(c);
    for (size_t k = 0; k < out.size(); ++k) out[k] += row[k];
  }
  if (zero_explicit)
    for (int c : tags) out[c] = 0.0;
}

Matrix latent_q(const QMatrix& q, const Matrix& sim_renorm, bool zero_explicit) {
  Matrix out(q.n_exercises, q.n_concepts);
  for (int j = 0; j < q.n_exercises; ++j)
    latent_q_row(q, sim_renorm, j, out.row_span(j), zero_explicit);
  return out;
}

void latent_backward(const ModelParams& params,
                     const std::vector<std::vector<int>>& nbrs,
                     const LatentState& st, const Matrix& d_sim_renorm,
                     Gradients& grads) {
  const int k_total = st.n_concepts;
  const int d = st.dim;

  // top-P softmax rows: only selected entries carry gradient
  Matrix d_sim(k_total, k_total);
  for (int i = 0; i < k_total; ++i) {
    const auto& sel = st.selected[i];
    if (sel.empty()) continue;
    double acc = 0.0;
    for (int j : sel) acc += d_sim_renorm(i, j) * st.sim_renorm(i, j);
    for (int j : sel) d_sim(i, j) = st.sim_renorm(i, j) * (d_sim_renorm(i, j) - acc);
  }

  // masked cosine
  Matrix d_h(k_total, d);
  for (int i = 0; i < k_total; ++i) {
    const double ni = st.row_norm[i];
    if (ni < kNormFloor) continue;
    for (int j : st.selected[i]) {
      const double ds = d_sim(i, j);
      if (ds == 0.0) continue;
      const double nj = st.row_norm[j];
      if (nj < kNormFloor) continue;
      const double c = st.sim(i, j);
      const double* hi = st.h_agg.row(i);
      const double* hj = st.h_agg.row(j);
      double* di = d_h.row(i);
      double* dj = d_h.row(j);
      const double inv_ij = 1.0 / (ni * nj);
      const double ci = c / (ni * ni);
      const double cj = c / (nj * nj);
      for (int x = 0; x < d; ++x) {
        di[x] += ds * (hj[x] * inv_ij - ci * hi[x]);
        dj[x] += ds * (hi[x] * inv_ij - cj * hj[x]);
      }
    }
  }

  // GAT aggregation, per head
  const double inv_h = 1.0 / st.heads;
  std::vector<double> d_alpha;
  for (int h = 0; h < st.heads; ++h) {
    const Matrix& z = st.z[h];
    Matrix dz(k_total, d);

    for (int i = 0; i < k_total; ++i) {
      const auto& nb = nbrs[i];
      if (nb.empty()) continue;
      const double* dhi = d_h.row(i);
      const auto& al = st.alpha[h][i];

      if (st.uniform_attention) {
        for (size_t t = 0; t < nb.size(); ++t) {
          double* dzj = dz.row(nb[t]);
          const double w = al[t] * inv_h;
          for (int x = 0; x < d; ++x) dzj[x] += w * dhi[x];
        }
        continue;
      }

      d_alpha.assign(nb.size(), 0.0);
      for (size_t t = 0; t < nb.size(); ++t) {
        const double* zj = z.row(nb[t]);
        double s = 0.0;
        for (int x = 0; x < d; ++x) s += dhi[x] * zj[x];
        d_alpha[t] = s * inv_h;
        double* dzj = dz.row(nb[t]);
        const double w = al[t] * inv_h;
        for (int x = 0; x < d; ++x) dzj[x] += w * dhi[x];
      }

      double acc = 0.0;
      for (size_t t = 0; t < nb.size(); ++t) acc += d_alpha[t] * al[t];

      const std::span<const double> a(params.gat_a[h]);
      const auto a_self = a.subspan(0, d);
      const auto a_other = a.subspan(d, d);
      auto& da = grads.d_gat_a[h];
      for (size_t t = 0; t < nb.size(); ++t) {
        const double de = al[t] * (d_alpha[t] - acc);
        const double g = st.preact[h][i][t];
        const double dg = de * (g > 0.0 ? 1.0 : st.leaky_slope);
        if (dg == 0.0) continue;
        const int j = nb[t];
        const double* zi = z.row(i);
        const double* zj = z.row(j);
        double* dzi = dz.row(i);
        double* dzj = dz.row(j);
        for (int x = 0; x < d; ++x) {
          da[x] += dg * zi[x];
          da[d + x] += dg * zj[x];
          dzi[x] += dg * a_self[x];
          dzj[x] += dg * a_other[x];
        }
      }
    }

    // z_m = W^h x_m
    Matrix& dw = grads.d_gat_w[h];
    const Matrix& w = params.gat_w[h];
    for (int m = 0; m < k_total; ++m) {
      const double* dzm = dz.row(m);
      const double* xm = params.concept_emb.row(m);
      double* dxm = grads.d_concept.row(m);
      for (int r = 0; r < d; ++r) {
        const double g = dzm[r];
        if (g == 0.0) continue;
        const double* wr = w.row(r);
        double* dwr = dw.row(r);
        for (int c = 0; c < d; ++c) {
          dwr[c] += g * xm[c];
          dxm[c] += g * wr[c];
        }
      }
    }
  }
}

}  // namespace cleki
