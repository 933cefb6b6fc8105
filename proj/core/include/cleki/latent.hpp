// Latent Q-matrix generation: multi-head attention aggregation over the
// concept graph, masked cosine similarity, top-P renormalization, and the
// product with the explicit Q-matrix. Forward keeps every intermediate the
// analytic backward pass needs.
#pragma once

#include <span>
#include <vector>

#include "cleki/concept_graph.hpp"
#include "cleki/gradients.hpp"
#include "cleki/matrix.hpp"
#include "cleki/model.hpp"

namespace cleki {

struct LatentOptions {
  int top_p = 8;
  double leaky_slope = 0.2;
  bool uniform_attention = false;  // ablation: plain neighbor averaging
  bool zero_explicit = false;      // zero latent weights at explicit positions
};

struct LatentState {
  int n_concepts = 0;
  int dim = 0;
  int heads = 0;
  bool uniform_attention = false;
  double leaky_slope = 0.2;

  std::vector<Matrix> z;  // per head: K x D rows W^h x_i
  // per head, per node: values aligned with the node's neighbor list
  std::vector<std::vector<std::vector<double>>> preact;  // LeakyReLU inputs
  std::vector<std::vector<std::vector<double>>> alpha;   // attention weights
  Matrix h_agg;                   // K x D aggregated concept embeddings
  std::vector<double> row_norm;   // K row norms of h_agg
  Matrix sim;                     // S, masked cosine, K x K
  std::vector<std::vector<int>> selected;  // per row: kept column indices
  Matrix sim_renorm;              // S-tilde, K x K
};

LatentState compute_latent(const ModelParams& params,
                           const std::vector<std::vector<int>>& nbrs,
                           const BoolMatrix& mask, const LatentOptions& opts);

// Dense K x K attention matrix of one head; rows are softmax over neighbors.
Matrix attention_coefficients(const ModelParams& params,
                              const std::vector<std::vector<int>>& nbrs, int head,
                              double leaky_slope);

// Head-averaged first-order aggregation, K x D.
Matrix aggregate_concepts(const ModelParams& params,
                          const std::vector<std::vector<int>>& nbrs,
                          double leaky_slope);

// S[i][j] = mask[i][j] * cos(h_i, h_j). Zero-norm rows produce zero
// similarities and a warning on stderr.
Matrix masked_cosine(const Matrix& h_agg, const BoolMatrix& mask);

// Keeps the top_p largest associated entries per row (ties: lower index) and
// softmax-renormalizes over their raw values; everything else is zero.
Matrix top_p_renormalize(const Matrix& sim, const BoolMatrix& mask, int top_p,
                         std::vector<std::vector<int>>* selected_out = nullptr);

// Latent Q-matrix rows: row j = sum of sim_renorm rows of j's explicit
// concepts. zero_explicit blanks entries at j's own explicit positions.
void latent_q_row(const QMatrix& q, const Matrix& sim_renorm, int exercise,
                  std::span<double> out, bool zero_explicit = false);
Matrix latent_q(const QMatrix& q, const Matrix& sim_renorm, bool zero_explicit = false);

// Backward through top-P softmax -> masked cosine -> GAT aggregation, given
// dL/d(sim_renorm). Accumulates into concept embedding and GAT gradients.
void latent_backward(const ModelParams& params,
                     const std::vector<std::vector<int>>& nbrs,
                     const LatentState& state, const Matrix& d_sim_renorm,
                     Gradients& grads);

}  // namespace cleki
