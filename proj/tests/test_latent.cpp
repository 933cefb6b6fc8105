#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cleki/concept_graph.hpp"
#include "cleki/latent.hpp"
#include "cleki/model.hpp"
#include "cleki/rng.hpp"

using namespace cleki;

namespace {

ModelParams random_params(int n_concepts, int dim, int heads, uint64_t seed) {
  ModelConfig c;
  c.dim = dim;
  c.heads = heads;
  c.top_p = 1;
  return init_params(c, 1, 1, n_concepts, seed);
}

// Direct evaluation of the attention softmax and first-order aggregation,
// kept deliberately naive and independent of the library internals.
Matrix oracle_aggregate(const ModelParams& p, const BoolMatrix& adj, double slope) {
  const int k_total = p.n_concepts;
  const int d = p.dim;
  Matrix out(k_total, d);
  for (int h = 0; h < p.heads; ++h) {
    // z_i = W^h x_i
    Matrix z(k_total, d);
    for (int i = 0; i < k_total; ++i)
      for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) z(i, r) += p.gat_w[h](r, c) * p.concept_emb(i, c);

    for (int i = 0; i < k_total; ++i) {
      std::vector<int> nbr;
      std::vector<double> e;
      for (int j = 0; j < k_total; ++j) {
        if (!adj.at(i, j)) continue;
        double raw = 0.0;
        for (int c = 0; c < d; ++c) raw += p.gat_a[h][c] * z(i, c);
        for (int c = 0; c < d; ++c) raw += p.gat_a[h][d + c] * z(j, c);
        nbr.push_back(j);
        e.push_back(raw > 0.0 ? raw : slope * raw);
      }
      double denom = 0.0;
      for (double v : e) denom += std::exp(v);
      for (size_t t = 0; t < nbr.size(); ++t) {
        const double alpha = std::exp(e[t]) / denom;
        for (int c = 0; c < d; ++c) out(i, c) += alpha * z(nbr[t], c) / p.heads;
      }
    }
  }
  return out;
}

}  // namespace

TEST_CASE("attention rows are single-point for isolated nodes") {
  auto p = random_params(3, 4, 2, 5);
  ConceptGraph g;
  g.n_concepts = 3;  // no edges: self-loops only
  auto nbrs = neighbor_lists(build_adjacency(g));
  auto alpha = attention_coefficients(p, nbrs, 0, 0.2);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(alpha(i, j) == doctest::Approx(i == j ? 1.0 : 0.0));
}

TEST_CASE("identical neighbor features split attention evenly") {
  auto p = random_params(3, 4, 1, 7);
  // nodes 1 and 2 share the same features; node 0 attends to both
  for (int c = 0; c < 4; ++c) p.concept_emb(2, c) = p.concept_emb(1, c);
  ConceptGraph g;
  g.n_concepts = 3;
  g.edges = {{0, 1, EdgeKind::similarity}, {0, 2, EdgeKind::similarity}};
  auto nbrs = neighbor_lists(build_adjacency(g));
  auto alpha = attention_coefficients(p, nbrs, 0, 0.2);
  CHECK(alpha(0, 1) == doctest::Approx(alpha(0, 2)).epsilon(1e-12));
  CHECK(alpha(0, 0) + alpha(0, 1) + alpha(0, 2) == doctest::Approx(1.0));
}

TEST_CASE("attention and aggregation match the direct oracle") {
  Rng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    auto p = random_params(3, 3, 2, rng.next());
    ConceptGraph g;
    g.n_concepts = 3;
    g.edges = {{0, 1, EdgeKind::similarity}, {2, 1, EdgeKind::prerequisite}};
    auto adj = build_adjacency(g);
    auto nbrs = neighbor_lists(adj);

    auto expect = oracle_aggregate(p, adj, 0.2);
    auto got = aggregate_concepts(p, nbrs, 0.2);
    for (int i = 0; i < 3; ++i)
      for (int c = 0; c < 3; ++c) CHECK(got(i, c) == doctest::Approx(expect(i, c)).epsilon(1e-9));
  }
}

TEST_CASE("aggregation degenerates to identity and convex combinations") {
  auto p = random_params(4, 3, 1, 11);
  for (auto& w : p.gat_w) {
    w.fill(0.0);
    for (int i = 0; i < 3; ++i) w(i, i) = 1.0;
  }
  ConceptGraph isolated;
  isolated.n_concepts = 4;
  auto nbrs = neighbor_lists(build_adjacency(isolated));
  auto h = aggregate_concepts(p, nbrs, 0.2);
  for (int i = 0; i < 4; ++i)
    for (int c = 0; c < 3; ++c) CHECK(h(i, c) == doctest::Approx(p.concept_emb(i, c)));

  // equal features: any adjacency yields the shared vector back
  for (int i = 0; i < 4; ++i)
    for (int c = 0; c < 3; ++c) p.concept_emb(i, c) = 0.3 * (c + 1);
  ConceptGraph full;
  full.n_concepts = 4;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) full.edges.push_back({i, j, EdgeKind::similarity});
  auto nbrs_full = neighbor_lists(build_adjacency(full));
  auto hf = aggregate_concepts(p, nbrs_full, 0.2);
  for (int i = 0; i < 4; ++i)
    for (int c = 0; c < 3; ++c) CHECK(hf(i, c) == doctest::Approx(0.3 * (c + 1)).epsilon(1e-12));
}

TEST_CASE("masked cosine keeps associated pairs only") {
  Matrix h(3, 2);
  h(0, 0) = 1.0;
  h(0, 1) = 0.0;
  h(1, 0) = 1.0;
  h(1, 1) = 0.0;  // identical to row 0
  h(2, 0) = 0.0;
  h(2, 1) = 2.0;  // orthogonal to both

  BoolMatrix mask(3);
  mask.at(0, 1) = mask.at(1, 0) = 1;
  mask.at(0, 2) = mask.at(2, 0) = 1;

  auto s = masked_cosine(h, mask);
  CHECK(s(0, 1) == doctest::Approx(1.0));
  CHECK(s(0, 2) == doctest::Approx(0.0));
  CHECK(s(1, 2) == 0.0);  // cosine is 0 there anyway, and mask excludes it
  CHECK(s(0, 0) == 0.0);  // diagonal masked

  // unassociated pair with high cosine stays zero: mask wins
  BoolMatrix none(3);
  auto sn = masked_cosine(h, none);
  for (double v : sn.storage()) CHECK(v == 0.0);
}

TEST_CASE("top-P renormalization reproduces the worked softmax") {
  Matrix s(4, 4);
  s(0, 1) = 0.9;
  s(0, 2) = 0.5;
  s(0, 3) = 0.1;
  BoolMatrix mask(4);
  mask.at(0, 1) = mask.at(0, 2) = mask.at(0, 3) = 1;

  auto out = top_p_renormalize(s, mask, 2);
  // softmax over the kept raw values {0.9, 0.5}
  const double e9 = std::exp(0.9), e5 = std::exp(0.5);
  CHECK(out(0, 1) == doctest::Approx(e9 / (e9 + e5)).epsilon(1e-12));
  CHECK(out(0, 2) == doctest::Approx(e5 / (e9 + e5)).epsilon(1e-12));
  CHECK(out(0, 1) == doctest::Approx(0.5987).epsilon(1e-4));
  CHECK(out(0, 2) == doctest::Approx(0.4013).epsilon(1e-4));
  CHECK(out(0, 3) == 0.0);

  SUBCASE("fewer associations than P uses them all") {
    Matrix s1(2, 2);
    s1(0, 1) = -0.4;
    BoolMatrix m1(2);
    m1.at(0, 1) = 1;
    auto o1 = top_p_renormalize(s1, m1, 3);
    CHECK(o1(0, 1) == doctest::Approx(1.0));
  }
  SUBCASE("all-zero mask row stays zero") {
    auto o2 = top_p_renormalize(s, BoolMatrix(4), 2);
    for (double v : o2.storage()) CHECK(v == 0.0);
  }
  SUBCASE("ties break toward the lower concept index") {
    Matrix st(3, 3);
    st(0, 1) = 0.5;
    st(0, 2) = 0.5;
    BoolMatrix mt(3);
    mt.at(0, 1) = mt.at(0, 2) = 1;
    std::vector<std::vector<int>> sel;
    top_p_renormalize(st, mt, 1, &sel);
    CHECK(sel[0] == std::vector<int>{1});
  }
}

TEST_CASE("latent Q rows are sums of selected similarity rows") {
  Matrix s_tilde(3, 3);
  s_tilde(0, 1) = 0.6;
  s_tilde(0, 2) = 0.4;
  s_tilde(1, 0) = 1.0;

  QMatrix q;
  q.n_exercises = 2;
  q.n_concepts = 3;
  q.concepts_of = {{0}, {}};

  auto lq = latent_q(q, s_tilde);
  CHECK(lq(0, 1) == doctest::Approx(0.6));
  CHECK(lq(0, 2) == doctest::Approx(0.4));
  CHECK(lq(1, 0) == 0.0);

  SUBCASE("random product matches a hand loop") {
    Rng rng(3);
    Matrix st(3, 3);
    for (double& v : st.storage()) v = rng.uniform();
    QMatrix q2;
    q2.n_exercises = 2;
    q2.n_concepts = 3;
    q2.concepts_of = {{0, 2}, {1}};
    auto got = latent_q(q2, st);
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 3; ++k) {
        double expect = 0.0;
        for (int c : q2.concepts_of[j]) expect += st(c, k);
        CHECK(got(j, k) == doctest::Approx(expect).epsilon(1e-12));
      }
  }
}

TEST_CASE("structural invariants hold over random instances") {
  Rng rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const int k = 3 + rng.uniform_int(8);
    const int dim = 2 + rng.uniform_int(4);
    const int heads = 1 + rng.uniform_int(3);
    const int top_p = 1 + rng.uniform_int(k - 1);
    auto p = random_params(k, dim, heads, rng.next());

    ConceptGraph g;
    g.n_concepts = k;
    for (int i = 0; i < k; ++i)
      for (int j = i + 1; j < k; ++j) {
        const double roll = rng.uniform();
        if (roll < 0.3)
          g.edges.push_back({i, j, EdgeKind::similarity});
        else if (roll < 0.5)
          g.edges.push_back({i, j, EdgeKind::prerequisite});
      }
    const auto adj = build_adjacency(g);
    const auto mask = build_mask(g);
    const auto nbrs = neighbor_lists(adj);

    LatentOptions opts;
    opts.top_p = top_p;
    auto st = compute_latent(p, nbrs, mask, opts);

    for (int h = 0; h < heads; ++h)
      for (int i = 0; i < k; ++i) {
        double sum = 0.0;
        for (double a : st.alpha[h][i]) sum += a;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
      }

    for (int i = 0; i < k; ++i) {
      int associated = 0;
      for (int j = 0; j < k; ++j) associated += mask.at(i, j);
      int nonzeros = 0;
      double row_sum = 0.0;
      for (int j = 0; j < k; ++j) {
        const double v = st.sim_renorm(i, j);
        CHECK(std::fabs(st.sim(i, j)) <= 1.0 + 1e-12);
        if (v != 0.0) {
          CHECK(v > 0.0);
          CHECK(mask.at(i, j) == 1);  // latent weight only between associated concepts
          ++nonzeros;
          row_sum += v;
        }
      }
      if (associated == 0) {
        CHECK(nonzeros == 0);
      } else {
        CHECK(nonzeros == std::min(top_p, associated));
        CHECK(row_sum == doctest::Approx(1.0).epsilon(1e-6));
      }
    }

    // latent Q row sums bounded by the explicit concept count
    QMatrix q;
    q.n_exercises = 3;
    q.n_concepts = k;
    q.concepts_of.resize(3);
    for (int j = 0; j < 3; ++j) {
      const int count = 1 + rng.uniform_int(2);
      for (int t = 0; t < count; ++t) q.concepts_of[j].push_back(rng.uniform_int(k));
      std::sort(q.concepts_of[j].begin(), q.concepts_of[j].end());
      q.concepts_of[j].erase(std::unique(q.concepts_of[j].begin(), q.concepts_of[j].end()),
                             q.concepts_of[j].end());
    }
    auto lq = latent_q(q, st.sim_renorm);
    for (int j = 0; j < 3; ++j) {
      double row_sum = 0.0;
      bool all_tagged_associated = true;
      for (int c = 0; c < k; ++c) {
        CHECK(lq(j, c) >= 0.0);
        row_sum += lq(j, c);
      }
      for (int c : q.concepts_of[j]) {
        int assoc = 0;
        for (int x = 0; x < k; ++x) assoc += mask.at(c, x);
        if (assoc == 0) all_tagged_associated = false;
      }
      const double cap = static_cast<double>(q.concepts_of[j].size());
      CHECK(row_sum <= cap + 1e-6);
      if (all_tagged_associated) CHECK(row_sum == doctest::Approx(cap).epsilon(1e-6));
    }
  }
}

TEST_CASE("latent pipeline gradients match finite differences") {
  // loss = sum w_ij * sim_renorm_ij with fixed random weights
  const int k = 4, dim = 3, heads = 2;
  Rng rng(123);
  auto p = random_params(k, dim, heads, 2024);

  ConceptGraph g;
  g.n_concepts = k;
  g.edges = {{0, 1, EdgeKind::similarity},
             {1, 2, EdgeKind::similarity},
             {0, 3, EdgeKind::prerequisite},
             {2, 3, EdgeKind::similarity}};
  const auto adj = build_adjacency(g);
  const auto mask = build_mask(g);
  const auto nbrs = neighbor_lists(adj);
  LatentOptions opts;
  opts.top_p = 2;

  Matrix w(k, k);
  for (double& v : w.storage()) v = rng.uniform(-1.0, 1.0);

  auto loss = [&]() {
    auto st = compute_latent(p, nbrs, mask, opts);
    double total = 0.0;
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) total += w(i, j) * st.sim_renorm(i, j);
    return total;
  };

  Gradients grads = Gradients::zeros_like(p);
  {
    auto st = compute_latent(p, nbrs, mask, opts);
    // only selected entries feed the loss; unselected weights are inert
    latent_backward(p, nbrs, st, w, grads);
  }

  const double h = 1e-6;
  auto check_fd = [&](double* slot, double analytic) {
    const double saved = *slot;
    *slot = saved + h;
    const double lp = loss();
    *slot = saved - h;
    const double lm = loss();
    *slot = saved;
    const double fd = (lp - lm) / (2.0 * h);
    const double rel = std::fabs(analytic - fd) / std::max({std::fabs(analytic), std::fabs(fd), 1e-5});
    CHECK(rel < 1e-4);
  };

  for (int i = 0; i < k; ++i)
    for (int c = 0; c < dim; ++c) check_fd(&p.concept_emb(i, c), grads.d_concept(i, c));
  for (int hh = 0; hh < heads; ++hh) {
    for (int r = 0; r < dim; ++r)
      for (int c = 0; c < dim; ++c) check_fd(&p.gat_w[hh](r, c), grads.d_gat_w[hh](r, c));
    for (int c = 0; c < 2 * dim; ++c) check_fd(&p.gat_a[hh][c], grads.d_gat_a[hh][c]);
  }
}
