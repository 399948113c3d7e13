#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "lgcn/capacity.hpp"
#include "lgcn/rng.hpp"
#include "lgcn/tensor.hpp"
#include "lgcn/wl.hpp"
#include "testutil.hpp"

using namespace lgcn;
namespace tu = lgcn::testutil;

namespace {

using Edge = std::pair<std::int32_t, std::int32_t>;

CsrMatrix permuted(const CsrMatrix& g, std::mt19937_64& rng) {
  const std::int64_t n = g.num_rows;
  std::vector<std::int32_t> perm(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) perm[i] = static_cast<std::int32_t>(i);
  shuffle_inplace(rng, perm);
  std::vector<Edge> edges;
  for (std::int64_t i = 0; i < n; ++i)
    for (const std::int32_t j : g.row_cols(i))
      if (i < j)
        edges.emplace_back(std::min(perm[i], perm[j]), std::max(perm[i], perm[j]));
  return build_csr(edges, n);
}

}  // namespace

TEST_CASE("wl_refine: regular graphs stay monochromatic") {
  for (const CsrMatrix& g : {make_cycle(6), make_complete(5), make_two_cycles(3, 3)}) {
    for (std::size_t rounds = 0; rounds <= 4; ++rounds) {
      const ColorHistogram h = wl_refine(g, rounds);
      CHECK(h.counts.size() == 1);
      CHECK(h.total() == g.num_rows);
      CHECK(h.iteration == rounds);
    }
  }
}

TEST_CASE("wl_refine: path P3 splits into ends and middle") {
  const ColorHistogram h = wl_refine(make_path(3), 1);
  REQUIRE(h.counts.size() == 2);
  std::vector<std::int64_t> counts{h.counts[0].second, h.counts[1].second};
  std::sort(counts.begin(), counts.end());
  CHECK(counts == std::vector<std::int64_t>{1, 2});
}

TEST_CASE("wl histograms are invariant under node relabeling") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const CsrMatrix g = tu::random_graph(11, 0.3, 50 + trial);
    const CsrMatrix p = permuted(g, rng);
    for (std::size_t rounds = 0; rounds <= 3; ++rounds)
      CHECK(wl_refine(g, rounds) == wl_refine(p, rounds));
  }
}

TEST_CASE("wl_distinguish: classic pairs") {
  CHECK(wl_distinguish(make_path(3), make_complete(3), 1));
  CHECK(wl_distinguish(make_path(3), make_complete(3), 0));  // degree multisets differ
  // The classic blind spot: C6 vs two triangles, both 2-regular.
  CHECK_FALSE(wl_distinguish(make_cycle(6), make_two_cycles(3, 3), 12));
  // Different node counts are trivially distinguished.
  CHECK(wl_distinguish(make_cycle(6), make_cycle(7), 0));
}

TEST_CASE("wl_distinguish is symmetric and false on isomorphic inputs") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 25; ++trial) {
    const CsrMatrix g = tu::random_graph(9, 0.35, 90 + trial);
    const CsrMatrix p = permuted(g, rng);
    CHECK_FALSE(wl_distinguish(g, p, 9));
    const CsrMatrix other = tu::random_graph(9, 0.35, 190 + trial);
    CHECK(wl_distinguish(g, other, 9) == wl_distinguish(other, g, 9));
  }
}

TEST_CASE("rooted_subtree: depth zero, star, and BFS oracle") {
  const RootedSubtree zero = rooted_subtree(make_cycle(5), 2, 0);
  CHECK(zero.graph.num_rows == 1);
  CHECK(zero.original_ids == std::vector<std::int32_t>{2});
  CHECK(zero.root_local == 0);

  const CsrMatrix star = make_star(7);
  const RootedSubtree whole = rooted_subtree(star, 0, 1);
  CHECK(whole.graph.num_rows == 7);
  CHECK(whole.graph.nnz() == star.nnz());

  for (int trial = 0; trial < 10; ++trial) {
    const CsrMatrix g = tu::random_graph(20, 0.12, 300 + trial);
    const std::int32_t root = static_cast<std::int32_t>(trial % 20);
    const RootedSubtree sub = rooted_subtree(g, root, 2);
    const std::int32_t seeds[1] = {root};
    CHECK(sub.original_ids == k_hop_ball(g, seeds, 2));
    CHECK(sub.original_ids[sub.root_local] == root);
    // Induced subgraph: edges iff both endpoints in the ball and adjacent.
    for (std::size_t a = 0; a < sub.original_ids.size(); ++a)
      for (std::size_t b = 0; b < sub.original_ids.size(); ++b)
        CHECK(sub.graph.has_entry(a, b) ==
              g.has_entry(sub.original_ids[a], sub.original_ids[b]));
  }

  CHECK_THROWS_AS(rooted_subtree(star, 99, 1), Error);
}

TEST_CASE("exhaustive isomorphism check on known pairs") {
  CHECK(is_isomorphic_exhaustive(make_cycle(5), make_cycle(5)));
  CHECK_FALSE(is_isomorphic_exhaustive(make_cycle(6), make_two_cycles(3, 3)));
  // K3,3 vs the 3-prism: 3-regular on 6 nodes, WL-blind but non-isomorphic.
  const CsrMatrix k33 = make_complete_bipartite(3, 3);
  const CsrMatrix prism = build_csr(
      std::vector<Edge>{{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5},
                        {0, 3}, {1, 4}, {2, 5}},
      6);
  CHECK_FALSE(wl_distinguish(k33, prism, 6));
  CHECK_FALSE(is_isomorphic_exhaustive(k33, prism));
  std::mt19937_64 rng(5);
  const CsrMatrix shuffled = permuted(k33, rng);
  CHECK(is_isomorphic_exhaustive(k33, shuffled));
}

TEST_CASE("pair sampler only yields certified non-isomorphic pairs") {
  PairSamplerConfig cfg;
  cfg.seed = 12;
  GraphPairSampler sampler(cfg);
  for (int i = 0; i < 200; ++i) {
    const GraphPair p = sampler.next();
    if (p.g1.num_rows == p.g2.num_rows && p.g1.num_rows <= 8)
      CHECK_FALSE(is_isomorphic_exhaustive(p.g1, p.g2));
    else if (p.g1.num_rows == p.g2.num_rows)
      CHECK(wl_distinguish(p.g1, p.g2, static_cast<std::size_t>(p.g1.num_rows)));
  }
}

TEST_CASE("estimate_capacity degenerate embedders") {
  PairSamplerConfig cfg;
  cfg.seed = 3;
  GraphPairSampler constant_sampler(cfg);
  const CapacityEstimate zero = estimate_capacity(
      [](const CsrMatrix&) { return std::vector<double>{1.0, 2.0}; },
      constant_sampler, 50, 1e-6);
  CHECK(zero.estimate == 0.0);
  CHECK(zero.distinguished == 0);
  CHECK(zero.std_error == 0.0);

  // A perfect graph hash: brute-force canonical adjacency form, padded to a
  // common length. Feasible because the sampler is capped at 6 nodes here.
  const auto canonical_embed = [](const CsrMatrix& g) {
    const std::int64_t n = g.num_rows;
    std::vector<std::int32_t> perm(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) perm[i] = static_cast<std::int32_t>(i);
    std::vector<double> best;
    do {
      std::vector<double> bits;
      bits.push_back(static_cast<double>(n));
      for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = i + 1; j < n; ++j)
          bits.push_back(g.has_entry(perm[i], perm[j]) ? 1.0 : 0.0);
      if (best.empty() || bits < best) best = bits;
    } while (std::next_permutation(perm.begin(), perm.end()));
    best.resize(1 + 15, -1.0);  // pad to the 6-node upper-triangle size
    return best;
  };
  PairSamplerConfig small;
  small.seed = 5;
  small.min_nodes = 4;
  small.max_nodes = 6;
  GraphPairSampler small_sampler(small);
  const CapacityEstimate one =
      estimate_capacity(canonical_embed, small_sampler, 30, 1e-6);
  CHECK(one.estimate == 1.0);
  CHECK(one.distinguished == 30);
}

TEST_CASE("capacity estimate fields are consistent") {
  PairSamplerConfig cfg;
  cfg.seed = 9;
  GraphPairSampler sampler(cfg);
  // Degree histogram embedder: distinguishes some pairs, not all.
  const auto embed = [](const CsrMatrix& g) {
    std::vector<double> h(13, 0.0);
    for (std::int64_t i = 0; i < g.num_rows; ++i)
      h[static_cast<std::size_t>(std::min<std::int64_t>(g.degree(i), 12))] += 1.0;
    return h;
  };
  const CapacityEstimate est = estimate_capacity(embed, sampler, 100, 1e-6);
  CHECK(est.num_pairs == 100);
  CHECK(est.distinguished <= 100);
  CHECK(est.estimate == doctest::Approx(est.distinguished / 100.0));
  CHECK(est.estimate >= 0.0);
  CHECK(est.estimate <= 1.0);
  const double p = est.estimate;
  CHECK(est.std_error == doctest::Approx(std::sqrt(p * (1 - p) / 100.0)));
}

TEST_CASE("model embedder is permutation-invariant and within WL power") {
  const ProbeConfig cfg;
  const GraphDataset ds = build_probe_dataset(cfg, 77);
  const NormalizedAdjacency a = normalize_adjacency(ds.adjacency, true);
  std::vector<LayerTrainConfig> configs(
      2, LayerTrainConfig{10, 32, 1e-3, 5, LossKind::softmax});
  const auto trained = train_layerwise<double>(ds, a, {16, 16}, configs);
  const EmbedFn embed = model_graph_embedder(trained.model, cfg.feature_dim, 12);

  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const CsrMatrix g = tu::random_graph(9, 0.3, 700 + trial);
    const CsrMatrix p = permuted(g, rng);
    const std::vector<double> e1 = embed(g);
    const std::vector<double> e2 = embed(p);
    double diff = 0.0;
    for (std::size_t i = 0; i < e1.size(); ++i)
      diff = std::max(diff, std::abs(e1[i] - e2[i]));
    CHECK(diff < 1e-9);
  }

  // Whatever the model separates, WL separates.
  PairSamplerConfig scfg;
  scfg.seed = 13;
  GraphPairSampler sampler(scfg);
  const WlBoundCheck check = wl_upper_bound_check(embed, 2, sampler, 150, 1e-6);
  CHECK(check.violations == 0);
  CHECK(check.model_distinguished <= check.wl_distinguished);
}

TEST_CASE("probe dataset is a labeled union of templates") {
  const ProbeConfig cfg;
  const GraphDataset ds = build_probe_dataset(cfg, 3);
  CHECK(ds.num_nodes > 0);
  CHECK(ds.class_count == static_cast<std::int32_t>(GraphPairSampler::family_count()));
  CHECK(ds.train_mask.size() + ds.val_mask.size() + ds.test_mask.size() ==
        static_cast<std::size_t>(ds.num_nodes));
  // Constant features.
  for (const double v : ds.features.values()) CHECK(v == 1.0);
  // Deterministic per seed.
  const GraphDataset again = build_probe_dataset(cfg, 3);
  CHECK(again.adjacency.col_idx == ds.adjacency.col_idx);
  CHECK(again.labels == ds.labels);
}

TEST_CASE("capacity_vs_depth emits one row per depth per seed") {
  ProbeConfig cfg;
  cfg.train_graphs = 12;
  cfg.epochs_per_layer = 5;
  const std::vector<std::uint64_t> seeds{1, 2};
  const auto rows = capacity_vs_depth({1, 2}, 20, seeds, cfg);
  REQUIRE(rows.size() == 4);
  for (const CapacityRow& r : rows) {
    CHECK(r.estimate.num_pairs == 20);
    CHECK(r.estimate.estimate >= 0.0);
    CHECK(r.estimate.estimate <= 1.0);
    CHECK(r.estimate.distinguished <= 20);
  }
  CHECK(rows[0].depth == 1);
  CHECK(rows[1].depth == 2);
  CHECK_THROWS_AS(capacity_vs_depth({2, 1}, 10, seeds, cfg), ValidationError);
}
