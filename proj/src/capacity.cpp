#include "lgcn/capacity.hpp"

#include <algorithm>
#include <cmath>

#include "lgcn/common.hpp"
#include "lgcn/rng.hpp"
#include "lgcn/tensor.hpp"

namespace lgcn {
namespace {

using Edge = std::pair<std::int32_t, std::int32_t>;

void require(bool ok, const char* msg) {
  if (!ok) throw Error(msg);
}

std::vector<double> normalized_unit_max(std::vector<double> e) {
  double mx = 0.0;
  for (const double v : e) mx = std::max(mx, std::abs(v));
  if (mx > 0.0)
    for (double& v : e) v /= mx;
  return e;
}

double max_norm_diff(const std::vector<double>& a, const std::vector<double>& b) {
  require(a.size() == b.size(), "capacity: embedding sizes differ");
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

CsrMatrix make_path(std::int64_t n) {
  std::vector<Edge> e;
  for (std::int32_t i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return build_csr(e, n);
}

CsrMatrix make_cycle(std::int64_t n) {
  require(n >= 3, "make_cycle: need at least 3 nodes");
  std::vector<Edge> e;
  for (std::int32_t i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  e.emplace_back(0, static_cast<std::int32_t>(n - 1));
  return build_csr(e, n);
}

CsrMatrix make_star(std::int64_t n) {
  std::vector<Edge> e;
  for (std::int32_t i = 1; i < n; ++i) e.emplace_back(0, i);
  return build_csr(e, n);
}

CsrMatrix make_complete(std::int64_t n) {
  std::vector<Edge> e;
  for (std::int32_t i = 0; i < n; ++i)
    for (std::int32_t j = i + 1; j < n; ++j) e.emplace_back(i, j);
  return build_csr(e, n);
}

CsrMatrix make_complete_bipartite(std::int64_t a, std::int64_t b) {
  std::vector<Edge> e;
  for (std::int32_t i = 0; i < a; ++i)
    for (std::int32_t j = 0; j < b; ++j)
      e.emplace_back(i, static_cast<std::int32_t>(a + j));
  return build_csr(e, a + b);
}

CsrMatrix make_binary_tree(std::int64_t n) {
  std::vector<Edge> e;
  for (std::int32_t i = 0; i < n; ++i) {
    if (2 * i + 1 < n) e.emplace_back(i, 2 * i + 1);
    if (2 * i + 2 < n) e.emplace_back(i, 2 * i + 2);
  }
  return build_csr(e, n);
}

CsrMatrix make_two_cycles(std::int64_t a, std::int64_t b) {
  require(a >= 3 && b >= 3, "make_two_cycles: cycles need 3 nodes each");
  std::vector<Edge> e;
  for (std::int32_t i = 0; i + 1 < a; ++i) e.emplace_back(i, i + 1);
  e.emplace_back(0, static_cast<std::int32_t>(a - 1));
  const std::int32_t off = static_cast<std::int32_t>(a);
  for (std::int32_t i = 0; i + 1 < b; ++i) e.emplace_back(off + i, off + i + 1);
  e.emplace_back(off, static_cast<std::int32_t>(off + b - 1));
  return build_csr(e, a + b);
}

GraphPairSampler::GraphPairSampler(const PairSamplerConfig& cfg)
    : cfg_(cfg), rng_(seed_stream(cfg.seed, "pair-sampler")) {
  if (cfg.min_nodes < 4 || cfg.max_nodes < cfg.min_nodes)
    throw ValidationError("pair sampler: need 4 <= min_nodes <= max_nodes");
}

std::size_t GraphPairSampler::family_count() { return 8; }

CsrMatrix GraphPairSampler::sample_graph(std::int32_t* family) {
  const std::int64_t n =
      static_cast<std::int64_t>(cfg_.min_nodes +
                                uniform_below(rng_, cfg_.max_nodes - cfg_.min_nodes + 1));
  const std::int32_t fam = static_cast<std::int32_t>(uniform_below(rng_, family_count()));
  if (family != nullptr) *family = fam;
  switch (fam) {
    case 0: return make_path(n);
    case 1: return make_cycle(std::max<std::int64_t>(n, 3));
    case 2: return make_star(n);
    case 3: return make_complete(n);
    case 4: {
      const std::int64_t a = 1 + static_cast<std::int64_t>(uniform_below(rng_, n - 1));
      return make_complete_bipartite(a, n - a);
    }
    case 5: return make_binary_tree(n);
    case 6: {
      if (n < 6) return make_cycle(std::max<std::int64_t>(n, 3));
      const std::int64_t a =
          3 + static_cast<std::int64_t>(uniform_below(rng_, n - 5));  // both cycles >= 3
      return make_two_cycles(a, n - a);
    }
    default: {
      // Two-block SBM sample.
      const std::int64_t half = n / 2;
      std::vector<Edge> e;
      for (std::int32_t i = 0; i < n; ++i) {
        for (std::int32_t j = i + 1; j < n; ++j) {
          const bool same = (i < half) == (j < half);
          const double p = same ? 0.8 : 0.2;
          if (uniform01(rng_) < p) e.emplace_back(i, j);
        }
      }
      return build_csr(e, n);
    }
  }
}

GraphPair GraphPairSampler::next() {
  for (int attempt = 0; attempt < 10000; ++attempt) {
    CsrMatrix g1 = sample_graph();
    CsrMatrix g2 = sample_graph();
    if (g1.num_rows != g2.num_rows) return {std::move(g1), std::move(g2)};
    const std::size_t rounds = static_cast<std::size_t>(g1.num_rows);
    if (wl_distinguish(g1, g2, rounds)) return {std::move(g1), std::move(g2)};
    if (g1.num_rows <= 8 && !is_isomorphic_exhaustive(g1, g2))
      return {std::move(g1), std::move(g2)};
    ++rejected_;  // isomorphic, or non-isomorphism not certifiable
  }
  throw Error("pair sampler: exhausted attempts without a certified pair");
}

CapacityEstimate estimate_capacity(const EmbedFn& embed_fn,
                                   GraphPairSampler& sampler,
                                   std::size_t num_pairs, double tolerance) {
  require(num_pairs > 0, "estimate_capacity: need at least one pair");
  CapacityEstimate out;
  out.num_pairs = num_pairs;
  for (std::size_t i = 0; i < num_pairs; ++i) {
    const GraphPair pair = sampler.next();
    const std::vector<double> e1 = normalized_unit_max(embed_fn(pair.g1));
    const std::vector<double> e2 = normalized_unit_max(embed_fn(pair.g2));
    if (max_norm_diff(e1, e2) > tolerance) ++out.distinguished;
  }
  out.estimate = static_cast<double>(out.distinguished) / static_cast<double>(num_pairs);
  out.std_error = std::sqrt(out.estimate * (1.0 - out.estimate) /
                            static_cast<double>(num_pairs));
  return out;
}

WlBoundCheck wl_upper_bound_check(const EmbedFn& embed_fn, std::size_t wl_rounds,
                                 GraphPairSampler& sampler,
                                 std::size_t num_pairs, double tolerance) {
  WlBoundCheck out;
  out.pairs = num_pairs;
  for (std::size_t i = 0; i < num_pairs; ++i) {
    const GraphPair pair = sampler.next();
    const std::vector<double> e1 = normalized_unit_max(embed_fn(pair.g1));
    const std::vector<double> e2 = normalized_unit_max(embed_fn(pair.g2));
    const bool model_sep = max_norm_diff(e1, e2) > tolerance;
    const bool wl_sep = wl_distinguish(pair.g1, pair.g2, wl_rounds);
    if (model_sep) ++out.model_distinguished;
    if (wl_sep) ++out.wl_distinguished;
    if (model_sep && !wl_sep) ++out.violations;
  }
  return out;
}

EmbedFn model_graph_embedder(const LayerwiseModel<double>& model,
                             std::size_t feature_dim, std::size_t pad_nodes) {
  require(model.depth() >= 1, "embedder: model has no layers");
  return [model, feature_dim, pad_nodes](const CsrMatrix& graph) {
    require(static_cast<std::size_t>(graph.num_rows) <= pad_nodes,
            "embedder: graph larger than the padding size");
    const NormalizedAdjacency a_hat = normalize_adjacency(graph, true);
    Matrix<double> ones(static_cast<std::size_t>(graph.num_rows), feature_dim);
    std::fill(ones.data(), ones.data() + ones.size(), 1.0);
    const Matrix<double> emb = infer_embeddings(model, a_hat, ones, model.depth());

    // Zero-pad to a common node count, then sort rows lexicographically: an
    // injective readout of the node-embedding multiset.
    std::vector<std::vector<double>> rows(pad_nodes,
                                          std::vector<double>(emb.cols(), 0.0));
    for (std::size_t i = 0; i < emb.rows(); ++i)
      rows[i].assign(emb.row(i), emb.row(i) + emb.cols());
    std::sort(rows.begin(), rows.end());

    std::vector<double> flat;
    flat.reserve(pad_nodes * emb.cols());
    for (const auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
    return flat;
  };
}

GraphDataset build_probe_dataset(const ProbeConfig& cfg, std::uint64_t seed) {
  PairSamplerConfig scfg;
  scfg.seed = seed_stream(seed, "probe-train-graphs");
  scfg.min_nodes = cfg.min_nodes;
  scfg.max_nodes = cfg.max_nodes;
  GraphPairSampler sampler(scfg);

  std::vector<Edge> edges;
  std::vector<std::int32_t> labels;
  std::int64_t offset = 0;
  for (std::size_t t = 0; t < cfg.train_graphs; ++t) {
    std::int32_t family = 0;
    const CsrMatrix g = sampler.sample_graph(&family);
    for (std::int64_t i = 0; i < g.num_rows; ++i) {
      labels.push_back(family);
      for (const std::int32_t j : g.row_cols(i))
        if (i < j)
          edges.emplace_back(static_cast<std::int32_t>(offset + i),
                             static_cast<std::int32_t>(offset + j));
    }
    offset += g.num_rows;
  }

  GraphDataset ds;
  ds.num_nodes = offset;
  ds.class_count = static_cast<std::int32_t>(GraphPairSampler::family_count());
  ds.label_kind = LabelKind::single;
  ds.labels = std::move(labels);
  ds.adjacency = build_csr(edges, offset);
  ds.num_edges = ds.adjacency.nnz() / 2;
  ds.features = Matrix<double>(static_cast<std::size_t>(offset), cfg.feature_dim);
  std::fill(ds.features.data(), ds.features.data() + ds.features.size(), 1.0);

  // Stratified 60/20/20 split over nodes, per class.
  std::mt19937_64 rng(seed_stream(seed, "probe-masks"));
  std::vector<std::vector<std::int32_t>> by_class(ds.class_count);
  for (std::int64_t i = 0; i < ds.num_nodes; ++i)
    by_class[static_cast<std::size_t>(ds.labels[i])].push_back(
        static_cast<std::int32_t>(i));
  for (auto& members : by_class) {
    shuffle_inplace(rng, members);
    const std::size_t n_train = (members.size() * 6) / 10;
    const std::size_t n_val = (members.size() * 2) / 10;
    for (std::size_t i = 0; i < members.size(); ++i) {
      if (i < n_train)
        ds.train_mask.push_back(members[i]);
      else if (i < n_train + n_val)
        ds.val_mask.push_back(members[i]);
      else
        ds.test_mask.push_back(members[i]);
    }
  }
  std::sort(ds.train_mask.begin(), ds.train_mask.end());
  std::sort(ds.val_mask.begin(), ds.val_mask.end());
  std::sort(ds.test_mask.begin(), ds.test_mask.end());

  ds.validate();
  return ds;
}

std::vector<CapacityRow> capacity_vs_depth(const std::vector<std::size_t>& depths,
                                           std::size_t num_pairs,
                                           std::span<const std::uint64_t> seeds,
                                           const ProbeConfig& cfg) {
  for (std::size_t i = 1; i < depths.size(); ++i)
    if (depths[i] <= depths[i - 1])
      throw ValidationError("capacity_vs_depth: depths must be ascending");

  std::vector<CapacityRow> rows;
  for (const std::uint64_t seed : seeds) {
    const GraphDataset dataset = build_probe_dataset(cfg, seed);
    const NormalizedAdjacency a_hat = normalize_adjacency(dataset.adjacency, true);
    for (const std::size_t depth : depths) {
      const std::vector<std::size_t> hidden(depth, cfg.hidden_dim);
      std::vector<LayerTrainConfig> configs(
          depth, LayerTrainConfig{cfg.epochs_per_layer, cfg.batch_size,
                                  cfg.learning_rate, seed_stream(seed, "probe-train"),
                                  LossKind::softmax});
      const TrainOutput<double> trained =
          train_layerwise<double>(dataset, a_hat, hidden, configs);
      const EmbedFn embed =
          model_graph_embedder(trained.model, cfg.feature_dim, cfg.max_nodes);

      // Same pair sequence for every depth of this seed.
      PairSamplerConfig scfg;
      scfg.seed = seed_stream(seed, "probe-pairs");
      scfg.min_nodes = cfg.min_nodes;
      scfg.max_nodes = cfg.max_nodes;
      GraphPairSampler sampler(scfg);
      rows.push_back({depth, seed,
                      estimate_capacity(embed, sampler, num_pairs, cfg.tolerance)});
    }
  }
  return rows;
}

}  // namespace lgcn
