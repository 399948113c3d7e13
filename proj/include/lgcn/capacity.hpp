#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "lgcn/graph.hpp"
#include "lgcn/trainers.hpp"
#include "lgcn/wl.hpp"

namespace lgcn {

// Small graph constructors for the template families the probe samples from.
CsrMatrix make_path(std::int64_t n);
CsrMatrix make_cycle(std::int64_t n);
CsrMatrix make_star(std::int64_t n);
CsrMatrix make_complete(std::int64_t n);
CsrMatrix make_complete_bipartite(std::int64_t a, std::int64_t b);
CsrMatrix make_binary_tree(std::int64_t n);
CsrMatrix make_two_cycles(std::int64_t a, std::int64_t b);

struct GraphPair {
  CsrMatrix g1, g2;
};

struct PairSamplerConfig {
  std::uint64_t seed = 1;
  std::size_t min_nodes = 6;
  std::size_t max_nodes = 12;
};

// Draws i.i.d. graphs from the template families and yields only pairs whose
// non-isomorphism is certified: differing node counts, a WL separation, or an
// exhaustive check at <= 8 nodes. Uncertifiable or isomorphic draws are
// rejected and resampled.
class GraphPairSampler {
 public:
  explicit GraphPairSampler(const PairSamplerConfig& cfg);

  GraphPair next();
  CsrMatrix sample_graph(std::int32_t* family = nullptr);

  static std::size_t family_count();
  std::size_t rejected() const { return rejected_; }

 private:
  PairSamplerConfig cfg_;
  std::mt19937_64 rng_;
  std::size_t rejected_ = 0;
};

using EmbedFn = std::function<std::vector<double>(const CsrMatrix&)>;

struct CapacityEstimate {
  double estimate = 0.0;
  std::size_t num_pairs = 0;
  std::size_t distinguished = 0;
  double std_error = 0.0;
};

// Monte-Carlo estimate of the probability that embed_fn separates a sampled
// non-isomorphic pair by more than `tolerance` in max-norm (embeddings are
// normalized to unit max-norm first).
CapacityEstimate estimate_capacity(const EmbedFn& embed_fn,
                                   GraphPairSampler& sampler,
                                   std::size_t num_pairs, double tolerance);

// Joint model/WL evaluation over sampled pairs. WL upper-bounds any
// aggregation-based model: a violation is a pair the model separates but WL
// (same round count) does not.
struct WlBoundCheck {
  std::size_t pairs = 0;
  std::size_t model_distinguished = 0;
  std::size_t wl_distinguished = 0;
  std::size_t violations = 0;
};
WlBoundCheck wl_upper_bound_check(const EmbedFn& embed_fn, std::size_t wl_rounds,
                                 GraphPairSampler& sampler,
                                 std::size_t num_pairs, double tolerance);

// Graph-level embedding of a trained model: constant input features, L
// aggregation/transformation passes, zero-padding to pad_nodes rows, then a
// sorted-row concatenation readout (injective on node-embedding multisets).
EmbedFn model_graph_embedder(const LayerwiseModel<double>& model,
                             std::size_t feature_dim, std::size_t pad_nodes);

struct ProbeConfig {
  std::size_t min_nodes = 6;
  std::size_t max_nodes = 12;
  std::size_t train_graphs = 48;
  std::size_t feature_dim = 16;
  std::size_t hidden_dim = 16;
  std::size_t epochs_per_layer = 40;
  std::size_t batch_size = 64;
  double learning_rate = 1e-2;
  double tolerance = 1e-6;
};

// Node-classification dataset over a disjoint union of sampled template
// graphs (label = template family, features all ones). Training data for the
// probe's models.
GraphDataset build_probe_dataset(const ProbeConfig& cfg, std::uint64_t seed);

struct CapacityRow {
  std::size_t depth = 0;
  std::uint64_t seed = 0;
  CapacityEstimate estimate;
};

// Trains a layer-wise model per depth per seed and estimates its capacity on
// a fresh pair sample (the same pair sequence across depths of one seed).
std::vector<CapacityRow> capacity_vs_depth(const std::vector<std::size_t>& depths,
                                           std::size_t num_pairs,
                                           std::span<const std::uint64_t> seeds,
                                           const ProbeConfig& cfg);

}  // namespace lgcn
