#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lgcn/matrix.hpp"

namespace lgcn {

// Compressed sparse row matrix. An empty values vector means an all-ones
// pattern (binary adjacency); column indices are sorted within each row.
struct CsrMatrix {
  std::int64_t num_rows = 0;
  std::int64_t num_cols = 0;
  std::vector<std::int64_t> row_ptr;  // size num_rows + 1
  std::vector<std::int32_t> col_idx;
  std::vector<double> values;  // empty => binary

  std::int64_t nnz() const { return static_cast<std::int64_t>(col_idx.size()); }
  std::span<const std::int32_t> row_cols(std::int64_t i) const {
    return {col_idx.data() + row_ptr[i],
            static_cast<std::size_t>(row_ptr[i + 1] - row_ptr[i])};
  }
  std::int64_t degree(std::int64_t i) const { return row_ptr[i + 1] - row_ptr[i]; }
  bool has_entry(std::int64_t i, std::int64_t j) const;
};

// Â = D̃^(-1/2)(A+I)D̃^(-1/2) by default; the self-loop choice is recorded so
// ablations can disable it.
struct NormalizedAdjacency {
  CsrMatrix matrix;  // values always present
  bool self_loops_added = true;
};

enum class LabelKind { single, multi };

// Immutable graph sample: symmetric binary adjacency, dense features, labels
// and three disjoint node splits. All invariants are checked on construction
// paths (loader, generator).
struct GraphDataset {
  std::int64_t num_nodes = 0;
  std::int64_t num_edges = 0;  // undirected edges counted once
  CsrMatrix adjacency;
  Matrix<double> features;  // N x D
  LabelKind label_kind = LabelKind::single;
  std::vector<std::int32_t> labels;    // single-label: one class id per node
  Matrix<double> label_matrix;         // multi-label: N x C of {0,1}
  std::vector<std::int32_t> train_mask, val_mask, test_mask;  // sorted
  std::int32_t class_count = 0;

  std::int64_t feature_dim() const {
    return static_cast<std::int64_t>(features.cols());
  }
  // Throws ValidationError when any structural invariant is broken.
  void validate() const;
};

struct SbmParams {
  std::vector<std::int64_t> block_sizes;
  double intra_prob = 0.0;
  double inter_prob = 0.0;
  std::int64_t feature_dim = 0;
  double feature_noise = 0.0;
  std::uint64_t seed = 0;
};

// Symmetric binary CSR from an undirected edge list. Duplicates collapse;
// self-loops in the raw list are rejected (normalization adds them later).
CsrMatrix build_csr(std::span<const std::pair<std::int32_t, std::int32_t>> edges,
                    std::int64_t num_nodes);

NormalizedAdjacency normalize_adjacency(const CsrMatrix& adjacency,
                                        bool add_self_loops = true);

GraphDataset load_dataset(const std::filesystem::path& directory);
void write_dataset(const GraphDataset& dataset,
                   const std::filesystem::path& directory);

// Stochastic block model sample: label = block index, features = one-hot
// block indicator plus Gaussian noise, masks split 60/20/20 per block.
GraphDataset generate_sbm(const SbmParams& params);

// Nodes within `hops` steps of the seed set (seeds included), ascending.
// Used by the mini-batch neighborhood expansion and its BFS oracle tests.
std::vector<std::int32_t> k_hop_ball(const CsrMatrix& adjacency,
                                     std::span<const std::int32_t> seeds,
                                     std::size_t hops);

}  // namespace lgcn
