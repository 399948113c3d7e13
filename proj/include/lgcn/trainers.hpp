#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lgcn/graph.hpp"
#include "lgcn/ledger.hpp"
#include "lgcn/matrix.hpp"
#include "lgcn/tensor.hpp"

namespace lgcn {

enum class LossKind { softmax, bce };

// Per-layer training settings. For the conventional and vanilla trainers the
// first entry's epoch count applies to the whole network.
struct LayerTrainConfig {
  std::size_t epochs = 80;
  std::size_t batch_size = 256;
  double learning_rate = 1e-3;
  std::uint64_t seed = 1;
  LossKind loss_kind = LossKind::softmax;
};

struct TrainerConfig {
  std::vector<std::size_t> hidden_dims;  // one width per layer
  std::vector<std::size_t> epochs;       // per layer (layer-wise) or [total]
  std::size_t batch_size = 256;
  double learning_rate = 1e-3;
  std::uint64_t seed = 1;
  LossKind loss_kind = LossKind::softmax;

  std::size_t depth() const { return hidden_dims.size(); }
  std::vector<LayerTrainConfig> per_layer() const;
};

// Frozen per-layer weights plus the final linear classifier.
template <typename T>
struct LayerwiseModel {
  std::vector<Matrix<T>> layer_weights;  // W(l): D(l-1) x D(l)
  Matrix<T> classifier;                  // Theta: D(L) x C

  std::size_t depth() const { return layer_weights.size(); }
  std::vector<std::size_t> hidden_dims() const {
    std::vector<std::size_t> d;
    for (const auto& w : layer_weights) d.push_back(w.cols());
    return d;
  }
};

// Consulted between epochs of one layer's training; returning true ends the
// layer early. This is the controller's entry point.
struct StopContext {
  std::size_t layer_index = 0;      // 0-based
  std::size_t completed_epochs = 0; // within this layer
  double epoch_mean_loss = 0.0;
};
using StopHook = std::function<bool(const StopContext&)>;

template <typename T>
struct TrainOutput {
  LayerwiseModel<T> model;
  // Layer-wise: one curve per layer. Joint trainers: a single curve.
  std::vector<std::vector<double>> loss_curves;
  std::vector<std::size_t> schedule;  // epochs actually run per layer
  CostLedger ledger;
};

// One mini-batch of a single layer's objective: forward through
// sigma(x_hat_rows * w) * theta into the loss, analytic gradients back.
// x_hat_rows holds the already-aggregated rows of the batch nodes.
template <typename T>
struct LayerBatchResult {
  double loss = 0.0;
  Matrix<T> grad_w;
  Matrix<T> grad_theta;
};

template <typename T>
LayerBatchResult<T> layerwise_batch_gradients(const Matrix<T>& x_hat_rows,
                                              const Matrix<T>& w,
                                              const Matrix<T>& theta,
                                              std::span<const std::int32_t> batch_nodes,
                                              const GraphDataset& dataset,
                                              LossKind loss_kind,
                                              ActivationGuard* activations = nullptr);

// Full-graph loss and gradients of every parameter for the conventional
// trainer; one FA per layer plus adjoint aggregations on the way back.
template <typename T>
struct FullbatchResult {
  double loss = 0.0;
  std::vector<Matrix<T>> grad_weights;
  Matrix<T> grad_theta;
};

template <typename T>
FullbatchResult<T> fullbatch_gradients(const GraphDataset& dataset,
                                       const NormalizedAdjacency& a_hat,
                                       std::span<const Matrix<T>> weights,
                                       const Matrix<T>& theta, LossKind loss_kind,
                                       ActivationGuard* activations = nullptr);

// Layer-wise greedy training: one feature aggregation per layer for the whole
// run, then mini-batch optimization of (W, Theta) on the aggregated rows.
template <typename T>
TrainOutput<T> train_layerwise(const GraphDataset& dataset,
                               const NormalizedAdjacency& a_hat,
                               const std::vector<std::size_t>& hidden_dims,
                               const std::vector<LayerTrainConfig>& configs,
                               const StopHook& stop_hook = {});

// Joint full-batch training with analytic backpropagation; L aggregations
// per epoch.
template <typename T>
TrainOutput<T> train_conventional_fullbatch(const GraphDataset& dataset,
                                            const NormalizedAdjacency& a_hat,
                                            const std::vector<std::size_t>& hidden_dims,
                                            std::size_t epochs,
                                            const LayerTrainConfig& config);

// Vanilla mini-batch SGD: per batch, gathers the full L-hop neighborhood and
// aggregates layer by layer; L aggregations per batch.
template <typename T>
TrainOutput<T> train_vanilla_minibatch(const GraphDataset& dataset,
                                       const NormalizedAdjacency& a_hat,
                                       const std::vector<std::size_t>& hidden_dims,
                                       std::size_t epochs,
                                       const LayerTrainConfig& config);

// X(l) for all nodes: l alternating aggregation/transformation passes.
template <typename T>
Matrix<T> infer_embeddings(const LayerwiseModel<T>& model,
                           const NormalizedAdjacency& a_hat,
                           const Matrix<T>& features, std::size_t up_to_layer);

template <typename T>
Matrix<T> model_logits(const LayerwiseModel<T>& model,
                       const NormalizedAdjacency& a_hat,
                       const Matrix<T>& features);

enum class Split { train, val, test };
const char* split_name(Split split);

struct EvalReport {
  double micro_f1 = 0.0;
  double macro_f1 = 0.0;
  double loss = 0.0;
  Split split = Split::test;
};

template <typename T>
EvalReport evaluate(const LayerwiseModel<T>& model, const GraphDataset& dataset,
                    const NormalizedAdjacency& a_hat, Split split,
                    LossKind loss_kind);

// F1 from explicit predictions; exposed for the metric unit tests.
struct F1Scores {
  double micro = 0.0;
  double macro = 0.0;
};
F1Scores f1_single_label(std::span<const std::int32_t> predicted,
                         std::span<const std::int32_t> actual,
                         std::int32_t class_count);
F1Scores f1_multi_label(const Matrix<double>& predicted,
                        const Matrix<double>& actual);

}  // namespace lgcn
