#pragma once

#include <algorithm>
#include <cstdint>

namespace lgcn {

// Exact operation counters and logical activation-memory accounting for one
// training run. Counters are monotone while a run is active; a trainer owns
// exactly one ledger and installs it with LedgerScope for the duration of the
// run, so evaluation afterwards does not touch it.
struct CostLedger {
  // Forward feature aggregations (sparse Â·X products). Backward/adjoint
  // aggregations inside backpropagation are counted in flops only.
  std::uint64_t fa_calls = 0;
  // Feature transformations executed by a training loop.
  std::uint64_t ft_calls = 0;
  std::uint64_t flops = 0;

  // Training-loop activations: per-batch buffers for the layer-wise and
  // vanilla mini-batch trainers, full-graph per-epoch buffers for the
  // conventional trainer.
  std::uint64_t live_activation_bytes = 0;
  std::uint64_t peak_activation_bytes = 0;

  // One-time full-graph materializations between layer-wise stages; kept out
  // of the per-batch peak above.
  std::uint64_t live_graph_bytes = 0;
  std::uint64_t peak_graph_bytes = 0;

  double wall_train_seconds = 0.0;

  void count_fa() { ++fa_calls; }
  void count_ft() { ++ft_calls; }
  void add_flops(std::uint64_t n) { flops += n; }

  void alloc_activation(std::uint64_t bytes) {
    live_activation_bytes += bytes;
    peak_activation_bytes = std::max(peak_activation_bytes, live_activation_bytes);
  }
  void free_activation(std::uint64_t bytes) { live_activation_bytes -= bytes; }

  void alloc_graph(std::uint64_t bytes) {
    live_graph_bytes += bytes;
    peak_graph_bytes = std::max(peak_graph_bytes, live_graph_bytes);
  }
  void free_graph(std::uint64_t bytes) { live_graph_bytes -= bytes; }
};

// Ledger consulted by tensor ops; null when no trainer is active.
CostLedger* active_ledger();

// Installs a ledger for the current thread.
class LedgerScope {
 public:
  explicit LedgerScope(CostLedger& ledger);
  ~LedgerScope();
  LedgerScope(const LedgerScope&) = delete;
  LedgerScope& operator=(const LedgerScope&) = delete;

 private:
  CostLedger* previous_;
};

// RAII byte tracking against the active ledger's activation channel. Ops that
// allocate buffers on behalf of a trainer register them through the trainer's
// guard so live bytes drop again when the batch ends.
class ActivationGuard {
 public:
  ActivationGuard() = default;
  ~ActivationGuard() { release_all(); }
  ActivationGuard(const ActivationGuard&) = delete;
  ActivationGuard& operator=(const ActivationGuard&) = delete;

  void track(std::uint64_t bytes) {
    if (CostLedger* l = active_ledger()) l->alloc_activation(bytes);
    bytes_ += bytes;
  }
  template <typename M>
  void track_matrix(const M& m) {
    track(m.byte_size());
  }
  void release_all() {
    if (bytes_ == 0) return;
    if (CostLedger* l = active_ledger()) l->free_activation(bytes_);
    bytes_ = 0;
  }

 private:
  std::uint64_t bytes_ = 0;
};

// Same idea for the separately tracked full-graph channel.
class GraphBytesGuard {
 public:
  GraphBytesGuard() = default;
  ~GraphBytesGuard() { release_all(); }
  GraphBytesGuard(const GraphBytesGuard&) = delete;
  GraphBytesGuard& operator=(const GraphBytesGuard&) = delete;

  void track(std::uint64_t bytes) {
    if (CostLedger* l = active_ledger()) l->alloc_graph(bytes);
    bytes_ += bytes;
  }
  template <typename M>
  void track_matrix(const M& m) {
    track(m.byte_size());
  }
  void release(std::uint64_t bytes) {
    if (CostLedger* l = active_ledger()) l->free_graph(bytes);
    bytes_ -= bytes;
  }
  void release_all() {
    if (bytes_ == 0) return;
    if (CostLedger* l = active_ledger()) l->free_graph(bytes_);
    bytes_ = 0;
  }

 private:
  std::uint64_t bytes_ = 0;
};

}  // namespace lgcn
