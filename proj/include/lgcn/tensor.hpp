#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lgcn/graph.hpp"
#include "lgcn/ledger.hpp"
#include "lgcn/matrix.hpp"

namespace lgcn {

// Feature aggregation Â·X. Counts one FA call and 2·nnz·D flops on the
// active ledger.
template <typename T>
Matrix<T> spmm(const NormalizedAdjacency& a_hat, const Matrix<T>& x);

// Selected rows of Â·X without forming the full product; one FA call.
template <typename T>
Matrix<T> spmm_rows(const NormalizedAdjacency& a_hat, const Matrix<T>& x,
                    std::span<const std::int32_t> rows);

// Gathered form used by the mini-batch neighborhood expansion: x holds only
// the rows listed in node_to_local (value -1 marks absent nodes). Every
// neighbor of an output row must be present. One FA call.
template <typename T>
Matrix<T> spmm_gather(const NormalizedAdjacency& a_hat, const Matrix<T>& x_local,
                      std::span<const std::int32_t> node_to_local,
                      std::span<const std::int32_t> out_rows);

// Adjoint aggregation for backpropagation (Â is symmetric). Flops are
// counted; the FA counter is not, it tracks forward aggregations only.
template <typename T>
Matrix<T> spmm_adjoint(const NormalizedAdjacency& a_hat, const Matrix<T>& grad);

// Scatter counterpart of spmm_gather for the backward pass.
template <typename T>
Matrix<T> spmm_gather_adjoint(const NormalizedAdjacency& a_hat,
                              const Matrix<T>& grad_local,
                              std::span<const std::int32_t> grad_rows,
                              std::span<const std::int32_t> node_to_out,
                              std::size_t out_rows);

template <typename T>
struct AffineReluOut {
  Matrix<T> hidden;          // max(0, x_hat * w)
  Matrix<T> pre_activation;  // x_hat * w
};

// Feature transformation sigma(X̂·W). Counts one FT call and 2·B·Din·Dout
// flops; registers both output buffers with the caller's activation guard.
template <typename T>
AffineReluOut<T> affine_relu_forward(const Matrix<T>& x_hat, const Matrix<T>& w,
                                     ActivationGuard* activations = nullptr);

// Plain dense products with flop accounting (2·M·K·N each).
template <typename T>
Matrix<T> matmul(const Matrix<T>& a, const Matrix<T>& b);
template <typename T>
Matrix<T> matmul_tn(const Matrix<T>& a, const Matrix<T>& b);  // A^T * B
template <typename T>
Matrix<T> matmul_nt(const Matrix<T>& a, const Matrix<T>& b);  // A * B^T

template <typename T>
Matrix<T> gather_rows(const Matrix<T>& x, std::span<const std::int32_t> rows);

template <typename T>
struct LossGrad {
  double loss = 0.0;
  Matrix<T> grad;  // d loss / d logits
};

// Mean over rows of -log softmax(logits)[label], stabilized by row-max
// subtraction. Optional per-row weights reweight the mean.
template <typename T>
LossGrad<T> softmax_cross_entropy(const Matrix<T>& logits,
                                  std::span<const std::int32_t> labels,
                                  std::span<const double> row_weights = {});

// Mean elementwise binary cross-entropy with logits, stabilized.
template <typename T>
LossGrad<T> sigmoid_bce(const Matrix<T>& logits, const Matrix<T>& targets);

template <typename T>
struct AdamState {
  std::uint64_t step_count = 0;
  std::vector<T> first_moment;
  std::vector<T> second_moment;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState for_param(const Matrix<T>& param, double lr) {
    AdamState s;
    s.first_moment.assign(param.size(), T(0));
    s.second_moment.assign(param.size(), T(0));
    s.learning_rate = lr;
    return s;
  }
};

template <typename T>
void adam_step(Matrix<T>& param, const Matrix<T>& grad, AdamState<T>& state);

// Uniform on ±sqrt(6/(rows+cols)), deterministic per seed. Draws are taken
// at double so f32 and f64 models share initial values.
template <typename T>
Matrix<T> xavier_init(std::size_t rows, std::size_t cols, std::uint64_t seed);

}  // namespace lgcn
