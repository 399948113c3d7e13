#include "lgcn/tensor.hpp"

#include <cmath>
#include <random>

#include "lgcn/common.hpp"
#include "lgcn/kernels/kernels.hpp"
#include "lgcn/rng.hpp"

namespace lgcn {
namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw Error(msg);
}

}  // namespace

template <typename T>
Matrix<T> spmm(const NormalizedAdjacency& a_hat, const Matrix<T>& x) {
  const CsrMatrix& a = a_hat.matrix;
  require(a.num_cols == static_cast<std::int64_t>(x.rows()),
          "spmm: adjacency columns do not match feature rows");
  const std::size_t d = x.cols();
  Matrix<T> out(static_cast<std::size_t>(a.num_rows), d);
  const auto& k = kern::table<T>();
  for (std::int64_t i = 0; i < a.num_rows; ++i) {
    T* dst = out.row(static_cast<std::size_t>(i));
    for (std::int64_t e = a.row_ptr[i]; e < a.row_ptr[i + 1]; ++e) {
      k.axpy(dst, x.row(static_cast<std::size_t>(a.col_idx[e])),
             static_cast<T>(a.values[e]), d);
    }
  }
  if (CostLedger* l = active_ledger()) {
    l->count_fa();
    l->add_flops(2ull * static_cast<std::uint64_t>(a.nnz()) * d);
  }
  return out;
}

template <typename T>
Matrix<T> spmm_rows(const NormalizedAdjacency& a_hat, const Matrix<T>& x,
                    std::span<const std::int32_t> rows) {
  const CsrMatrix& a = a_hat.matrix;
  require(a.num_cols == static_cast<std::int64_t>(x.rows()),
          "spmm_rows: adjacency columns do not match feature rows");
  const std::size_t d = x.cols();
  Matrix<T> out(rows.size(), d);
  const auto& k = kern::table<T>();
  std::uint64_t touched = 0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::int64_t i = rows[r];
    require(i >= 0 && i < a.num_rows, "spmm_rows: row index out of range");
    T* dst = out.row(r);
    for (std::int64_t e = a.row_ptr[i]; e < a.row_ptr[i + 1]; ++e) {
      k.axpy(dst, x.row(static_cast<std::size_t>(a.col_idx[e])),
             static_cast<T>(a.values[e]), d);
    }
    touched += static_cast<std::uint64_t>(a.row_ptr[i + 1] - a.row_ptr[i]);
  }
  if (CostLedger* l = active_ledger()) {
    l->count_fa();
    l->add_flops(2ull * touched * d);
  }
  return out;
}

template <typename T>
Matrix<T> spmm_gather(const NormalizedAdjacency& a_hat, const Matrix<T>& x_local,
                      std::span<const std::int32_t> node_to_local,
                      std::span<const std::int32_t> out_rows) {
  const CsrMatrix& a = a_hat.matrix;
  require(node_to_local.size() == static_cast<std::size_t>(a.num_rows),
          "spmm_gather: node map size mismatch");
  const std::size_t d = x_local.cols();
  Matrix<T> out(out_rows.size(), d);
  const auto& k = kern::table<T>();
  std::uint64_t touched = 0;
  for (std::size_t r = 0; r < out_rows.size(); ++r) {
    const std::int64_t i = out_rows[r];
    require(i >= 0 && i < a.num_rows, "spmm_gather: row index out of range");
    T* dst = out.row(r);
    for (std::int64_t e = a.row_ptr[i]; e < a.row_ptr[i + 1]; ++e) {
      const std::int32_t local = node_to_local[static_cast<std::size_t>(a.col_idx[e])];
      require(local >= 0, "spmm_gather: neighbor row missing from gathered input");
      k.axpy(dst, x_local.row(static_cast<std::size_t>(local)),
             static_cast<T>(a.values[e]), d);
    }
    touched += static_cast<std::uint64_t>(a.row_ptr[i + 1] - a.row_ptr[i]);
  }
  if (CostLedger* l = active_ledger()) {
    l->count_fa();
    l->add_flops(2ull * touched * d);
  }
  return out;
}

template <typename T>
Matrix<T> spmm_adjoint(const NormalizedAdjacency& a_hat, const Matrix<T>& grad) {
  const CsrMatrix& a = a_hat.matrix;
  require(a.num_cols == static_cast<std::int64_t>(grad.rows()),
          "spmm_adjoint: shape mismatch");
  const std::size_t d = grad.cols();
  Matrix<T> out(static_cast<std::size_t>(a.num_rows), d);
  const auto& k = kern::table<T>();
  for (std::int64_t i = 0; i < a.num_rows; ++i) {
    T* dst = out.row(static_cast<std::size_t>(i));
    for (std::int64_t e = a.row_ptr[i]; e < a.row_ptr[i + 1]; ++e) {
      k.axpy(dst, grad.row(static_cast<std::size_t>(a.col_idx[e])),
             static_cast<T>(a.values[e]), d);
    }
  }
  if (CostLedger* l = active_ledger())
    l->add_flops(2ull * static_cast<std::uint64_t>(a.nnz()) * d);
  return out;
}

template <typename T>
Matrix<T> spmm_gather_adjoint(const NormalizedAdjacency& a_hat,
                              const Matrix<T>& grad_local,
                              std::span<const std::int32_t> grad_rows,
                              std::span<const std::int32_t> node_to_out,
                              std::size_t out_rows) {
  const CsrMatrix& a = a_hat.matrix;
  const std::size_t d = grad_local.cols();
  Matrix<T> out(out_rows, d);
  const auto& k = kern::table<T>();
  std::uint64_t touched = 0;
  // Scattering in ascending source order accumulates each destination row in
  // the same column order a row-gather would, so both directions agree
  // bitwise with the full-graph product.
  for (std::size_t r = 0; r < grad_rows.size(); ++r) {
    const std::int64_t i = grad_rows[r];
    const T* src = grad_local.row(r);
    for (std::int64_t e = a.row_ptr[i]; e < a.row_ptr[i + 1]; ++e) {
      const std::int32_t dst = node_to_out[static_cast<std::size_t>(a.col_idx[e])];
      if (dst < 0) continue;
      k.axpy(out.row(static_cast<std::size_t>(dst)), src,
             static_cast<T>(a.values[e]), d);
    }
    touched += static_cast<std::uint64_t>(a.row_ptr[i + 1] - a.row_ptr[i]);
  }
  if (CostLedger* l = active_ledger()) l->add_flops(2ull * touched * d);
  return out;
}

template <typename T>
AffineReluOut<T> affine_relu_forward(const Matrix<T>& x_hat, const Matrix<T>& w,
                                     ActivationGuard* activations) {
  require(x_hat.cols() == w.rows(), "affine_relu: inner dimensions disagree");
  AffineReluOut<T> out;
  out.pre_activation = Matrix<T>(x_hat.rows(), w.cols());
  const auto& k = kern::table<T>();
  k.matmul_nn(out.pre_activation.data(), x_hat.data(), w.data(), x_hat.rows(),
              x_hat.cols(), w.cols());
  out.hidden = Matrix<T>(x_hat.rows(), w.cols());
  k.relu(out.hidden.data(), out.pre_activation.data(), out.hidden.size());
  if (CostLedger* l = active_ledger()) {
    l->count_ft();
    l->add_flops(2ull * x_hat.rows() * x_hat.cols() * w.cols());
  }
  if (activations != nullptr) {
    activations->track_matrix(out.hidden);
    activations->track_matrix(out.pre_activation);
  }
  return out;
}

template <typename T>
Matrix<T> matmul(const Matrix<T>& a, const Matrix<T>& b) {
  require(a.cols() == b.rows(), "matmul: inner dimensions disagree");
  Matrix<T> c(a.rows(), b.cols());
  kern::table<T>().matmul_nn(c.data(), a.data(), b.data(), a.rows(), a.cols(), b.cols());
  if (CostLedger* l = active_ledger())
    l->add_flops(2ull * a.rows() * a.cols() * b.cols());
  return c;
}

template <typename T>
Matrix<T> matmul_tn(const Matrix<T>& a, const Matrix<T>& b) {
  require(a.rows() == b.rows(), "matmul_tn: row counts disagree");
  Matrix<T> c(a.cols(), b.cols());
  kern::table<T>().matmul_tn(c.data(), a.data(), b.data(), a.rows(), a.cols(), b.cols());
  if (CostLedger* l = active_ledger())
    l->add_flops(2ull * a.rows() * a.cols() * b.cols());
  return c;
}

template <typename T>
Matrix<T> matmul_nt(const Matrix<T>& a, const Matrix<T>& b) {
  require(a.cols() == b.cols(), "matmul_nt: column counts disagree");
  Matrix<T> c(a.rows(), b.rows());
  kern::table<T>().matmul_nt(c.data(), a.data(), b.data(), a.rows(), a.cols(), b.rows());
  if (CostLedger* l = active_ledger())
    l->add_flops(2ull * a.rows() * a.cols() * b.rows());
  return c;
}

template <typename T>
Matrix<T> gather_rows(const Matrix<T>& x, std::span<const std::int32_t> rows) {
  Matrix<T> out(rows.size(), x.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    require(rows[r] >= 0 && static_cast<std::size_t>(rows[r]) < x.rows(),
            "gather_rows: index out of range");
    const T* src = x.row(static_cast<std::size_t>(rows[r]));
    std::copy(src, src + x.cols(), out.row(r));
  }
  return out;
}

template <typename T>
LossGrad<T> softmax_cross_entropy(const Matrix<T>& logits,
                                  std::span<const std::int32_t> labels,
                                  std::span<const double> row_weights) {
  require(logits.rows() == labels.size(), "softmax_ce: label count mismatch");
  require(row_weights.empty() || row_weights.size() == labels.size(),
          "softmax_ce: weight count mismatch");
  const std::size_t rows = logits.rows();
  const std::size_t c = logits.cols();
  LossGrad<T> out;
  out.grad = Matrix<T>(rows, c);
  if (rows == 0) return out;

  double weight_sum = 0.0;
  if (row_weights.empty())
    weight_sum = static_cast<double>(rows);
  else
    for (const double w : row_weights) weight_sum += w;
  require(weight_sum > 0.0, "softmax_ce: weights sum to zero");

  double loss = 0.0;
  std::vector<double> prob(c);
  for (std::size_t i = 0; i < rows; ++i) {
    const std::int32_t y = labels[i];
    require(y >= 0 && static_cast<std::size_t>(y) < c, "softmax_ce: label out of range");
    const T* row = logits.row(i);
    double mx = static_cast<double>(row[0]);
    for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, static_cast<double>(row[j]));
    double denom = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      prob[j] = std::exp(static_cast<double>(row[j]) - mx);
      denom += prob[j];
    }
    const double wi = row_weights.empty() ? 1.0 : row_weights[i];
    loss += wi * (std::log(denom) - (static_cast<double>(row[y]) - mx));
    T* g = out.grad.row(i);
    const double scale = wi / weight_sum;
    for (std::size_t j = 0; j < c; ++j) {
      const double p = prob[j] / denom;
      g[j] = static_cast<T>(scale * (p - (static_cast<std::size_t>(y) == j ? 1.0 : 0.0)));
    }
  }
  out.loss = loss / weight_sum;
  return out;
}

template <typename T>
LossGrad<T> sigmoid_bce(const Matrix<T>& logits, const Matrix<T>& targets) {
  require(logits.same_shape(targets), "sigmoid_bce: shape mismatch");
  LossGrad<T> out;
  out.grad = Matrix<T>(logits.rows(), logits.cols());
  const std::size_t n = logits.size();
  if (n == 0) return out;
  const T* z = logits.data();
  const T* t = targets.data();
  T* g = out.grad.data();
  double loss = 0.0;
  const double inv = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double zi = static_cast<double>(z[i]);
    const double ti = static_cast<double>(t[i]);
    require(ti == 0.0 || ti == 1.0, "sigmoid_bce: targets must be 0/1");
    // max(z,0) - z*t + log(1 + exp(-|z|))
    loss += std::max(zi, 0.0) - zi * ti + std::log1p(std::exp(-std::abs(zi)));
    const double sig = 1.0 / (1.0 + std::exp(-zi));
    g[i] = static_cast<T>((sig - ti) * inv);
  }
  out.loss = loss * inv;
  return out;
}

template <typename T>
void adam_step(Matrix<T>& param, const Matrix<T>& grad, AdamState<T>& state) {
  require(param.same_shape(grad), "adam_step: shape mismatch");
  require(state.first_moment.size() == param.size(), "adam_step: state shape mismatch");
  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const T bias1 = static_cast<T>(1.0 / (1.0 - std::pow(state.beta1, t)));
  const T bias2 = static_cast<T>(1.0 / (1.0 - std::pow(state.beta2, t)));
  kern::table<T>().adam(param.data(), grad.data(), state.first_moment.data(),
                        state.second_moment.data(), param.size(),
                        static_cast<T>(state.learning_rate),
                        static_cast<T>(state.beta1), static_cast<T>(state.beta2),
                        static_cast<T>(state.epsilon), bias1, bias2);
}

template <typename T>
Matrix<T> xavier_init(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  require(rows > 0 && cols > 0, "xavier_init: dimensions must be positive");
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::mt19937_64 rng(seed);
  Matrix<T> m(rows, cols);
  T* data = m.data();
  for (std::size_t i = 0; i < m.size(); ++i)
    data[i] = static_cast<T>(uniform_range(rng, -bound, bound));
  return m;
}

#define LGCN_INSTANTIATE(T)                                                     \
  template Matrix<T> spmm<T>(const NormalizedAdjacency&, const Matrix<T>&);     \
  template Matrix<T> spmm_rows<T>(const NormalizedAdjacency&, const Matrix<T>&, \
                                  std::span<const std::int32_t>);               \
  template Matrix<T> spmm_gather<T>(const NormalizedAdjacency&,                 \
                                    const Matrix<T>&,                           \
                                    std::span<const std::int32_t>,              \
                                    std::span<const std::int32_t>);             \
  template Matrix<T> spmm_adjoint<T>(const NormalizedAdjacency&,                \
                                     const Matrix<T>&);                         \
  template Matrix<T> spmm_gather_adjoint<T>(                                    \
      const NormalizedAdjacency&, const Matrix<T>&,                             \
      std::span<const std::int32_t>, std::span<const std::int32_t>,             \
      std::size_t);                                                             \
  template AffineReluOut<T> affine_relu_forward<T>(const Matrix<T>&,            \
                                                   const Matrix<T>&,            \
                                                   ActivationGuard*);           \
  template Matrix<T> matmul<T>(const Matrix<T>&, const Matrix<T>&);             \
  template Matrix<T> matmul_tn<T>(const Matrix<T>&, const Matrix<T>&);          \
  template Matrix<T> matmul_nt<T>(const Matrix<T>&, const Matrix<T>&);          \
  template Matrix<T> gather_rows<T>(const Matrix<T>&,                           \
                                    std::span<const std::int32_t>);             \
  template LossGrad<T> softmax_cross_entropy<T>(                                \
      const Matrix<T>&, std::span<const std::int32_t>,                          \
      std::span<const double>);                                                 \
  template LossGrad<T> sigmoid_bce<T>(const Matrix<T>&, const Matrix<T>&);      \
  template void adam_step<T>(Matrix<T>&, const Matrix<T>&, AdamState<T>&);      \
  template Matrix<T> xavier_init<T>(std::size_t, std::size_t, std::uint64_t);

LGCN_INSTANTIATE(float)
LGCN_INSTANTIATE(double)

#undef LGCN_INSTANTIATE

}  // namespace lgcn
