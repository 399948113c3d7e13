// Scalar reference kernels. This translation unit is compiled with
// -ffp-contract=off so the reference stays exactly as written; the AVX2
// variants opt into FMA explicitly.

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "lgcn/kernels/kernels.hpp"

namespace lgcn::kern {
namespace {

template <typename T>
void axpy_scalar(T* dst, const T* src, T a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] += a * src[i];
}

template <typename T>
T dot_scalar(const T* x, const T* y, std::size_t n) {
  T s = T(0);
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

template <typename T>
void relu_scalar(T* y, const T* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
}

template <typename T>
void relu_mask_scalar(T* dx, const T* dy, const T* pre, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dx[i] = pre[i] > T(0) ? dy[i] : T(0);
}

template <typename T>
void adam_scalar(T* p, const T* g, T* m, T* v, std::size_t n, T lr, T beta1,
                 T beta2, T eps, T bias1, T bias2) {
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = beta1 * m[i] + (T(1) - beta1) * g[i];
    v[i] = beta2 * v[i] + (T(1) - beta2) * g[i] * g[i];
    const T mhat = m[i] * bias1;
    const T vhat = v[i] * bias2;
    p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

template <typename T>
void matmul_nn_scalar(T* c, const T* a, const T* b, std::size_t m,
                      std::size_t k, std::size_t n) {
  std::fill(c, c + m * n, T(0));
  for (std::size_t i = 0; i < m; ++i) {
    T* crow = c + i * n;
    for (std::size_t kk = 0; kk < k; ++kk) {
      const T av = a[i * k + kk];
      const T* brow = b + kk * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

template <typename T>
void matmul_tn_scalar(T* c, const T* a, const T* b, std::size_t m,
                      std::size_t k, std::size_t n) {
  std::fill(c, c + k * n, T(0));
  for (std::size_t i = 0; i < m; ++i) {
    const T* arow = a + i * k;
    const T* brow = b + i * n;
    for (std::size_t kk = 0; kk < k; ++kk) {
      T* crow = c + kk * n;
      const T av = arow[kk];
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

template <typename T>
void matmul_nt_scalar(T* c, const T* a, const T* b, std::size_t m,
                      std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const T* arow = a + i * k;
    for (std::size_t j = 0; j < n; ++j) {
      c[i * n + j] = dot_scalar(arow, b + j * k, k);
    }
  }
}

template <typename T>
KernelTable<T> make_scalar_table() {
  KernelTable<T> t{};
  t.axpy = axpy_scalar<T>;
  t.dot = dot_scalar<T>;
  t.relu = relu_scalar<T>;
  t.relu_mask = relu_mask_scalar<T>;
  t.adam = adam_scalar<T>;
  t.matmul_nn = matmul_nn_scalar<T>;
  t.matmul_tn = matmul_tn_scalar<T>;
  t.matmul_nt = matmul_nt_scalar<T>;
  return t;
}

}  // namespace

namespace detail {

template <>
const KernelTable<float>& scalar_table<float>() {
  static const KernelTable<float> t = make_scalar_table<float>();
  return t;
}

template <>
const KernelTable<double>& scalar_table<double>() {
  static const KernelTable<double> t = make_scalar_table<double>();
  return t;
}

}  // namespace detail
}  // namespace lgcn::kern
