#pragma once

#include <cstddef>

#include "lgcn/kernels/dispatch.hpp"

namespace lgcn::kern {

// Arithmetic inner loops shared by every trainer. Each entry has a scalar
// reference implementation and an AVX2 variant selected at runtime; the two
// are equivalence-tested against each other.
//
// Every kernel accumulates each output element in one fixed order, so a given
// variant is bit-reproducible across runs regardless of how callers partition
// work over rows.
template <typename T>
struct KernelTable {
  // dst[i] += a * src[i]
  void (*axpy)(T* dst, const T* src, T a, std::size_t n);
  // Fixed-order dot product.
  T (*dot)(const T* x, const T* y, std::size_t n);
  // y[i] = max(x[i], 0)
  void (*relu)(T* y, const T* x, std::size_t n);
  // dx[i] = pre[i] > 0 ? dy[i] : 0   (dx may alias dy)
  void (*relu_mask)(T* dx, const T* dy, const T* pre, std::size_t n);
  // Adam update with precomputed bias corrections 1/(1-beta^t).
  void (*adam)(T* p, const T* g, T* m, T* v, std::size_t n, T lr, T beta1,
               T beta2, T eps, T bias1, T bias2);
  // C[MxN] = A[MxK] * B[KxN]; accumulation over k in ascending order.
  void (*matmul_nn)(T* c, const T* a, const T* b, std::size_t m, std::size_t k,
                    std::size_t n);
  // C[KxN] = A^T * B with A[MxK], B[MxN]; accumulation over rows of A/B.
  void (*matmul_tn)(T* c, const T* a, const T* b, std::size_t m, std::size_t k,
                    std::size_t n);
  // C[MxN] = A * B^T with A[MxK], B[NxK]; each element is one dot product.
  void (*matmul_nt)(T* c, const T* a, const T* b, std::size_t m, std::size_t k,
                    std::size_t n);
};

// Table for the active ISA.
template <typename T>
const KernelTable<T>& table();

// Table for an explicit ISA (equivalence tests). Throws if the requested
// variant is not available in this build/CPU.
template <typename T>
const KernelTable<T>& table(Isa isa);

extern template const KernelTable<float>& table<float>();
extern template const KernelTable<double>& table<double>();
extern template const KernelTable<float>& table<float>(Isa);
extern template const KernelTable<double>& table<double>(Isa);

namespace detail {
template <typename T>
const KernelTable<T>& scalar_table();
// nullptr when the build or CPU cannot run AVX2.
template <typename T>
const KernelTable<T>* avx2_table();
}  // namespace detail

}  // namespace lgcn::kern
