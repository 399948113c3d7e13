// AVX2/FMA kernel variants. This translation unit is the only one compiled
// with -mavx2 -mfma; nothing here runs unless dispatch verified CPU support.

#include "lgcn/kernels/kernels.hpp"

#if defined(LGCN_AVX2_BUILD) && (defined(__x86_64__) || defined(__i386__))
#define LGCN_AVX2_ENABLED 1
#include <immintrin.h>

#include <cmath>
#include <cstring>
#else
#define LGCN_AVX2_ENABLED 0
#endif

namespace lgcn::kern {

#if LGCN_AVX2_ENABLED

namespace {

// ---------------------------------------------------------------- float ----

void axpy_f32(float* dst, const float* src, float a, std::size_t n) {
  const __m256 va = _mm256_set1_ps(a);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 d = _mm256_loadu_ps(dst + i);
    const __m256 s = _mm256_loadu_ps(src + i);
    _mm256_storeu_ps(dst + i, _mm256_fmadd_ps(va, s, d));
  }
  for (; i < n; ++i) dst[i] += a * src[i];
}

float dot_f32(const float* x, const float* y, std::size_t n) {
  __m256 acc = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc = _mm256_fmadd_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i), acc);
  }
  float lanes[8];
  _mm256_storeu_ps(lanes, acc);
  float s = lanes[0];
  for (int l = 1; l < 8; ++l) s += lanes[l];
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void relu_f32(float* y, const float* x, std::size_t n) {
  const __m256 zero = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(y + i, _mm256_max_ps(_mm256_loadu_ps(x + i), zero));
  }
  for (; i < n; ++i) y[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

void relu_mask_f32(float* dx, const float* dy, const float* pre,
                   std::size_t n) {
  const __m256 zero = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 mask = _mm256_cmp_ps(_mm256_loadu_ps(pre + i), zero, _CMP_GT_OQ);
    _mm256_storeu_ps(dx + i, _mm256_and_ps(_mm256_loadu_ps(dy + i), mask));
  }
  for (; i < n; ++i) dx[i] = pre[i] > 0.0f ? dy[i] : 0.0f;
}

void adam_f32(float* p, const float* g, float* m, float* v, std::size_t n,
              float lr, float beta1, float beta2, float eps, float bias1,
              float bias2) {
  const __m256 vb1 = _mm256_set1_ps(beta1);
  const __m256 vb2 = _mm256_set1_ps(beta2);
  const __m256 vc1 = _mm256_set1_ps(1.0f - beta1);
  const __m256 vc2 = _mm256_set1_ps(1.0f - beta2);
  const __m256 vlr = _mm256_set1_ps(lr);
  const __m256 veps = _mm256_set1_ps(eps);
  const __m256 vbias1 = _mm256_set1_ps(bias1);
  const __m256 vbias2 = _mm256_set1_ps(bias2);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 vg = _mm256_loadu_ps(g + i);
    __m256 vm = _mm256_fmadd_ps(vc1, vg, _mm256_mul_ps(vb1, _mm256_loadu_ps(m + i)));
    __m256 vv = _mm256_fmadd_ps(vc2, _mm256_mul_ps(vg, vg),
                                _mm256_mul_ps(vb2, _mm256_loadu_ps(v + i)));
    _mm256_storeu_ps(m + i, vm);
    _mm256_storeu_ps(v + i, vv);
    const __m256 mhat = _mm256_mul_ps(vm, vbias1);
    const __m256 den = _mm256_add_ps(_mm256_sqrt_ps(_mm256_mul_ps(vv, vbias2)), veps);
    const __m256 upd = _mm256_div_ps(_mm256_mul_ps(vlr, mhat), den);
    _mm256_storeu_ps(p + i, _mm256_sub_ps(_mm256_loadu_ps(p + i), upd));
  }
  for (; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0f - beta1) * g[i];
    v[i] = beta2 * v[i] + (1.0f - beta2) * g[i] * g[i];
    p[i] -= lr * (m[i] * bias1) / (std::sqrt(v[i] * bias2) + eps);
  }
}

void matmul_nn_f32(float* c, const float* a, const float* b, std::size_t m,
                   std::size_t k, std::size_t n) {
  std::memset(c, 0, m * n * sizeof(float));
  for (std::size_t i = 0; i < m; ++i) {
    float* crow = c + i * n;
    for (std::size_t kk = 0; kk < k; ++kk) {
      axpy_f32(crow, b + kk * n, a[i * k + kk], n);
    }
  }
}

void matmul_tn_f32(float* c, const float* a, const float* b, std::size_t m,
                   std::size_t k, std::size_t n) {
  std::memset(c, 0, k * n * sizeof(float));
  for (std::size_t i = 0; i < m; ++i) {
    const float* arow = a + i * k;
    const float* brow = b + i * n;
    for (std::size_t kk = 0; kk < k; ++kk) {
      axpy_f32(c + kk * n, brow, arow[kk], n);
    }
  }
}

void matmul_nt_f32(float* c, const float* a, const float* b, std::size_t m,
                   std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const float* arow = a + i * k;
    for (std::size_t j = 0; j < n; ++j) c[i * n + j] = dot_f32(arow, b + j * k, k);
  }
}

// --------------------------------------------------------------- double ----

void axpy_f64(double* dst, const double* src, double a, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_loadu_pd(dst + i);
    const __m256d s = _mm256_loadu_pd(src + i);
    _mm256_storeu_pd(dst + i, _mm256_fmadd_pd(va, s, d));
  }
  for (; i < n; ++i) dst[i] += a * src[i];
}

double dot_f64(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
  }
  double lanes[4];
  _mm256_storeu_pd(lanes, acc);
  double s = ((lanes[0] + lanes[1]) + lanes[2]) + lanes[3];
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void relu_f64(double* y, const double* x, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_max_pd(_mm256_loadu_pd(x + i), zero));
  }
  for (; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_mask_f64(double* dx, const double* dy, const double* pre,
                   std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(pre + i), zero, _CMP_GT_OQ);
    _mm256_storeu_pd(dx + i, _mm256_and_pd(_mm256_loadu_pd(dy + i), mask));
  }
  for (; i < n; ++i) dx[i] = pre[i] > 0.0 ? dy[i] : 0.0;
}

void adam_f64(double* p, const double* g, double* m, double* v, std::size_t n,
              double lr, double beta1, double beta2, double eps, double bias1,
              double bias2) {
  const __m256d vb1 = _mm256_set1_pd(beta1);
  const __m256d vb2 = _mm256_set1_pd(beta2);
  const __m256d vc1 = _mm256_set1_pd(1.0 - beta1);
  const __m256d vc2 = _mm256_set1_pd(1.0 - beta2);
  const __m256d vlr = _mm256_set1_pd(lr);
  const __m256d veps = _mm256_set1_pd(eps);
  const __m256d vbias1 = _mm256_set1_pd(bias1);
  const __m256d vbias2 = _mm256_set1_pd(bias2);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vg = _mm256_loadu_pd(g + i);
    __m256d vm = _mm256_fmadd_pd(vc1, vg, _mm256_mul_pd(vb1, _mm256_loadu_pd(m + i)));
    __m256d vv = _mm256_fmadd_pd(vc2, _mm256_mul_pd(vg, vg),
                                 _mm256_mul_pd(vb2, _mm256_loadu_pd(v + i)));
    _mm256_storeu_pd(m + i, vm);
    _mm256_storeu_pd(v + i, vv);
    const __m256d mhat = _mm256_mul_pd(vm, vbias1);
    const __m256d den = _mm256_add_pd(_mm256_sqrt_pd(_mm256_mul_pd(vv, vbias2)), veps);
    const __m256d upd = _mm256_div_pd(_mm256_mul_pd(vlr, mhat), den);
    _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), upd));
  }
  for (; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
    p[i] -= lr * (m[i] * bias1) / (std::sqrt(v[i] * bias2) + eps);
  }
}

void matmul_nn_f64(double* c, const double* a, const double* b, std::size_t m,
                   std::size_t k, std::size_t n) {
  std::memset(c, 0, m * n * sizeof(double));
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    for (std::size_t kk = 0; kk < k; ++kk) {
      axpy_f64(crow, b + kk * n, a[i * k + kk], n);
    }
  }
}

void matmul_tn_f64(double* c, const double* a, const double* b, std::size_t m,
                   std::size_t k, std::size_t n) {
  std::memset(c, 0, k * n * sizeof(double));
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    const double* brow = b + i * n;
    for (std::size_t kk = 0; kk < k; ++kk) {
      axpy_f64(c + kk * n, brow, arow[kk], n);
    }
  }
}

void matmul_nt_f64(double* c, const double* a, const double* b, std::size_t m,
                   std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    for (std::size_t j = 0; j < n; ++j) c[i * n + j] = dot_f64(arow, b + j * k, k);
  }
}

const KernelTable<float> kAvx2F32{axpy_f32,   dot_f32,       relu_f32,
                                  relu_mask_f32, adam_f32,   matmul_nn_f32,
                                  matmul_tn_f32, matmul_nt_f32};
const KernelTable<double> kAvx2F64{axpy_f64,   dot_f64,       relu_f64,
                                   relu_mask_f64, adam_f64,   matmul_nn_f64,
                                   matmul_tn_f64, matmul_nt_f64};

}  // namespace

namespace detail {
template <>
const KernelTable<float>* avx2_table<float>() {
  return &kAvx2F32;
}
template <>
const KernelTable<double>* avx2_table<double>() {
  return &kAvx2F64;
}
}  // namespace detail

#else  // !LGCN_AVX2_ENABLED

namespace detail {
template <>
const KernelTable<float>* avx2_table<float>() {
  return nullptr;
}
template <>
const KernelTable<double>* avx2_table<double>() {
  return nullptr;
}
}  // namespace detail

#endif

}  // namespace lgcn::kern
