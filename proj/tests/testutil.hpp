#pragma once

// Shared helpers for the test suites: independent dense oracles, random
// instance generators, and finite-difference machinery. Nothing here calls
// the kernel table, so oracle results cannot depend on the paths they check.

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "lgcn/graph.hpp"
#include "lgcn/matrix.hpp"
#include "lgcn/rng.hpp"

namespace lgcn::testutil {

inline Matrix<double> random_matrix(std::size_t rows, std::size_t cols,
                                    std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  Matrix<double> m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i)
    m.data()[i] = scale * uniform_range(rng, -1.0, 1.0);
  return m;
}

// Naive triple-loop product, the reference for every matmul variant.
inline Matrix<double> matmul_oracle(const Matrix<double>& a, const Matrix<double>& b) {
  Matrix<double> c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

inline Matrix<double> to_dense(const CsrMatrix& m) {
  Matrix<double> d(static_cast<std::size_t>(m.num_rows),
                   static_cast<std::size_t>(m.num_cols));
  for (std::int64_t i = 0; i < m.num_rows; ++i)
    for (std::int64_t e = m.row_ptr[i]; e < m.row_ptr[i + 1]; ++e)
      d(static_cast<std::size_t>(i), static_cast<std::size_t>(m.col_idx[e])) =
          m.values.empty() ? 1.0 : m.values[e];
  return d;
}

// Erdos-Renyi style undirected graph; may contain isolated nodes.
inline CsrMatrix random_graph(std::int64_t n, double edge_prob, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::pair<std::int32_t, std::int32_t>> edges;
  for (std::int32_t i = 0; i < n; ++i)
    for (std::int32_t j = i + 1; j < n; ++j)
      if (uniform01(rng) < edge_prob) edges.emplace_back(i, j);
  return build_csr(edges, n);
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-3});
}

inline double max_rel_err(const Matrix<double>& a, const Matrix<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, rel_err(a.data()[i], b.data()[i]));
  return worst;
}

inline double max_abs_diff(const Matrix<double>& a, const Matrix<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
  return worst;
}

// Central finite differences of a scalar function with respect to one
// parameter matrix. The parameter is restored afterwards.
inline Matrix<double> fd_gradient(Matrix<double>& param,
                                  const std::function<double()>& eval,
                                  double h = 1e-5) {
  Matrix<double> grad(param.rows(), param.cols());
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double saved = param.data()[i];
    param.data()[i] = saved + h;
    const double up = eval();
    param.data()[i] = saved - h;
    const double down = eval();
    param.data()[i] = saved;
    grad.data()[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

// Largest relative error between an analytic gradient and its FD estimate.
inline double gradient_check(const Matrix<double>& analytic,
                             Matrix<double>& param,
                             const std::function<double()>& eval,
                             double h = 1e-5) {
  const Matrix<double> fd = fd_gradient(param, eval, h);
  return max_rel_err(analytic, fd);
}

}  // namespace lgcn::testutil
