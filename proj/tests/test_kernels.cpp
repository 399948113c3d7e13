#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <vector>

#include "lgcn/common.hpp"
#include "lgcn/kernels/dispatch.hpp"
#include "lgcn/kernels/kernels.hpp"
#include "lgcn/rng.hpp"

using namespace lgcn;
using kern::Isa;

namespace {

template <typename T>
std::vector<T> random_vec(std::size_t n, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::vector<T> v(n);
  for (auto& x : v) x = static_cast<T>(scale * uniform_range(rng, -1.0, 1.0));
  return v;
}

// Sizes that cover full SIMD blocks, remainders, and tiny inputs.
const std::size_t kSizes[] = {0, 1, 3, 7, 8, 9, 15, 16, 17, 31, 64, 100, 257};

template <typename T>
double tol() {
  return std::is_same_v<T, float> ? 2e-5 : 1e-12;
}

}  // namespace

TEST_CASE_TEMPLATE("axpy scalar/avx2 equivalence", T, float, double) {
  if (!kern::avx2_available()) return;
  const auto& scalar = kern::table<T>(Isa::scalar);
  const auto& avx2 = kern::table<T>(Isa::avx2);
  for (const std::size_t n : kSizes) {
    std::vector<T> dst_a = random_vec<T>(n, 11 + n);
    std::vector<T> dst_b = dst_a;
    const std::vector<T> src = random_vec<T>(n, 17 + n);
    scalar.axpy(dst_a.data(), src.data(), T(0.37), n);
    avx2.axpy(dst_b.data(), src.data(), T(0.37), n);
    for (std::size_t i = 0; i < n; ++i)
      CHECK(std::abs(double(dst_a[i]) - double(dst_b[i])) <= tol<T>());
  }
}

TEST_CASE_TEMPLATE("dot scalar/avx2 equivalence", T, float, double) {
  if (!kern::avx2_available()) return;
  const auto& scalar = kern::table<T>(Isa::scalar);
  const auto& avx2 = kern::table<T>(Isa::avx2);
  for (const std::size_t n : kSizes) {
    const std::vector<T> x = random_vec<T>(n, 23 + n);
    const std::vector<T> y = random_vec<T>(n, 29 + n);
    const double a = scalar.dot(x.data(), y.data(), n);
    const double b = avx2.dot(x.data(), y.data(), n);
    CHECK(std::abs(a - b) <= tol<T>() * std::max<double>(1.0, n));
  }
}

TEST_CASE_TEMPLATE("relu and relu_mask equivalence", T, float, double) {
  if (!kern::avx2_available()) return;
  const auto& scalar = kern::table<T>(Isa::scalar);
  const auto& avx2 = kern::table<T>(Isa::avx2);
  for (const std::size_t n : kSizes) {
    const std::vector<T> x = random_vec<T>(n, 31 + n);
    const std::vector<T> dy = random_vec<T>(n, 37 + n);
    std::vector<T> ya(n), yb(n), da(n), db(n);
    scalar.relu(ya.data(), x.data(), n);
    avx2.relu(yb.data(), x.data(), n);
    scalar.relu_mask(da.data(), dy.data(), x.data(), n);
    avx2.relu_mask(db.data(), dy.data(), x.data(), n);
    CHECK(ya == yb);  // branchless max and compare agree exactly
    CHECK(da == db);
  }
}

TEST_CASE_TEMPLATE("adam step equivalence", T, float, double) {
  if (!kern::avx2_available()) return;
  const auto& scalar = kern::table<T>(Isa::scalar);
  const auto& avx2 = kern::table<T>(Isa::avx2);
  for (const std::size_t n : kSizes) {
    std::vector<T> p1 = random_vec<T>(n, 41 + n), p2 = p1;
    std::vector<T> m1 = random_vec<T>(n, 43 + n, 0.1), m2 = m1;
    std::vector<T> v1 = random_vec<T>(n, 47 + n, 0.1), v2 = v1;
    for (auto& x : v1) x = std::abs(x);
    v2 = v1;
    const std::vector<T> g = random_vec<T>(n, 53 + n);
    scalar.adam(p1.data(), g.data(), m1.data(), v1.data(), n, T(1e-3), T(0.9),
                T(0.999), T(1e-8), T(1.1), T(1.2));
    avx2.adam(p2.data(), g.data(), m2.data(), v2.data(), n, T(1e-3), T(0.9),
              T(0.999), T(1e-8), T(1.1), T(1.2));
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(std::abs(double(p1[i]) - double(p2[i])) <= tol<T>());
      CHECK(std::abs(double(m1[i]) - double(m2[i])) <= tol<T>());
      CHECK(std::abs(double(v1[i]) - double(v2[i])) <= tol<T>());
    }
  }
}

TEST_CASE_TEMPLATE("matmul variants scalar/avx2 equivalence", T, float, double) {
  if (!kern::avx2_available()) return;
  const auto& scalar = kern::table<T>(Isa::scalar);
  const auto& avx2 = kern::table<T>(Isa::avx2);
  const std::size_t shapes[][3] = {{1, 1, 1}, {2, 3, 4},  {5, 8, 9},
                                   {7, 16, 5}, {8, 17, 8}, {13, 33, 12}};
  for (const auto& s : shapes) {
    const std::size_t m = s[0], k = s[1], n = s[2];
    const std::vector<T> a = random_vec<T>(m * k, 61 + m + k);
    const std::vector<T> b = random_vec<T>(k * n, 67 + k + n);
    const std::vector<T> bt = random_vec<T>(n * k, 71 + k + n);
    const std::vector<T> c = random_vec<T>(m * n, 73 + m + n);

    std::vector<T> r1(m * n), r2(m * n);
    scalar.matmul_nn(r1.data(), a.data(), b.data(), m, k, n);
    avx2.matmul_nn(r2.data(), a.data(), b.data(), m, k, n);
    for (std::size_t i = 0; i < r1.size(); ++i)
      CHECK(std::abs(double(r1[i]) - double(r2[i])) <= tol<T>() * double(k));

    std::vector<T> t1(k * n), t2(k * n);
    scalar.matmul_tn(t1.data(), a.data(), c.data(), m, k, n);
    avx2.matmul_tn(t2.data(), a.data(), c.data(), m, k, n);
    for (std::size_t i = 0; i < t1.size(); ++i)
      CHECK(std::abs(double(t1[i]) - double(t2[i])) <= tol<T>() * double(m));

    std::vector<T> u1(m * n), u2(m * n);
    scalar.matmul_nt(u1.data(), a.data(), bt.data(), m, k, n);
    avx2.matmul_nt(u2.data(), a.data(), bt.data(), m, k, n);
    for (std::size_t i = 0; i < u1.size(); ++i)
      CHECK(std::abs(double(u1[i]) - double(u2[i])) <= tol<T>() * double(k));
  }
}

TEST_CASE("kernel runs are bit-reproducible per variant") {
  for (const Isa isa : {Isa::scalar, Isa::avx2}) {
    if (isa == Isa::avx2 && !kern::avx2_available()) continue;
    const auto& t = kern::table<double>(isa);
    const std::size_t m = 9, k = 33, n = 7;
    const std::vector<double> a = random_vec<double>(m * k, 101);
    const std::vector<double> b = random_vec<double>(k * n, 103);
    std::vector<double> r1(m * n), r2(m * n);
    t.matmul_nn(r1.data(), a.data(), b.data(), m, k, n);
    t.matmul_nn(r2.data(), a.data(), b.data(), m, k, n);
    CHECK(r1 == r2);
    CHECK(t.dot(a.data(), a.data(), m * k) == t.dot(a.data(), a.data(), m * k));
  }
}

TEST_CASE("isa dispatch honors forced level") {
  const Isa original = kern::active_isa();
  kern::set_isa(Isa::scalar);
  CHECK(kern::active_isa() == Isa::scalar);
  if (kern::avx2_available()) {
    kern::set_isa(Isa::avx2);
    CHECK(kern::active_isa() == Isa::avx2);
  } else {
    CHECK_THROWS_AS(kern::set_isa(Isa::avx2), Error);
  }
  kern::set_isa(original);
}
