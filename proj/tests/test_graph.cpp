#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "lgcn/graph.hpp"
#include "lgcn/rng.hpp"
#include "testutil.hpp"

using namespace lgcn;
namespace fs = std::filesystem;
namespace tu = lgcn::testutil;

namespace {

using Edge = std::pair<std::int32_t, std::int32_t>;

fs::path temp_dir(const char* tag) {
  fs::path p = fs::temp_directory_path() / (std::string("lgcn_graph_") + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("build_csr symmetry, dedup, empty") {
  const std::vector<Edge> one{{0, 1}};
  const CsrMatrix m = build_csr(one, 2);
  CHECK(m.nnz() == 2);
  CHECK(m.has_entry(0, 1));
  CHECK(m.has_entry(1, 0));

  const CsrMatrix empty = build_csr(std::vector<Edge>{}, 3);
  CHECK(empty.nnz() == 0);
  CHECK(empty.row_ptr.size() == 4);

  const std::vector<Edge> dup{{0, 1}, {1, 0}, {0, 1}};
  const CsrMatrix d = build_csr(dup, 2);
  CHECK(d.nnz() == m.nnz());
  CHECK(d.col_idx == m.col_idx);
}

TEST_CASE("build_csr rejects bad input") {
  CHECK_THROWS_AS(build_csr(std::vector<Edge>{{0, 5}}, 3), ValidationError);
  CHECK_THROWS_AS(build_csr(std::vector<Edge>{{1, 1}}, 3), ValidationError);
}

TEST_CASE("normalize_adjacency matches hand-computed values") {
  // 2 nodes, 1 edge, self-loops: degrees 2 and 2, every entry 0.5.
  const CsrMatrix pair = build_csr(std::vector<Edge>{{0, 1}}, 2);
  const NormalizedAdjacency a = normalize_adjacency(pair, true);
  CHECK(a.matrix.nnz() == 4);
  for (const double v : a.matrix.values) CHECK(v == doctest::Approx(0.5).epsilon(1e-15));

  // Isolated node with self-loop: [1.0].
  const NormalizedAdjacency iso = normalize_adjacency(build_csr(std::vector<Edge>{}, 1), true);
  CHECK(iso.matrix.nnz() == 1);
  CHECK(iso.matrix.values[0] == 1.0);

  // Path 0-1-2: degrees (2,3,2); diagonal (1/2, 1/3, 1/2), off-diag 1/sqrt(6).
  const CsrMatrix path = build_csr(std::vector<Edge>{{0, 1}, {1, 2}}, 3);
  const Matrix<double> dense = tu::to_dense(normalize_adjacency(path, true).matrix);
  CHECK(dense(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(dense(1, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(dense(2, 2) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(dense(0, 1) == doctest::Approx(1.0 / std::sqrt(6.0)).epsilon(1e-15));
  CHECK(dense(1, 2) == doctest::Approx(1.0 / std::sqrt(6.0)).epsilon(1e-15));
  CHECK(dense(0, 2) == 0.0);
}

TEST_CASE("normalize_adjacency without self-loops reports zero degrees") {
  const CsrMatrix iso = build_csr(std::vector<Edge>{{0, 1}}, 3);  // node 2 isolated
  CHECK_THROWS_AS(normalize_adjacency(iso, false), ValidationError);
  const NormalizedAdjacency ok = normalize_adjacency(build_csr(std::vector<Edge>{{0, 1}}, 2), false);
  CHECK(ok.matrix.nnz() == 2);
  CHECK(ok.matrix.values[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_FALSE(ok.self_loops_added);
}

TEST_CASE("normalized adjacency is exactly symmetric with preserved support") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const CsrMatrix g = tu::random_graph(10, 0.35, seed);
    const NormalizedAdjacency a = normalize_adjacency(g, true);
    const CsrMatrix& m = a.matrix;
    for (std::int64_t i = 0; i < m.num_rows; ++i) {
      for (std::int64_t e = m.row_ptr[i]; e < m.row_ptr[i + 1]; ++e) {
        const std::int64_t j = m.col_idx[e];
        // Mirror entry exists and is bitwise equal.
        bool found = false;
        for (std::int64_t f = m.row_ptr[j]; f < m.row_ptr[j + 1]; ++f) {
          if (m.col_idx[f] == i) {
            found = true;
            CHECK(m.values[f] == m.values[e]);
          }
        }
        CHECK(found);
        // Support is exactly A + I.
        CHECK((i == j || g.has_entry(i, j)));
      }
      CHECK(m.has_entry(i, i));
    }
    CHECK(m.nnz() == g.nnz() + m.num_rows);
  }
}

TEST_CASE("normalization commutes with node permutation") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    const std::int64_t n = 10;
    const CsrMatrix g = tu::random_graph(n, 0.4, 1000 + trial);
    std::vector<std::int32_t> perm(n);
    for (std::int64_t i = 0; i < n; ++i) perm[i] = static_cast<std::int32_t>(i);
    shuffle_inplace(rng, perm);

    std::vector<Edge> permuted;
    for (std::int64_t i = 0; i < n; ++i)
      for (const std::int32_t j : g.row_cols(i))
        if (i < j)
          permuted.emplace_back(std::min(perm[i], perm[j]), std::max(perm[i], perm[j]));

    const Matrix<double> a = tu::to_dense(normalize_adjacency(g, true).matrix);
    const Matrix<double> b =
        tu::to_dense(normalize_adjacency(build_csr(permuted, n), true).matrix);
    for (std::int64_t i = 0; i < n; ++i)
      for (std::int64_t j = 0; j < n; ++j)
        CHECK(a(i, j) == b(perm[i], perm[j]));
  }
}

TEST_CASE("sbm degenerate probabilities give disjoint cliques") {
  SbmParams p;
  p.block_sizes = {50, 50};
  p.intra_prob = 1.0;
  p.inter_prob = 0.0;
  p.feature_dim = 4;
  p.feature_noise = 0.0;
  p.seed = 5;
  const GraphDataset ds = generate_sbm(p);
  CHECK(ds.num_nodes == 100);
  CHECK(ds.num_edges == 2 * (50 * 49) / 2);
  for (std::int64_t i = 0; i < 50; ++i) CHECK(ds.labels[i] == 0);
  for (std::int64_t i = 50; i < 100; ++i) CHECK(ds.labels[i] == 1);
  CHECK_FALSE(ds.adjacency.has_entry(0, 50));
  CHECK(ds.adjacency.has_entry(0, 49));
}

TEST_CASE("sbm is deterministic per seed") {
  SbmParams p;
  p.block_sizes = {30, 30, 30};
  p.intra_prob = 0.2;
  p.inter_prob = 0.02;
  p.feature_dim = 8;
  p.feature_noise = 0.7;
  p.seed = 11;
  const GraphDataset a = generate_sbm(p);
  const GraphDataset b = generate_sbm(p);
  CHECK(a.adjacency.col_idx == b.adjacency.col_idx);
  CHECK(a.features == b.features);
  CHECK(a.train_mask == b.train_mask);
  p.seed = 12;
  const GraphDataset c = generate_sbm(p);
  CHECK(a.adjacency.col_idx != c.adjacency.col_idx);
}

TEST_CASE("sbm mean intra-block degree matches expectation") {
  SbmParams p;
  p.block_sizes = {100, 100, 100};
  p.intra_prob = 0.1;
  p.inter_prob = 0.01;
  p.feature_dim = 8;
  p.feature_noise = 0.0;
  p.seed = 7;
  const GraphDataset ds = generate_sbm(p);
  double intra_degree_sum = 0.0;
  for (std::int64_t i = 0; i < ds.num_nodes; ++i)
    for (const std::int32_t j : ds.adjacency.row_cols(i))
      if (ds.labels[i] == ds.labels[j]) intra_degree_sum += 1.0;
  const double mean = intra_degree_sum / static_cast<double>(ds.num_nodes);
  // Expected (block_size - 1) * intra_prob = 9.9; allow generous sampling slack.
  CHECK(mean == doctest::Approx(9.9).epsilon(0.12));
}

TEST_CASE("sbm rejects feature_dim below block count") {
  SbmParams p;
  p.block_sizes = {10, 10, 10};
  p.intra_prob = 0.5;
  p.inter_prob = 0.1;
  p.feature_dim = 2;
  p.seed = 1;
  CHECK_THROWS_AS(generate_sbm(p), ValidationError);
}

TEST_CASE("dataset write/load round-trips exactly") {
  SbmParams p;
  p.block_sizes = {20, 20};
  p.intra_prob = 0.3;
  p.inter_prob = 0.05;
  p.feature_dim = 6;
  p.feature_noise = 1.3;
  p.seed = 21;
  const GraphDataset original = generate_sbm(p);
  const fs::path dir = temp_dir("roundtrip");
  write_dataset(original, dir);
  const GraphDataset loaded = load_dataset(dir);
  CHECK(loaded.num_nodes == original.num_nodes);
  CHECK(loaded.num_edges == original.num_edges);
  CHECK(loaded.adjacency.col_idx == original.adjacency.col_idx);
  CHECK(loaded.features == original.features);
  CHECK(loaded.labels == original.labels);
  CHECK(loaded.train_mask == original.train_mask);
  CHECK(loaded.val_mask == original.val_mask);
  CHECK(loaded.test_mask == original.test_mask);
  fs::remove_all(dir);
}

TEST_CASE("multi-label datasets round-trip exactly") {
  SbmParams p;
  p.block_sizes = {12, 12};
  p.intra_prob = 0.4;
  p.inter_prob = 0.05;
  p.feature_dim = 5;
  p.feature_noise = 0.9;
  p.seed = 33;
  GraphDataset ds = generate_sbm(p);
  ds.label_kind = LabelKind::multi;
  ds.class_count = 3;
  ds.label_matrix = Matrix<double>(static_cast<std::size_t>(ds.num_nodes), 3);
  std::mt19937_64 rng(34);
  for (std::size_t i = 0; i < ds.label_matrix.size(); ++i)
    ds.label_matrix.data()[i] = uniform01(rng) < 0.4 ? 1.0 : 0.0;
  ds.labels.clear();
  ds.validate();

  const fs::path dir = temp_dir("multilabel");
  write_dataset(ds, dir);
  const GraphDataset loaded = load_dataset(dir);
  CHECK(loaded.label_kind == LabelKind::multi);
  CHECK(loaded.label_matrix == ds.label_matrix);
  CHECK(loaded.features == ds.features);
  fs::remove_all(dir);
}

TEST_CASE("load_dataset reports row mismatches and bad masks") {
  SbmParams p;
  p.block_sizes = {5, 5};
  p.intra_prob = 0.9;
  p.inter_prob = 0.0;
  p.feature_dim = 4;
  p.seed = 2;
  const GraphDataset ds = generate_sbm(p);

  {
    const fs::path dir = temp_dir("rowmismatch");
    write_dataset(ds, dir);
    // Drop the last feature row: 9 rows of features vs 10 labels.
    std::vector<std::string> lines;
    {
      std::ifstream in(dir / "features.csv");
      std::string line;
      while (std::getline(in, line)) lines.push_back(line);
    }
    lines.pop_back();
    {
      std::ofstream out(dir / "features.csv");
      for (const auto& l : lines) out << l << '\n';
    }
    CHECK_THROWS_WITH_AS(load_dataset(dir),
                         doctest::Contains("9"), ValidationError);
    fs::remove_all(dir);
  }
  {
    const fs::path dir = temp_dir("badmask");
    write_dataset(ds, dir);
    std::ofstream out(dir / "mask.train", std::ios::app);
    out << 99 << '\n';
    out.close();
    CHECK_THROWS_AS(load_dataset(dir), ValidationError);
    fs::remove_all(dir);
  }
  {
    const fs::path dir = temp_dir("missing");
    write_dataset(ds, dir);
    fs::remove(dir / "edges.tsv");
    CHECK_THROWS_AS(load_dataset(dir), ValidationError);
    fs::remove_all(dir);
  }
  {
    // A weighted edge line (third column) is malformed, not binarized.
    const fs::path dir = temp_dir("weighted");
    write_dataset(ds, dir);
    std::ofstream out(dir / "edges.tsv", std::ios::app);
    out << "0\t3\t0.5\n";
    out.close();
    CHECK_THROWS_AS(load_dataset(dir), ValidationError);
    fs::remove_all(dir);
  }
}

TEST_CASE("k_hop_ball equals breadth-first distances") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const CsrMatrix g = tu::random_graph(20, 0.15, 400 + seed);
    for (std::size_t hops : {0u, 1u, 2u, 3u}) {
      const std::int32_t root = static_cast<std::int32_t>(seed % 20);
      const std::int32_t seeds_arr[1] = {root};
      const auto ball = k_hop_ball(g, seeds_arr, hops);

      // Oracle: dense BFS distance computation.
      std::vector<int> dist(20, -1);
      dist[root] = 0;
      std::vector<std::int32_t> frontier{root};
      for (int d = 1; !frontier.empty(); ++d) {
        std::vector<std::int32_t> next;
        for (const std::int32_t u : frontier)
          for (const std::int32_t v : g.row_cols(u))
            if (dist[v] < 0) {
              dist[v] = d;
              next.push_back(v);
            }
        frontier = next;
      }
      std::vector<std::int32_t> expected;
      for (std::int32_t v = 0; v < 20; ++v)
        if (dist[v] >= 0 && dist[v] <= static_cast<int>(hops)) expected.push_back(v);
      CHECK(ball == expected);
    }
  }
}
