#include "lgcn/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "lgcn/common.hpp"
#include "lgcn/rng.hpp"

namespace lgcn {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw ValidationError(msg); }

std::string loc(const fs::path& file, std::size_t line) {
  return file.filename().string() + ":" + std::to_string(line);
}

// Shortest representation that parses back to the same double.
std::string format_double(double v) {
  char buf[32];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

double parse_double(std::string_view tok, const fs::path& file, std::size_t line) {
  const std::string s(tok);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    fail("malformed number '" + s + "' at " + loc(file, line));
  return v;
}

std::int64_t parse_int(std::string_view tok, const fs::path& file, std::size_t line) {
  std::int64_t v = 0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    fail("malformed integer '" + std::string(tok) + "' at " + loc(file, line));
  return v;
}

std::vector<std::string> read_lines(const fs::path& file) {
  std::ifstream in(file);
  if (!in) fail("missing file: " + file.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      break;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::vector<std::int32_t> read_mask(const fs::path& file, std::int64_t num_nodes) {
  std::vector<std::int32_t> mask;
  const auto lines = read_lines(file);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::int64_t id = parse_int(lines[i], file, i + 1);
    if (id < 0 || id >= num_nodes)
      fail("node id " + std::to_string(id) + " out of range [0," +
           std::to_string(num_nodes) + ") at " + loc(file, i + 1));
    mask.push_back(static_cast<std::int32_t>(id));
  }
  std::sort(mask.begin(), mask.end());
  if (std::adjacent_find(mask.begin(), mask.end()) != mask.end())
    fail("duplicate node id in " + file.string());
  return mask;
}

}  // namespace

bool CsrMatrix::has_entry(std::int64_t i, std::int64_t j) const {
  const auto cols = row_cols(i);
  return std::binary_search(cols.begin(), cols.end(),
                            static_cast<std::int32_t>(j));
}

void GraphDataset::validate() const {
  if (num_nodes < 0) fail("dataset: negative node count");
  if (adjacency.num_rows != num_nodes || adjacency.num_cols != num_nodes)
    fail("dataset: adjacency shape does not match node count");
  if (static_cast<std::int64_t>(features.rows()) != num_nodes)
    fail("dataset: features have " + std::to_string(features.rows()) +
         " rows but the graph has " + std::to_string(num_nodes) + " nodes");
  if (class_count <= 0) fail("dataset: class_count must be positive");

  if (label_kind == LabelKind::single) {
    if (static_cast<std::int64_t>(labels.size()) != num_nodes)
      fail("dataset: " + std::to_string(labels.size()) + " labels for " +
           std::to_string(num_nodes) + " nodes");
    for (const std::int32_t y : labels)
      if (y < 0 || y >= class_count) fail("dataset: label out of range");
  } else {
    if (static_cast<std::int64_t>(label_matrix.rows()) != num_nodes ||
        static_cast<std::int64_t>(label_matrix.cols()) != class_count)
      fail("dataset: label matrix shape mismatch");
    for (const double v : label_matrix.values())
      if (v != 0.0 && v != 1.0) fail("dataset: multi-label entries must be 0/1");
  }

  // Adjacency: sorted columns, no self-loops, symmetric.
  if (adjacency.row_ptr.size() != static_cast<std::size_t>(num_nodes) + 1)
    fail("dataset: malformed adjacency row pointers");
  for (std::int64_t i = 0; i < num_nodes; ++i) {
    const auto cols = adjacency.row_cols(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (cols[k] < 0 || cols[k] >= num_nodes) fail("dataset: edge endpoint out of range");
      if (cols[k] == i) fail("dataset: adjacency contains a self-loop");
      if (k > 0 && cols[k] <= cols[k - 1]) fail("dataset: adjacency columns not strictly sorted");
      if (!adjacency.has_entry(cols[k], i)) fail("dataset: adjacency is not symmetric");
    }
  }
  if (num_edges * 2 != adjacency.nnz()) fail("dataset: edge count does not match adjacency");

  const auto check_mask = [&](const std::vector<std::int32_t>& m, const char* name) {
    for (std::size_t k = 0; k < m.size(); ++k) {
      if (m[k] < 0 || m[k] >= num_nodes) fail(std::string("dataset: ") + name + " mask id out of range");
      if (k > 0 && m[k] <= m[k - 1]) fail(std::string("dataset: ") + name + " mask not strictly sorted");
    }
  };
  check_mask(train_mask, "train");
  check_mask(val_mask, "val");
  check_mask(test_mask, "test");
  std::vector<std::int32_t> all;
  all.reserve(train_mask.size() + val_mask.size() + test_mask.size());
  all.insert(all.end(), train_mask.begin(), train_mask.end());
  all.insert(all.end(), val_mask.begin(), val_mask.end());
  all.insert(all.end(), test_mask.begin(), test_mask.end());
  std::sort(all.begin(), all.end());
  if (std::adjacent_find(all.begin(), all.end()) != all.end())
    fail("dataset: masks overlap");
}

CsrMatrix build_csr(std::span<const std::pair<std::int32_t, std::int32_t>> edges,
                    std::int64_t num_nodes) {
  std::vector<std::pair<std::int32_t, std::int32_t>> dir;
  dir.reserve(edges.size() * 2);
  for (const auto& [u, v] : edges) {
    if (u < 0 || v < 0 || u >= num_nodes || v >= num_nodes)
      fail("build_csr: edge (" + std::to_string(u) + "," + std::to_string(v) +
           ") out of range for " + std::to_string(num_nodes) + " nodes");
    if (u == v) fail("build_csr: self-loop at node " + std::to_string(u));
    dir.emplace_back(u, v);
    dir.emplace_back(v, u);
  }
  std::sort(dir.begin(), dir.end());
  dir.erase(std::unique(dir.begin(), dir.end()), dir.end());

  CsrMatrix m;
  m.num_rows = num_nodes;
  m.num_cols = num_nodes;
  m.row_ptr.assign(static_cast<std::size_t>(num_nodes) + 1, 0);
  m.col_idx.reserve(dir.size());
  for (const auto& [u, v] : dir) {
    ++m.row_ptr[static_cast<std::size_t>(u) + 1];
    m.col_idx.push_back(v);
  }
  for (std::int64_t i = 0; i < num_nodes; ++i) m.row_ptr[i + 1] += m.row_ptr[i];
  return m;
}

NormalizedAdjacency normalize_adjacency(const CsrMatrix& adjacency,
                                        bool add_self_loops) {
  const std::int64_t n = adjacency.num_rows;
  if (adjacency.num_cols != n) fail("normalize_adjacency: matrix not square");
  if (!adjacency.values.empty()) fail("normalize_adjacency: adjacency must be binary");

  std::vector<double> degree(static_cast<std::size_t>(n), 0.0);
  for (std::int64_t i = 0; i < n; ++i) {
    degree[i] = static_cast<double>(adjacency.degree(i)) + (add_self_loops ? 1.0 : 0.0);
    if (degree[i] == 0.0)
      fail("normalize_adjacency: node " + std::to_string(i) +
           " has zero degree and self-loops are disabled");
  }

  CsrMatrix out;
  out.num_rows = n;
  out.num_cols = n;
  out.row_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
  const std::int64_t nnz = adjacency.nnz() + (add_self_loops ? n : 0);
  out.col_idx.reserve(nnz);
  out.values.reserve(nnz);

  // The value of entry (i,j) is computed once per unordered pair; IEEE
  // multiplication commutes, so mirrored entries are bitwise equal.
  for (std::int64_t i = 0; i < n; ++i) {
    const auto cols = adjacency.row_cols(i);
    std::size_t k = 0;
    bool self_emitted = !add_self_loops;
    const auto emit_self = [&] {
      out.col_idx.push_back(static_cast<std::int32_t>(i));
      out.values.push_back(1.0 / degree[i]);
      self_emitted = true;
    };
    for (; k < cols.size(); ++k) {
      if (!self_emitted && cols[k] > i) emit_self();
      out.col_idx.push_back(cols[k]);
      out.values.push_back(1.0 / std::sqrt(degree[i] * degree[cols[k]]));
    }
    if (!self_emitted) emit_self();
    out.row_ptr[i + 1] = static_cast<std::int64_t>(out.col_idx.size());
  }
  return NormalizedAdjacency{std::move(out), add_self_loops};
}

GraphDataset load_dataset(const fs::path& directory) {
  const fs::path meta_path = directory / "meta.json";
  std::ifstream meta_in(meta_path);
  if (!meta_in) fail("missing file: " + meta_path.string());
  json meta;
  try {
    meta = json::parse(meta_in);
  } catch (const json::exception& e) {
    fail("malformed " + meta_path.string() + ": " + e.what());
  }
  for (const char* key : {"num_nodes", "feature_dim", "class_count", "label_kind"})
    if (!meta.contains(key)) fail(meta_path.string() + ": missing field '" + key + "'");

  GraphDataset ds;
  ds.num_nodes = meta.at("num_nodes").get<std::int64_t>();
  const std::int64_t feature_dim = meta.at("feature_dim").get<std::int64_t>();
  ds.class_count = meta.at("class_count").get<std::int32_t>();
  const std::string kind = meta.at("label_kind").get<std::string>();
  if (kind == "single")
    ds.label_kind = LabelKind::single;
  else if (kind == "multi")
    ds.label_kind = LabelKind::multi;
  else
    fail(meta_path.string() + ": label_kind must be 'single' or 'multi'");

  // edges.tsv: canonical src < dst pairs.
  {
    const fs::path path = directory / "edges.tsv";
    const auto lines = read_lines(path);
    std::vector<std::pair<std::int32_t, std::int32_t>> edges;
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (lines[i].empty()) continue;
      const auto fields = split(lines[i], '\t');
      if (fields.size() != 2)
        fail("expected two tab-separated ids at " + loc(path, i + 1));
      const std::int64_t u = parse_int(fields[0], path, i + 1);
      const std::int64_t v = parse_int(fields[1], path, i + 1);
      if (u >= v) fail("edge must satisfy src < dst at " + loc(path, i + 1));
      if (v >= ds.num_nodes) fail("edge endpoint out of range at " + loc(path, i + 1));
      edges.emplace_back(static_cast<std::int32_t>(u), static_cast<std::int32_t>(v));
    }
    ds.adjacency = build_csr(edges, ds.num_nodes);
    ds.num_edges = ds.adjacency.nnz() / 2;
  }

  // features.csv
  {
    const fs::path path = directory / "features.csv";
    const auto lines = read_lines(path);
    std::vector<double> data;
    std::int64_t rows = 0;
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (lines[i].empty()) continue;
      const auto fields = split(lines[i], ',');
      if (static_cast<std::int64_t>(fields.size()) != feature_dim)
        fail("expected " + std::to_string(feature_dim) + " features, got " +
             std::to_string(fields.size()) + " at " + loc(path, i + 1));
      for (const auto f : fields) data.push_back(parse_double(f, path, i + 1));
      ++rows;
    }
    if (rows != ds.num_nodes)
      fail("features.csv has " + std::to_string(rows) + " rows but meta.json declares " +
           std::to_string(ds.num_nodes) + " nodes");
    ds.features = Matrix<double>::from(static_cast<std::size_t>(rows),
                                       static_cast<std::size_t>(feature_dim),
                                       std::move(data));
  }

  // labels.txt
  {
    const fs::path path = directory / "labels.txt";
    const auto lines = read_lines(path);
    std::int64_t rows = 0;
    std::vector<double> multi;
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (lines[i].empty()) continue;
      if (ds.label_kind == LabelKind::single) {
        const std::int64_t y = parse_int(lines[i], path, i + 1);
        if (y < 0 || y >= ds.class_count) fail("label out of range at " + loc(path, i + 1));
        ds.labels.push_back(static_cast<std::int32_t>(y));
      } else {
        const auto fields = split(lines[i], ',');
        if (static_cast<std::int32_t>(fields.size()) != ds.class_count)
          fail("expected " + std::to_string(ds.class_count) + " label flags at " + loc(path, i + 1));
        for (const auto f : fields) {
          const std::int64_t b = parse_int(f, path, i + 1);
          if (b != 0 && b != 1) fail("label flag must be 0/1 at " + loc(path, i + 1));
          multi.push_back(static_cast<double>(b));
        }
      }
      ++rows;
    }
    if (rows != ds.num_nodes)
      fail("labels.txt has " + std::to_string(rows) + " rows but features.csv has " +
           std::to_string(ds.num_nodes));
    if (ds.label_kind == LabelKind::multi)
      ds.label_matrix = Matrix<double>::from(static_cast<std::size_t>(rows),
                                             static_cast<std::size_t>(ds.class_count),
                                             std::move(multi));
  }

  ds.train_mask = read_mask(directory / "mask.train", ds.num_nodes);
  ds.val_mask = read_mask(directory / "mask.val", ds.num_nodes);
  ds.test_mask = read_mask(directory / "mask.test", ds.num_nodes);

  ds.validate();
  return ds;
}

void write_dataset(const GraphDataset& dataset, const fs::path& directory) {
  dataset.validate();
  fs::create_directories(directory);

  {
    json meta;
    meta["num_nodes"] = dataset.num_nodes;
    meta["feature_dim"] = dataset.feature_dim();
    meta["class_count"] = dataset.class_count;
    meta["label_kind"] = dataset.label_kind == LabelKind::single ? "single" : "multi";
    std::ofstream out(directory / "meta.json");
    out << meta.dump(2) << "\n";
  }
  {
    std::ofstream out(directory / "edges.tsv");
    for (std::int64_t i = 0; i < dataset.num_nodes; ++i)
      for (const std::int32_t j : dataset.adjacency.row_cols(i))
        if (i < j) out << i << '\t' << j << '\n';
  }
  {
    std::ofstream out(directory / "features.csv");
    for (std::size_t i = 0; i < dataset.features.rows(); ++i) {
      const auto row = dataset.features.row_span(i);
      for (std::size_t j = 0; j < row.size(); ++j) {
        if (j) out << ',';
        out << format_double(row[j]);
      }
      out << '\n';
    }
  }
  {
    std::ofstream out(directory / "labels.txt");
    if (dataset.label_kind == LabelKind::single) {
      for (const std::int32_t y : dataset.labels) out << y << '\n';
    } else {
      for (std::size_t i = 0; i < dataset.label_matrix.rows(); ++i) {
        const auto row = dataset.label_matrix.row_span(i);
        for (std::size_t j = 0; j < row.size(); ++j) {
          if (j) out << ',';
          out << static_cast<int>(row[j]);
        }
        out << '\n';
      }
    }
  }
  const auto write_mask = [&](const std::vector<std::int32_t>& mask, const char* name) {
    std::ofstream out(directory / name);
    for (const std::int32_t id : mask) out << id << '\n';
  };
  write_mask(dataset.train_mask, "mask.train");
  write_mask(dataset.val_mask, "mask.val");
  write_mask(dataset.test_mask, "mask.test");
}

GraphDataset generate_sbm(const SbmParams& params) {
  if (params.block_sizes.empty()) fail("sbm: block_sizes must be nonempty");
  for (const std::int64_t b : params.block_sizes)
    if (b <= 0) fail("sbm: block sizes must be positive");
  if (params.intra_prob < 0.0 || params.intra_prob > 1.0 ||
      params.inter_prob < 0.0 || params.inter_prob > 1.0)
    fail("sbm: probabilities must lie in [0,1]");
  const std::int64_t num_blocks = static_cast<std::int64_t>(params.block_sizes.size());
  if (params.feature_dim < num_blocks)
    fail("sbm: feature_dim " + std::to_string(params.feature_dim) +
         " is smaller than the block count " + std::to_string(num_blocks));

  std::int64_t n = 0;
  std::vector<std::int32_t> block_of;
  for (std::int64_t b = 0; b < num_blocks; ++b) {
    n += params.block_sizes[b];
    block_of.insert(block_of.end(), params.block_sizes[b], static_cast<std::int32_t>(b));
  }

  GraphDataset ds;
  ds.num_nodes = n;
  ds.class_count = static_cast<std::int32_t>(num_blocks);
  ds.label_kind = LabelKind::single;
  ds.labels = block_of;

  {
    std::mt19937_64 rng(seed_stream(params.seed, "sbm-edges"));
    std::vector<std::pair<std::int32_t, std::int32_t>> edges;
    for (std::int64_t i = 0; i < n; ++i) {
      for (std::int64_t j = i + 1; j < n; ++j) {
        const double p = block_of[i] == block_of[j] ? params.intra_prob : params.inter_prob;
        if (p > 0.0 && uniform01(rng) < p)
          edges.emplace_back(static_cast<std::int32_t>(i), static_cast<std::int32_t>(j));
      }
    }
    ds.adjacency = build_csr(edges, n);
    ds.num_edges = ds.adjacency.nnz() / 2;
  }

  {
    std::mt19937_64 rng(seed_stream(params.seed, "sbm-features"));
    ds.features = Matrix<double>(static_cast<std::size_t>(n),
                                 static_cast<std::size_t>(params.feature_dim));
    for (std::int64_t i = 0; i < n; ++i) {
      double* row = ds.features.row(i);
      row[block_of[i]] = 1.0;
      if (params.feature_noise > 0.0)
        for (std::int64_t j = 0; j < params.feature_dim; ++j)
          row[j] += params.feature_noise * normal01(rng);
    }
  }

  {
    std::mt19937_64 rng(seed_stream(params.seed, "sbm-masks"));
    std::int64_t offset = 0;
    for (std::int64_t b = 0; b < num_blocks; ++b) {
      std::vector<std::int32_t> members(params.block_sizes[b]);
      for (std::int64_t i = 0; i < params.block_sizes[b]; ++i)
        members[i] = static_cast<std::int32_t>(offset + i);
      shuffle_inplace(rng, members);
      const std::size_t n_train = (members.size() * 6) / 10;
      const std::size_t n_val = (members.size() * 2) / 10;
      for (std::size_t i = 0; i < members.size(); ++i) {
        if (i < n_train)
          ds.train_mask.push_back(members[i]);
        else if (i < n_train + n_val)
          ds.val_mask.push_back(members[i]);
        else
          ds.test_mask.push_back(members[i]);
      }
      offset += params.block_sizes[b];
    }
    std::sort(ds.train_mask.begin(), ds.train_mask.end());
    std::sort(ds.val_mask.begin(), ds.val_mask.end());
    std::sort(ds.test_mask.begin(), ds.test_mask.end());
  }

  ds.validate();
  return ds;
}

std::vector<std::int32_t> k_hop_ball(const CsrMatrix& adjacency,
                                     std::span<const std::int32_t> seeds,
                                     std::size_t hops) {
  std::vector<char> seen(static_cast<std::size_t>(adjacency.num_rows), 0);
  std::vector<std::int32_t> frontier(seeds.begin(), seeds.end());
  for (const std::int32_t s : frontier) seen[static_cast<std::size_t>(s)] = 1;
  for (std::size_t h = 0; h < hops; ++h) {
    std::vector<std::int32_t> next;
    for (const std::int32_t u : frontier) {
      for (const std::int32_t v : adjacency.row_cols(u)) {
        if (!seen[static_cast<std::size_t>(v)]) {
          seen[static_cast<std::size_t>(v)] = 1;
          next.push_back(v);
        }
      }
    }
    frontier = std::move(next);
    if (frontier.empty()) break;
  }
  std::vector<std::int32_t> out;
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (seen[i]) out.push_back(static_cast<std::int32_t>(i));
  return out;
}

}  // namespace lgcn
