#include "lgcn/wl.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "lgcn/common.hpp"

namespace lgcn {
namespace {

// Signature of a node for one refinement round: own color plus the sorted
// multiset of neighbor colors. Exact (no probabilistic hashing), so two
// signatures collide iff they are equal.
using Signature = std::vector<std::int64_t>;

Signature node_signature(const CsrMatrix& g, std::int64_t node,
                         const std::vector<std::int64_t>& colors) {
  Signature sig;
  const auto cols = g.row_cols(node);
  sig.reserve(cols.size() + 1);
  sig.push_back(colors[static_cast<std::size_t>(node)]);
  for (const std::int32_t j : cols) sig.push_back(colors[static_cast<std::size_t>(j)]);
  std::sort(sig.begin() + 1, sig.end());
  return sig;
}

// One refinement round over possibly several graphs sharing one color space.
// New ids are ranks of the lexicographically sorted distinct signatures, so
// they stay permutation-invariant round over round (round-0 colors are
// degrees, which already are).
void refine_round(std::span<const CsrMatrix* const> graphs,
                  std::vector<std::vector<std::int64_t>>& colors) {
  std::map<Signature, std::int64_t> dictionary;  // exact, collision-free
  std::vector<std::vector<Signature>> sigs(graphs.size());
  for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
    const CsrMatrix& g = *graphs[gi];
    sigs[gi].reserve(static_cast<std::size_t>(g.num_rows));
    for (std::int64_t v = 0; v < g.num_rows; ++v) {
      sigs[gi].push_back(node_signature(g, v, colors[gi]));
      dictionary.try_emplace(sigs[gi].back(), 0);
    }
  }
  std::int64_t rank = 0;
  for (auto& [sig, id] : dictionary) id = rank++;

  std::vector<std::vector<std::int64_t>> next(colors.size());
  for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
    next[gi].resize(sigs[gi].size());
    for (std::size_t v = 0; v < sigs[gi].size(); ++v)
      next[gi][v] = dictionary.at(sigs[gi][v]);
  }
  colors = std::move(next);
}

std::vector<std::int64_t> initial_color_vector(
    const CsrMatrix& g, std::span<const std::int64_t> initial_colors) {
  const std::size_t n = static_cast<std::size_t>(g.num_rows);
  std::vector<std::int64_t> colors(n);
  if (initial_colors.empty()) {
    for (std::size_t v = 0; v < n; ++v)
      colors[v] = g.degree(static_cast<std::int64_t>(v));
  } else {
    if (initial_colors.size() != n)
      throw Error("wl: initial color count does not match node count");
    std::copy(initial_colors.begin(), initial_colors.end(), colors.begin());
  }
  return colors;
}

// Canonical histogram: color classes ranked by their structural id, counts
// attached. Structural ids are already permutation-invariant (degrees at
// round 0, dictionary ranks of sorted signatures afterwards would not be —
// so ranks are recomputed from the multiset of current ids).
ColorHistogram to_histogram(const std::vector<std::int64_t>& colors,
                            std::size_t iteration) {
  std::map<std::int64_t, std::int64_t> counts;
  for (const std::int64_t c : colors) ++counts[c];
  ColorHistogram h;
  h.iteration = iteration;
  std::int64_t rank = 0;
  for (const auto& [color, count] : counts) {
    (void)color;
    h.counts.emplace_back(rank++, count);
  }
  return h;
}

std::vector<std::int64_t> sorted_copy(const std::vector<std::int64_t>& v) {
  std::vector<std::int64_t> s = v;
  std::sort(s.begin(), s.end());
  return s;
}

}  // namespace

std::vector<ColorHistogram> wl_refinement_rounds(
    const CsrMatrix& graph, std::size_t rounds,
    std::span<const std::int64_t> initial_colors) {
  std::vector<std::vector<std::int64_t>> colors{
      initial_color_vector(graph, initial_colors)};
  const CsrMatrix* gptr[1] = {&graph};

  std::vector<ColorHistogram> out;
  out.push_back(to_histogram(colors[0], 0));
  for (std::size_t r = 1; r <= rounds; ++r) {
    refine_round(gptr, colors);
    out.push_back(to_histogram(colors[0], r));
  }
  return out;
}

ColorHistogram wl_refine(const CsrMatrix& graph, std::size_t rounds,
                         std::span<const std::int64_t> initial_colors) {
  return wl_refinement_rounds(graph, rounds, initial_colors).back();
}

bool wl_distinguish(const CsrMatrix& g1, const CsrMatrix& g2, std::size_t rounds) {
  if (g1.num_rows != g2.num_rows) return true;
  // Joint refinement keeps the two color spaces comparable.
  std::vector<std::vector<std::int64_t>> colors{initial_color_vector(g1, {}),
                                                initial_color_vector(g2, {})};
  const CsrMatrix* graphs[2] = {&g1, &g2};
  if (sorted_copy(colors[0]) != sorted_copy(colors[1])) return true;
  for (std::size_t r = 1; r <= rounds; ++r) {
    refine_round(graphs, colors);
    if (sorted_copy(colors[0]) != sorted_copy(colors[1])) return true;
  }
  return false;
}

RootedSubtree rooted_subtree(const CsrMatrix& graph, std::int32_t node,
                             std::size_t depth) {
  if (node < 0 || node >= graph.num_rows)
    throw Error("rooted_subtree: node out of range");
  const std::int32_t seeds[1] = {node};
  const std::vector<std::int32_t> ball = k_hop_ball(graph, seeds, depth);

  std::vector<std::int32_t> local(static_cast<std::size_t>(graph.num_rows), -1);
  for (std::size_t i = 0; i < ball.size(); ++i)
    local[static_cast<std::size_t>(ball[i])] = static_cast<std::int32_t>(i);

  std::vector<std::pair<std::int32_t, std::int32_t>> edges;
  for (const std::int32_t u : ball) {
    for (const std::int32_t v : graph.row_cols(u)) {
      const std::int32_t lu = local[static_cast<std::size_t>(u)];
      const std::int32_t lv = local[static_cast<std::size_t>(v)];
      if (lv >= 0 && lu < lv) edges.emplace_back(lu, lv);
    }
  }
  RootedSubtree out;
  out.graph = build_csr(edges, static_cast<std::int64_t>(ball.size()));
  out.original_ids = ball;
  out.root_local = local[static_cast<std::size_t>(node)];
  return out;
}

bool is_isomorphic_exhaustive(const CsrMatrix& g1, const CsrMatrix& g2) {
  const std::int64_t n = g1.num_rows;
  if (n != g2.num_rows || g1.nnz() != g2.nnz()) return false;
  if (n > 8) throw Error("is_isomorphic_exhaustive: more than 8 nodes");

  // Quick reject on degree multisets.
  std::vector<std::int64_t> d1, d2;
  for (std::int64_t v = 0; v < n; ++v) {
    d1.push_back(g1.degree(v));
    d2.push_back(g2.degree(v));
  }
  std::sort(d1.begin(), d1.end());
  std::sort(d2.begin(), d2.end());
  if (d1 != d2) return false;

  std::vector<std::int32_t> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  do {
    bool ok = true;
    for (std::int64_t u = 0; u < n && ok; ++u) {
      for (std::int64_t v = u + 1; v < n && ok; ++v) {
        if (g1.has_entry(u, v) != g2.has_entry(perm[u], perm[v])) ok = false;
      }
    }
    if (ok) return true;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return false;
}

}  // namespace lgcn
