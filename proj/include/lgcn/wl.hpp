#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "lgcn/graph.hpp"

namespace lgcn {

// Multiset of canonical node colors after a number of 1-WL refinement
// rounds. Color ids are ranks of the structural signatures within the graph,
// so histograms of isomorphic graphs are identical.
struct ColorHistogram {
  std::vector<std::pair<std::int64_t, std::int64_t>> counts;  // (color, count), sorted
  std::size_t iteration = 0;

  std::int64_t total() const {
    std::int64_t t = 0;
    for (const auto& [c, n] : counts) t += n;
    return t;
  }
  friend bool operator==(const ColorHistogram&, const ColorHistogram&) = default;
};

// Classic 1-WL color refinement. Round 0 colors are node degrees unless
// initial_colors supplies them; each round rehashes (own color, sorted
// multiset of neighbor colors) through an exact first-appearance dictionary.
ColorHistogram wl_refine(const CsrMatrix& graph, std::size_t rounds,
                         std::span<const std::int64_t> initial_colors = {});

// All histograms from round 0 through `rounds`.
std::vector<ColorHistogram> wl_refinement_rounds(
    const CsrMatrix& graph, std::size_t rounds,
    std::span<const std::int64_t> initial_colors = {});

// True iff the color multisets of the two graphs differ at any round
// <= rounds, refined jointly over the disjoint union so colors are
// comparable across the pair. Sound: isomorphic graphs are never
// distinguished.
bool wl_distinguish(const CsrMatrix& g1, const CsrMatrix& g2, std::size_t rounds);

// Induced depth-limited BFS ball around a node, with the root marked.
struct RootedSubtree {
  CsrMatrix graph;
  std::vector<std::int32_t> original_ids;  // local -> original, ascending
  std::int32_t root_local = 0;
};

RootedSubtree rooted_subtree(const CsrMatrix& graph, std::int32_t node,
                             std::size_t depth);

// Exhaustive isomorphism check for graphs with at most max_nodes nodes
// (default 8); used by the pair sampler's non-isomorphism certification.
bool is_isomorphic_exhaustive(const CsrMatrix& g1, const CsrMatrix& g2);

}  // namespace lgcn
