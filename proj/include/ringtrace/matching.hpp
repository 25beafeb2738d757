#pragma once

#include <cstdint>
#include <vector>

namespace ringtrace {

/// Bipartite graph with left vertices 0..left_count-1 and right vertices
/// 0..right_count-1. adj[l] lists the right neighbors of l.
struct BipartiteGraph {
    std::vector<std::vector<std::uint32_t>> adj;
    std::uint32_t right_count = 0;

    std::uint32_t left_count() const { return static_cast<std::uint32_t>(adj.size()); }
};

struct Matching {
    std::vector<std::int64_t> left_to_right;  // -1 when unmatched
    std::vector<std::int64_t> right_to_left;  // -1 when unmatched
    std::uint32_t size = 0;

    bool saturates_left() const { return size == left_to_right.size(); }
};

/// Deterministic Hopcroft-Karp maximum matching.
Matching maximum_matching(const BipartiteGraph& g);

/// Edge and vertex classification relative to the set of all matchings that
/// saturate every left vertex. Requires a left-saturating matching.
///
/// An edge is admissible iff some left-saturating matching contains it:
/// it is in the given matching, or lies on an alternating cycle, or on an
/// even-length alternating path starting at an unmatched right vertex.
/// A right vertex is "always matched" iff every left-saturating matching
/// covers it (no alternating path reaches it from an unmatched right vertex).
struct EdgeClassification {
    // Aligned with g.adj: admissible[l][i] applies to edge (l, g.adj[l][i]).
    std::vector<std::vector<bool>> admissible;
    std::vector<bool> right_always_matched;
};

EdgeClassification classify_edges(const BipartiteGraph& g, const Matching& m);

} // namespace ringtrace
