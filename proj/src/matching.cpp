#include "ringtrace/matching.hpp"

#include <cassert>
#include <functional>
#include <limits>

namespace ringtrace {

Matching maximum_matching(const BipartiteGraph& g) {
    const std::uint32_t nl = g.left_count();
    const std::uint32_t nr = g.right_count;
    constexpr std::uint32_t kInf = std::numeric_limits<std::uint32_t>::max();

    Matching m;
    m.left_to_right.assign(nl, -1);
    m.right_to_left.assign(nr, -1);

    // Greedy seed pass.
    for (std::uint32_t l = 0; l < nl; ++l)
        for (std::uint32_t r : g.adj[l])
            if (m.right_to_left[r] < 0) {
                m.left_to_right[l] = r;
                m.right_to_left[r] = l;
                ++m.size;
                break;
            }

    std::vector<std::uint32_t> dist(nl);
    std::vector<std::uint32_t> queue_buf(nl);

    auto bfs = [&]() {
        std::size_t head = 0, tail = 0;
        std::uint32_t free_dist = kInf;
        for (std::uint32_t l = 0; l < nl; ++l) {
            if (m.left_to_right[l] < 0) {
                dist[l] = 0;
                queue_buf[tail++] = l;
            } else {
                dist[l] = kInf;
            }
        }
        while (head < tail) {
            std::uint32_t l = queue_buf[head++];
            if (dist[l] >= free_dist)
                continue;
            for (std::uint32_t r : g.adj[l]) {
                std::int64_t nxt = m.right_to_left[r];
                if (nxt < 0) {
                    free_dist = dist[l] + 1;
                } else if (dist[static_cast<std::uint32_t>(nxt)] == kInf) {
                    dist[static_cast<std::uint32_t>(nxt)] = dist[l] + 1;
                    queue_buf[tail++] = static_cast<std::uint32_t>(nxt);
                }
            }
        }
        return free_dist != kInf;
    };

    std::function<bool(std::uint32_t)> dfs = [&](std::uint32_t l) {
        for (std::uint32_t r : g.adj[l]) {
            std::int64_t nxt = m.right_to_left[r];
            if (nxt < 0 || (dist[static_cast<std::uint32_t>(nxt)] == dist[l] + 1 &&
                            dfs(static_cast<std::uint32_t>(nxt)))) {
                m.left_to_right[l] = r;
                m.right_to_left[r] = l;
                return true;
            }
        }
        dist[l] = kInf;
        return false;
    };

    while (bfs())
        for (std::uint32_t l = 0; l < nl; ++l)
            if (m.left_to_right[l] < 0 && dfs(l))
                ++m.size;
    return m;
}

namespace {

/// Iterative Tarjan SCC over the alternation digraph: matched edges point
/// left->right, unmatched edges point right->left. Nodes 0..nl-1 are left,
/// nl..nl+nr-1 are right.
class AlternationScc {
public:
    AlternationScc(const BipartiteGraph& g, const Matching& m,
                   const std::vector<std::vector<std::uint32_t>>& radj)
        : g_(g), m_(m), radj_(radj), nl_(g.left_count()), n_(nl_ + g.right_count) {}

    std::vector<std::uint32_t> run() {
        index_.assign(n_, kUnset);
        low_.assign(n_, 0);
        on_stack_.assign(n_, false);
        comp_.assign(n_, kUnset);
        for (std::uint32_t v = 0; v < n_; ++v)
            if (index_[v] == kUnset)
                strongconnect(v);
        return std::move(comp_);
    }

private:
    static constexpr std::uint32_t kUnset = 0xffffffffu;

    std::uint32_t out_degree(std::uint32_t v) const {
        if (v < nl_)
            return m_.left_to_right[v] >= 0 ? 1u : 0u;
        return static_cast<std::uint32_t>(radj_[v - nl_].size());
    }

    std::uint32_t out_edge(std::uint32_t v, std::uint32_t i) const {
        if (v < nl_)
            return nl_ + static_cast<std::uint32_t>(m_.left_to_right[v]);
        std::uint32_t r = v - nl_;
        return radj_[r][i]; // unmatched edges towards left vertices
    }

    void strongconnect(std::uint32_t root) {
        struct Frame {
            std::uint32_t v;
            std::uint32_t next_edge;
        };
        std::vector<Frame> frames{{root, 0}};
        while (!frames.empty()) {
            Frame& f = frames.back();
            if (f.next_edge == 0) {
                index_[f.v] = low_[f.v] = counter_++;
                stack_.push_back(f.v);
                on_stack_[f.v] = true;
            }
            bool descended = false;
            while (f.next_edge < out_degree(f.v)) {
                std::uint32_t w = out_edge(f.v, f.next_edge++);
                if (index_[w] == kUnset) {
                    frames.push_back({w, 0});
                    descended = true;
                    break;
                }
                if (on_stack_[w])
                    low_[f.v] = std::min(low_[f.v], index_[w]);
            }
            if (descended)
                continue;
            if (low_[f.v] == index_[f.v]) {
                for (;;) {
                    std::uint32_t w = stack_.back();
                    stack_.pop_back();
                    on_stack_[w] = false;
                    comp_[w] = comp_count_;
                    if (w == f.v)
                        break;
                }
                ++comp_count_;
            }
            std::uint32_t v = f.v;
            frames.pop_back();
            if (!frames.empty())
                low_[frames.back().v] = std::min(low_[frames.back().v], low_[v]);
        }
    }

    const BipartiteGraph& g_;
    const Matching& m_;
    const std::vector<std::vector<std::uint32_t>>& radj_;
    std::uint32_t nl_;
    std::uint32_t n_;
    std::uint32_t counter_ = 0;
    std::uint32_t comp_count_ = 0;
    std::vector<std::uint32_t> index_, low_, comp_;
    std::vector<bool> on_stack_;
    std::vector<std::uint32_t> stack_;
};

} // namespace

EdgeClassification classify_edges(const BipartiteGraph& g, const Matching& m) {
    assert(m.saturates_left());
    const std::uint32_t nl = g.left_count();
    const std::uint32_t nr = g.right_count;

    // Right->left adjacency restricted to unmatched edges.
    std::vector<std::vector<std::uint32_t>> radj(nr);
    for (std::uint32_t l = 0; l < nl; ++l)
        for (std::uint32_t r : g.adj[l])
            if (m.left_to_right[l] != static_cast<std::int64_t>(r))
                radj[r].push_back(l);

    // Right vertices reachable from an unmatched right vertex along
    // alternating (unmatched, matched, unmatched, ...) edges.
    std::vector<bool> right_reached(nr, false);
    std::vector<bool> left_reached(nl, false);
    std::vector<std::uint32_t> queue_buf;
    for (std::uint32_t r = 0; r < nr; ++r)
        if (m.right_to_left[r] < 0) {
            right_reached[r] = true;
            queue_buf.push_back(r);
        }
    while (!queue_buf.empty()) {
        std::uint32_t r = queue_buf.back();
        queue_buf.pop_back();
        for (std::uint32_t l : radj[r]) {
            if (left_reached[l])
                continue;
            left_reached[l] = true;
            std::uint32_t mr = static_cast<std::uint32_t>(m.left_to_right[l]);
            if (!right_reached[mr]) {
                right_reached[mr] = true;
                queue_buf.push_back(mr);
            }
        }
    }

    std::vector<std::uint32_t> comp = AlternationScc(g, m, radj).run();

    EdgeClassification out;
    out.admissible.resize(nl);
    out.right_always_matched.assign(nr, false);
    for (std::uint32_t r = 0; r < nr; ++r)
        out.right_always_matched[r] = m.right_to_left[r] >= 0 && !right_reached[r];
    for (std::uint32_t l = 0; l < nl; ++l) {
        out.admissible[l].resize(g.adj[l].size());
        for (std::size_t i = 0; i < g.adj[l].size(); ++i) {
            std::uint32_t r = g.adj[l][i];
            out.admissible[l][i] = m.left_to_right[l] == static_cast<std::int64_t>(r) ||
                                   right_reached[r] || comp[l] == comp[nl + r];
        }
    }
    return out;
}

} // namespace ringtrace
