#include <doctest.h>

#include <algorithm>
#include <random>

#include "ringtrace/matching.hpp"

using namespace ringtrace;

namespace {

// Exhaustive reference: enumerate every left-saturating matching.
struct BruteForce {
    const BipartiteGraph& g;
    std::vector<std::vector<bool>> edge_in_some;
    std::vector<bool> right_in_all;
    std::uint64_t count = 0;

    explicit BruteForce(const BipartiteGraph& graph) : g(graph) {
        edge_in_some.resize(g.left_count());
        for (std::uint32_t l = 0; l < g.left_count(); ++l)
            edge_in_some[l].assign(g.adj[l].size(), false);
        right_in_all.assign(g.right_count, true);
        std::vector<bool> used(g.right_count, false);
        std::vector<std::uint32_t> choice(g.left_count(), 0);
        recurse(0, used, choice);
        if (count == 0)
            right_in_all.assign(g.right_count, false);
    }

    void recurse(std::uint32_t l, std::vector<bool>& used, std::vector<std::uint32_t>& choice) {
        if (l == g.left_count()) {
            ++count;
            for (std::uint32_t i = 0; i < g.left_count(); ++i)
                edge_in_some[i][choice[i]] = true;
            for (std::uint32_t r = 0; r < g.right_count; ++r)
                if (!used[r])
                    right_in_all[r] = false;
            return;
        }
        for (std::uint32_t i = 0; i < g.adj[l].size(); ++i) {
            std::uint32_t r = g.adj[l][i];
            if (used[r])
                continue;
            used[r] = true;
            choice[l] = i;
            recurse(l + 1, used, choice);
            used[r] = false;
        }
    }
};

BipartiteGraph random_graph(std::mt19937_64& rng, std::uint32_t nl, std::uint32_t nr,
                            double density) {
    BipartiteGraph g;
    g.adj.resize(nl);
    g.right_count = nr;
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (std::uint32_t l = 0; l < nl; ++l) {
        for (std::uint32_t r = 0; r < nr; ++r)
            if (coin(rng) < density)
                g.adj[l].push_back(r);
        if (g.adj[l].empty())
            g.adj[l].push_back(static_cast<std::uint32_t>(rng() % nr));
    }
    return g;
}

} // namespace

TEST_CASE("maximum matching saturates a square identity-ish graph") {
    BipartiteGraph g;
    g.adj = {{0, 1}, {1, 2}, {2, 0}};
    g.right_count = 3;
    Matching m = maximum_matching(g);
    CHECK(m.size == 3);
    CHECK(m.saturates_left());
}

TEST_CASE("maximum matching reports deficiency") {
    BipartiteGraph g;
    g.adj = {{0, 1}, {0, 1}, {0, 1}};
    g.right_count = 2;
    Matching m = maximum_matching(g);
    CHECK(m.size == 2);
    CHECK_FALSE(m.saturates_left());
}

TEST_CASE("edges to a free right vertex stay admissible") {
    // l0 can only take r0; l1 may take r1 or the free r2.
    BipartiteGraph g;
    g.adj = {{0}, {1, 2}};
    g.right_count = 3;
    Matching m = maximum_matching(g);
    REQUIRE(m.saturates_left());
    EdgeClassification cls = classify_edges(g, m);
    CHECK(cls.admissible[1][0]);
    CHECK(cls.admissible[1][1]);
    CHECK(cls.right_always_matched[0]);
    CHECK_FALSE(cls.right_always_matched[1]);
    CHECK_FALSE(cls.right_always_matched[2]);
}

TEST_CASE("tight set excludes outside edges") {
    // Two rings over {0,1} force both outputs; the third ring loses them.
    BipartiteGraph g;
    g.adj = {{0, 1}, {0, 1}, {0, 1, 2}};
    g.right_count = 3;
    Matching m = maximum_matching(g);
    REQUIRE(m.saturates_left());
    EdgeClassification cls = classify_edges(g, m);
    CHECK_FALSE(cls.admissible[2][0]);
    CHECK_FALSE(cls.admissible[2][1]);
    CHECK(cls.admissible[2][2]);
    CHECK(cls.right_always_matched[0]);
    CHECK(cls.right_always_matched[1]);
    CHECK(cls.right_always_matched[2]); // forced through the third ring
}

TEST_CASE("edge classification matches exhaustive enumeration on random graphs") {
    std::mt19937_64 rng(20180831);
    int runs = 0;
    for (int it = 0; it < 400; ++it) {
        std::uint32_t nl = 1 + static_cast<std::uint32_t>(rng() % 7);
        std::uint32_t nr = nl + static_cast<std::uint32_t>(rng() % 4);
        BipartiteGraph g = random_graph(rng, nl, nr, 0.25 + 0.5 * (it % 3));
        Matching m = maximum_matching(g);
        BruteForce ref(g);
        if (ref.count == 0) {
            CHECK_FALSE(m.saturates_left());
            continue;
        }
        ++runs;
        REQUIRE(m.saturates_left());
        EdgeClassification cls = classify_edges(g, m);
        for (std::uint32_t l = 0; l < nl; ++l)
            for (std::uint32_t i = 0; i < g.adj[l].size(); ++i) {
                CAPTURE(it);
                CAPTURE(l);
                CAPTURE(i);
                CHECK(cls.admissible[l][i] == ref.edge_in_some[l][i]);
            }
        for (std::uint32_t r = 0; r < nr; ++r) {
            CAPTURE(it);
            CAPTURE(r);
            CHECK(cls.right_always_matched[r] == ref.right_in_all[r]);
        }
    }
    CHECK(runs > 100); // enough satisfiable graphs exercised
}
