#pragma once

#include <cstdint>
#include <cstdio>
#include <random>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ringtrace/ingest.hpp"

namespace ringtrace::testing {

// Two-branch demo ledger: five key images, a fork at height 2, and every
// deduction rule exercised. Output uids after ingestion:
//   a=0 b=1 c=2 d=3 e=4 f=5 x=6 i=7 (block 0), h=8 (block 1),
//   main-only 9,10; fork-only g=11, 12.
// Rings: ki 00={b,c} 01={b,c} 02={a,b,c} pre-fork;
//        ki 03 main={a,d,e,f} fork={a,e,f,g}; ki 04 main={x,h} fork={x,i}.
inline std::vector<BranchBuffer> fork_fixture_buffers() {
    auto ts = [](int h) { return std::to_string(1522540800LL + 86400LL * h); };
    std::string main_file;
    main_file +=
        R"({"height":0,"timestamp":)" + ts(0) +
        R"(,"txs":[{"hash":"c0c0","coinbase":true,"inputs":[],"outputs":[{"amount":0},{"amount":0},{"amount":0},{"amount":0},{"amount":0},{"amount":0},{"amount":0},{"amount":0}]}]})" "\n";
    main_file +=
        R"({"height":1,"timestamp":)" + ts(1) +
        R"(,"txs":[{"hash":"c1c1","coinbase":true,"inputs":[],"outputs":[{"amount":0}]},)"
        R"({"hash":"a0a0","coinbase":false,"inputs":[{"key_image":"00","members":[{"amount":0,"index":1},{"amount":0,"index":2}]}],"outputs":[]},)"
        R"({"hash":"a1a1","coinbase":false,"inputs":[{"key_image":"01","members":[{"amount":0,"index":1},{"amount":0,"index":2}]}],"outputs":[]},)"
        R"({"hash":"a2a2","coinbase":false,"inputs":[{"key_image":"02","members":[{"amount":0,"index":0},{"amount":0,"index":1},{"amount":0,"index":2}]}],"outputs":[]}]})" "\n";
    main_file +=
        R"({"height":2,"timestamp":)" + ts(2) +
        R"(,"txs":[{"hash":"c2c2","coinbase":true,"inputs":[],"outputs":[{"amount":0}]},)"
        R"({"hash":"a3a0","coinbase":false,"inputs":[{"key_image":"03","members":[{"amount":0,"index":0},{"amount":0,"index":3},{"amount":0,"index":4},{"amount":0,"index":5}]}],"outputs":[]}]})" "\n";
    main_file +=
        R"({"height":3,"timestamp":)" + ts(3) +
        R"(,"txs":[{"hash":"c3c3","coinbase":true,"inputs":[],"outputs":[{"amount":0}]},)"
        R"({"hash":"a4a0","coinbase":false,"inputs":[{"key_image":"04","members":[{"amount":0,"index":6},{"amount":0,"index":8}]}],"outputs":[]}]})" "\n";

    std::string fork_file;
    fork_file +=
        R"({"height":2,"timestamp":)" + ts(2) +
        R"(,"txs":[{"hash":"c2f2","coinbase":true,"inputs":[],"outputs":[{"amount":0}]}]})" "\n";
    fork_file +=
        R"({"height":3,"timestamp":)" + ts(3) +
        R"(,"txs":[{"hash":"c3f3","coinbase":true,"inputs":[],"outputs":[{"amount":0}]},)"
        R"({"hash":"a3f0","coinbase":false,"inputs":[{"key_image":"03","members":[{"amount":0,"index":0},{"amount":0,"index":4},{"amount":0,"index":5},{"amount":0,"index":9}]}],"outputs":[]},)"
        R"({"hash":"a4f0","coinbase":false,"inputs":[{"key_image":"04","members":[{"amount":0,"index":6},{"amount":0,"index":7}]}],"outputs":[]}]})" "\n";

    return {BranchBuffer{"main", std::nullopt, std::nullopt, main_file},
            BranchBuffer{"fork", "main", 2u, fork_file}};
}

struct ForkFixtureUids {
    static constexpr OutputUid a = 0, b = 1, c = 2, d = 3, e = 4, f = 5, x = 6, i = 7,
                               h = 8, g = 11;
};

inline LedgerView fork_fixture() {
    BuildResult r = build_ledger_from_buffers(fork_fixture_buffers());
    if (!r.view)
        throw Error("fork fixture failed to build");
    return std::move(*r.view);
}

// ---- randomized small instances with known ground truth ----

struct RandomInstanceOptions {
    std::uint32_t branches = 2;        // 1 or 2
    std::uint32_t max_key_images = 10; // across both branches
    std::uint32_t max_ringsize = 6;
    std::uint32_t initial_outputs = 10;
};

struct RandomInstance {
    std::vector<BranchBuffer> buffers;
    std::unordered_map<std::string, OutputRef> truth; // key image hex -> real
    std::uint32_t cross_chain = 0; // key images spent post-fork on both branches
};

namespace rnd_detail {

inline std::string hex8(std::uint32_t v) {
    char buf[9];
    std::snprintf(buf, sizeof buf, "%08x", v);
    return buf;
}

} // namespace rnd_detail

/// Small one- or two-branch ledger with randomized rings. Every ring embeds
/// its ground-truth real plus random decoys, so the instance always admits at
/// least one consistent assignment. Cross-chain key images arise when an
/// output is spent post-fork on both branches.
inline RandomInstance random_instance(std::uint64_t seed,
                                      const RandomInstanceOptions& opt = {}) {
    std::mt19937_64 rng(seed);
    auto pick = [&](std::uint32_t n) { return static_cast<std::uint32_t>(rng() % n); };

    const std::uint32_t fork_height = 3;
    const std::uint32_t root_blocks = 6;
    const bool forked = opt.branches >= 2;

    struct GenOutput {
        std::uint32_t index; // per-amount index (single amount class 0)
        std::uint32_t height;
        bool child_origin;
    };
    std::vector<GenOutput> outputs;
    std::uint32_t root_index = 0, child_index = 0;
    auto add_output = [&](std::uint32_t height, bool child) {
        std::uint32_t idx = child ? child_index++ : root_index++;
        outputs.push_back({idx, height, child});
        return static_cast<std::uint32_t>(outputs.size() - 1);
    };

    struct GenRing {
        std::string ki;
        std::uint32_t real;
        std::vector<std::uint32_t> members; // generator output ids, shuffled
        std::uint32_t height;
        bool child_file;
    };
    std::vector<GenRing> rings;
    std::unordered_set<std::uint32_t> spent_root, spent_child;
    RandomInstance out;

    std::uint32_t budget = 2 + pick(opt.max_key_images - 1);

    // Outputs visible from a spend at `height` on the given branch.
    auto eligible = [&](std::uint32_t height, bool child_branch) {
        std::vector<std::uint32_t> ids;
        for (std::uint32_t id = 0; id < outputs.size(); ++id) {
            const auto& o = outputs[id];
            if (o.height >= height)
                continue;
            if (child_branch) {
                if (!o.child_origin && o.height >= fork_height)
                    continue; // root-only output
            } else if (o.child_origin) {
                continue;
            }
            ids.push_back(id);
        }
        return ids;
    };

    auto make_ring = [&](std::uint32_t real, std::uint32_t height, bool child_branch,
                         bool child_file) {
        auto pool = eligible(height, child_branch);
        std::uint32_t size = 1 + pick(opt.max_ringsize);
        GenRing ring;
        ring.ki = rnd_detail::hex8(real);
        ring.real = real;
        ring.height = height;
        ring.child_file = child_file;
        ring.members.push_back(real);
        std::unordered_set<std::uint32_t> used{real};
        std::uint32_t attempts = 0;
        while (ring.members.size() < size && attempts++ < 64 && used.size() < pool.size()) {
            std::uint32_t cand = pool[pick(static_cast<std::uint32_t>(pool.size()))];
            if (used.insert(cand).second)
                ring.members.push_back(cand);
        }
        for (std::size_t j = ring.members.size(); j-- > 1;)
            std::swap(ring.members[j], ring.members[pick(static_cast<std::uint32_t>(j + 1))]);
        rings.push_back(std::move(ring));
    };

    for (std::uint32_t h = 0; h < root_blocks; ++h) {
        if (h == fork_height)
            child_index = root_index; // child index space continues the prefix
        std::uint32_t n_cb = h == 0 ? opt.initial_outputs : 1 + pick(2);
        for (std::uint32_t k = 0; k < n_cb; ++k)
            add_output(h, false);
        if (h == 0)
            continue;
        std::uint32_t spends = pick(3); // 0..2 spends per block
        for (std::uint32_t sp = 0; sp < spends && budget > 0; ++sp) {
            std::vector<std::uint32_t> unspent;
            for (std::uint32_t id = 0; id < outputs.size(); ++id)
                if (!outputs[id].child_origin && outputs[id].height < h &&
                    !spent_root.count(id))
                    unspent.push_back(id);
            if (unspent.empty())
                break;
            std::uint32_t real = unspent[pick(static_cast<std::uint32_t>(unspent.size()))];
            spent_root.insert(real);
            if (h < fork_height)
                spent_child.insert(real); // shared-prefix spend binds both branches
            make_ring(real, h, false, false);
            --budget;
        }
    }

    if (forked) {
        for (std::uint32_t h = fork_height; h < root_blocks; ++h) {
            add_output(h, true);
            std::uint32_t spends = pick(3);
            for (std::uint32_t sp = 0; sp < spends && budget > 0; ++sp) {
                std::vector<std::uint32_t> unspent;
                for (std::uint32_t id = 0; id < outputs.size(); ++id) {
                    const auto& o = outputs[id];
                    if (o.height >= h || spent_child.count(id))
                        continue;
                    if (!o.child_origin && o.height >= fork_height)
                        continue;
                    unspent.push_back(id);
                }
                if (unspent.empty())
                    break;
                std::uint32_t real =
                    unspent[pick(static_cast<std::uint32_t>(unspent.size()))];
                spent_child.insert(real);
                if (spent_root.count(real))
                    ++out.cross_chain; // post-fork respend of a pre-fork output
                make_ring(real, h, true, true);
                --budget;
            }
        }
    }

    std::uint32_t tx_counter = 0;
    auto tx_hash = [&]() { return rnd_detail::hex8(0xa0000000u + tx_counter++); };
    auto ref_json = [&](std::uint32_t id) {
        return "{\"amount\":0,\"index\":" + std::to_string(outputs[id].index) + "}";
    };

    auto emit = [&](bool child_file) {
        std::string text;
        std::uint32_t first = child_file ? fork_height : 0;
        for (std::uint32_t h = first; h < root_blocks; ++h) {
            text += "{\"height\":" + std::to_string(h) +
                    ",\"timestamp\":" + std::to_string(1522540800LL + 7200LL * h) +
                    ",\"txs\":[{\"hash\":\"" + tx_hash() +
                    "\",\"coinbase\":true,\"inputs\":[],\"outputs\":[";
            bool first_out = true;
            for (std::uint32_t id = 0; id < outputs.size(); ++id)
                if (outputs[id].height == h && outputs[id].child_origin == child_file) {
                    if (!first_out)
                        text += ',';
                    first_out = false;
                    text += "{\"amount\":0}";
                }
            text += "]}";
            for (const auto& r : rings) {
                if (r.child_file != child_file || r.height != h)
                    continue;
                text += ",{\"hash\":\"" + tx_hash() +
                        "\",\"coinbase\":false,\"inputs\":[{\"key_image\":\"" + r.ki +
                        "\",\"members\":[";
                bool first_m = true;
                for (std::uint32_t id : r.members) {
                    if (!first_m)
                        text += ',';
                    first_m = false;
                    text += ref_json(id);
                }
                text += "]}],\"outputs\":[]}";
            }
            text += "]}\n";
        }
        return text;
    };

    out.buffers.push_back(BranchBuffer{"main", std::nullopt, std::nullopt, emit(false)});
    if (forked)
        out.buffers.push_back(BranchBuffer{"fork", "main", fork_height, emit(true)});
    for (const auto& r : rings)
        out.truth.emplace(r.ki, OutputRef{0, outputs[r.real].index});
    return out;
}

} // namespace ringtrace::testing
