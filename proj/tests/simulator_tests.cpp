#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "ringtrace/deduction.hpp"
#include "ringtrace/oracle.hpp"
#include "ringtrace/simulator.hpp"

using namespace ringtrace;

namespace {

SimConfig small_config(std::uint64_t seed) {
    SimConfig cfg;
    cfg.seed = seed;
    cfg.blocks = 40;
    cfg.block_interval = 7200;
    cfg.txs_per_block = {CountDist::Kind::Poisson, 2, 0};
    cfg.inputs_per_tx = {CountDist::Kind::Fixed, 1, 0};
    cfg.outputs_per_tx = {CountDist::Kind::Fixed, 2, 0};
    cfg.ringsize = {RingsizePolicy::Kind::Fixed, 4, 0.5};
    return cfg;
}

BuildResult ingest(const SimArtifacts& art) {
    return build_ledger_from_buffers(art.branch_buffers);
}

std::vector<EligibleOutput> hourly_pool(std::size_t n, std::int64_t now) {
    // Oldest first; ages n..1 hours.
    std::vector<EligibleOutput> pool;
    for (std::size_t i = 0; i < n; ++i)
        pool.push_back({static_cast<OutputUid>(i), now - 3600 * static_cast<std::int64_t>(n - i), 0});
    return pool;
}

} // namespace

TEST_CASE("simulation is deterministic and seed-sensitive") {
    SimArtifacts a = simulate(small_config(7));
    SimArtifacts b = simulate(small_config(7));
    REQUIRE(a.branch_buffers.size() == b.branch_buffers.size());
    for (std::size_t i = 0; i < a.branch_buffers.size(); ++i)
        CHECK(a.branch_buffers[i].content == b.branch_buffers[i].content);
    CHECK(a.ground_truth_lines == b.ground_truth_lines);
    CHECK(a.fork_spec_json == b.fork_spec_json);

    SimArtifacts c = simulate(small_config(8));
    CHECK(a.branch_buffers[0].content != c.branch_buffers[0].content);
}

TEST_CASE("generated ledgers pass ingestion cleanly across configurations") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        SimConfig cfg = small_config(seed);
        SUBCASE("single branch confidential") {}
        SUBCASE("forked") {
            cfg.forks.push_back({"forkA", 20, 20, 0.5});
        }
        SUBCASE("denominated with minimum ringsize") {
            cfg.value_model = ValueModel::Denominated;
            cfg.ringsize = {RingsizePolicy::Kind::Minimum, 3, 0.4};
        }
        SUBCASE("gamma decoys") {
            cfg.decoys.kind = DecoyRegime::Kind::Gamma;
        }
        SimArtifacts art = simulate(cfg);
        BuildResult r = ingest(art);
        CAPTURE(seed);
        for (const auto& v : r.report.violations)
            CAPTURE(v.rule + "@" + v.location + ": " + v.message);
        CHECK(r.report.ok());
        CHECK(art.stats.rings > 0);
    }
}

TEST_CASE("ground truth is consistent with the oracle on small instances") {
    SimConfig cfg = small_config(11);
    cfg.blocks = 10;
    cfg.txs_per_block = {CountDist::Kind::Fixed, 1, 0};
    cfg.ringsize = {RingsizePolicy::Kind::Fixed, 3, 0};
    SimArtifacts art = simulate(cfg);
    OracleOptions guard;
    guard.max_component_key_images = 16;
    BuildResult r = ingest(art);
    REQUIRE(r.report.ok());
    const LedgerView& view = *r.view;

    OracleResult oracle = enumerate_assignments(view, guard);
    CHECK(oracle.assignment_count >= 1);
    std::istringstream gt(art.ground_truth_lines);
    for (const TruthRecord& rec : parse_ground_truth(gt)) {
        KeyImageId ki = view.key_image_id(rec.key_image);
        REQUIRE(ki != kNone32);
        OutputUid real = view.resolve(rec.real, view.branch_index(rec.branches.front()));
        const auto& cands = oracle.candidates[ki];
        CHECK(std::find(cands.begin(), cands.end(), real) != cands.end());
    }
}

TEST_CASE("p_redeem=0 produces no cross-chain key images") {
    SimConfig cfg = small_config(21);
    cfg.forks.push_back({"forkA", 20, 20, 0.0});
    SimArtifacts art = simulate(cfg);
    CHECK(art.stats.redemptions == 0);
    CHECK(art.stats.cross_chain_keys == 0);

    BuildResult r = ingest(art);
    REQUIRE(r.report.ok());
    DeductionResult d = run_fixpoint(*r.view, {{Rule::CrossChain}, 1});
    CHECK(d.iterations.size() == 1);
    CHECK(d.iterations[0].cc == 0);
}

TEST_CASE("p_redeem=1 spends every output unspent at fork on both branches") {
    SimConfig cfg = small_config(22);
    cfg.forks.push_back({"forkA", 20, 25, 1.0});
    SimArtifacts art = simulate(cfg);
    CHECK(art.stats.redemptions > 0);
    CHECK(art.stats.cross_chain_keys == art.stats.redemptions);

    BuildResult r = ingest(art);
    REQUIRE(r.report.ok());
    const LedgerView& view = *r.view;

    // Every redeemed key image has two distinct rings and intersects.
    std::istringstream gt(art.ground_truth_lines);
    std::uint64_t two_branch = 0;
    for (const TruthRecord& rec : parse_ground_truth(gt)) {
        if (rec.branches.size() < 2)
            continue;
        auto rings = view.rings_for_key_image(rec.key_image);
        if (rings.size() == 2 && rings[0].second != rings[1].second)
            ++two_branch;
    }
    CHECK(two_branch == art.stats.redemptions);

    DeductionResult d = run_fixpoint(*r.view, {{Rule::CrossChain}, 1});
    CHECK(d.iterations.front().cc > 0);
}

TEST_CASE("tiny early chain clamps ringsize instead of failing") {
    SimConfig cfg = small_config(31);
    cfg.blocks = 6;
    cfg.ringsize = {RingsizePolicy::Kind::Fixed, 11, 0};
    SimArtifacts art = simulate(cfg);
    CHECK(art.stats.clamped_rings > 0);
    CHECK(ingest(art).report.ok());
}

TEST_CASE("sample_decoys draws k distinct uids and honours k=0") {
    std::mt19937_64 rng(5);
    auto pool = hourly_pool(50, 1600000000);
    DecoyRegime uniform;
    auto picks = sample_decoys(uniform, 1600000000, pool, 6, rng);
    CHECK(picks.size() == 6);
    std::sort(picks.begin(), picks.end());
    CHECK(std::adjacent_find(picks.begin(), picks.end()) == picks.end());

    CHECK(sample_decoys(uniform, 1600000000, pool, 0, rng).empty());
    CHECK_THROWS_AS(sample_decoys(uniform, 1600000000, hourly_pool(3, 1600000000), 5, rng),
                    ExhaustedDecoyPool);
}

TEST_CASE("uniform regime passes a KS test against the uniform law") {
    std::mt19937_64 rng(99);
    const std::size_t n = 1000;
    const std::int64_t now = 1600000000;
    auto pool = hourly_pool(n, now);
    DecoyRegime uniform;
    std::vector<std::uint64_t> hits(n, 0);
    const int calls = 16700, k = 6;
    for (int c = 0; c < calls; ++c)
        for (OutputUid uid : sample_decoys(uniform, now, pool, k, rng))
            ++hits[uid];
    double total = static_cast<double>(calls) * k;
    double cum = 0, d_stat = 0;
    for (std::size_t i = 0; i < n; ++i) {
        cum += static_cast<double>(hits[i]) / total;
        double expect = static_cast<double>(i + 1) / static_cast<double>(n);
        d_stat = std::max(d_stat, std::abs(cum - expect));
    }
    double critical = 1.628 / std::sqrt(total); // alpha = 0.01
    CHECK(d_stat < critical);
}

TEST_CASE("recent zone mass matches the analytic expectation") {
    std::mt19937_64 rng(123);
    const std::size_t n = 1000;
    const std::int64_t now = 1600000000;
    auto pool = hourly_pool(n, now); // ages 1..1000 hours
    DecoyRegime regime;
    regime.kind = DecoyRegime::Kind::RecentZone;
    regime.recent_q = 0.5;
    regime.recent_window_days = 1.8;
    regime.base = DecoyRegime::Kind::Uniform;

    std::int64_t cutoff = now - static_cast<std::int64_t>(1.8 * 86400.0);
    std::size_t zone = 0;
    for (const auto& e : pool)
        zone += e.created_at > cutoff;
    double base_mass = static_cast<double>(zone) / static_cast<double>(n);
    double expected = 0.5 + 0.5 * base_mass;

    const int draws = 100000;
    int in_zone = 0;
    for (int i = 0; i < draws; ++i) {
        auto picks = sample_decoys(regime, now, pool, 1, rng);
        in_zone += pool[picks[0]].created_at > cutoff;
    }
    double measured = static_cast<double>(in_zone) / draws;
    CHECK(std::abs(measured - expected) < 0.02);
}

TEST_CASE("triangular regime skews towards recent outputs") {
    std::mt19937_64 rng(7);
    const std::size_t n = 600;
    auto pool = hourly_pool(n, 1600000000);
    DecoyRegime regime;
    regime.kind = DecoyRegime::Kind::Triangular;
    double mean_pos = 0;
    const int draws = 60000;
    for (int i = 0; i < draws; ++i)
        mean_pos += sample_decoys(regime, 1600000000, pool, 1, rng)[0];
    mean_pos /= draws;
    CHECK(mean_pos > 0.64 * n);
    CHECK(mean_pos < 0.69 * n);
}

TEST_CASE("confidential pool filter keeps the spend's amount class") {
    std::vector<EligibleOutput> pool = {
        {0, 100, 0}, {1, 200, 5}, {2, 300, 0}, {3, 400, 10}, {4, 500, 5}};
    auto conf = confidential_pool_filter(pool, 0);
    REQUIRE(conf.size() == 2);
    CHECK(conf[0].uid == 0);
    CHECK(conf[1].uid == 2);
    auto denom = confidential_pool_filter(pool, 5);
    REQUIRE(denom.size() == 2);
    CHECK(denom[0].uid == 1);
    CHECK(denom[1].uid == 4);
    // Identity on an all-confidential pool.
    auto all = confidential_pool_filter(conf, 0);
    CHECK(all.size() == conf.size());
}

TEST_CASE("config validation rejects bad parameters") {
    SimConfig cfg = small_config(1);
    cfg.forks.push_back({"x", 50, 10, 0.5}); // beyond the chain
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.forks.clear();
    cfg.forks.push_back({"x", 10, 0, 0.5}); // no blocks
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.forks.clear();
    cfg.forks.push_back({"x", 10, 5, 1.5}); // bad probability
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = small_config(1);
    cfg.ringsize.n = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
