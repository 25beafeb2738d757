#include "ringtrace/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace ringtrace {
namespace {

using njson = nlohmann::json;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

std::string hex16(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

/// Deterministic draw helpers over one engine.
struct Sampler {
    std::mt19937_64 rng;

    explicit Sampler(std::uint64_t seed) : rng(seed) {}

    double uniform01() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
    std::uint64_t below(std::uint64_t n) { return n ? rng() % n : 0; }

    double normal() {
        double u1 = uniform01(), u2 = uniform01();
        while (u1 <= 1e-300)
            u1 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    double gamma(double shape, double scale) {
        if (shape < 1.0)
            return gamma(shape + 1.0, scale) * std::pow(uniform01(), 1.0 / shape);
        double d = shape - 1.0 / 3.0;
        double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double v = 1.0 + c * x;
            if (v <= 0)
                continue;
            v = v * v * v;
            double u = uniform01();
            if (u < 1.0 - 0.0331 * x * x * x * x)
                return d * v * scale;
            if (u > 1e-300 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
                return d * v * scale;
        }
    }

    std::uint32_t poisson(double mean) {
        double limit = std::exp(-mean);
        std::uint32_t k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= uniform01();
        } while (p > limit && k < 10000);
        return k - 1;
    }

    std::uint32_t count(const CountDist& d) {
        switch (d.kind) {
        case CountDist::Kind::Fixed:
            return static_cast<std::uint32_t>(d.a);
        case CountDist::Kind::Uniform: {
            std::uint32_t lo = static_cast<std::uint32_t>(d.a);
            std::uint32_t hi = static_cast<std::uint32_t>(d.b);
            return lo + static_cast<std::uint32_t>(below(hi >= lo ? hi - lo + 1 : 1));
        }
        case CountDist::Kind::Poisson:
            return poisson(d.a);
        }
        return 1;
    }
};

/// Regime-driven position draw over a creation-ordered pool. time_at(i) must
/// be nondecreasing in i.
template <typename TimeAt>
std::size_t sample_position(const DecoyRegime& regime, DecoyRegime::Kind kind, std::int64_t now,
                            std::size_t n, TimeAt&& time_at, Sampler& s) {
    switch (kind) {
    case DecoyRegime::Kind::Uniform:
        return static_cast<std::size_t>(s.below(n));
    case DecoyRegime::Kind::Triangular: {
        double u = s.uniform01();
        auto pos = static_cast<std::size_t>(static_cast<double>(n) * std::sqrt(u));
        return std::min(pos, n - 1);
    }
    case DecoyRegime::Kind::RecentZone: {
        std::int64_t cutoff =
            now - static_cast<std::int64_t>(regime.recent_window_days * 86400.0);
        std::size_t lo = 0, hi = n;
        while (lo < hi) { // first position strictly younger than the cutoff
            std::size_t mid = (lo + hi) / 2;
            if (time_at(mid) > cutoff)
                hi = mid;
            else
                lo = mid + 1;
        }
        if (s.uniform01() < regime.recent_q && lo < n)
            return lo + static_cast<std::size_t>(s.below(n - lo));
        return sample_position(regime, regime.base, now, n, time_at, s);
    }
    case DecoyRegime::Kind::Gamma: {
        double age = std::exp(s.gamma(regime.gamma_shape, regime.gamma_scale));
        std::int64_t target = now - static_cast<std::int64_t>(age);
        std::size_t lo = 0, hi = n;
        while (lo < hi) {
            std::size_t mid = (lo + hi) / 2;
            if (time_at(mid) < target)
                lo = mid + 1;
            else
                hi = mid;
        }
        if (lo >= n)
            return n - 1;
        if (lo > 0 && target - time_at(lo - 1) < time_at(lo) - target)
            return lo - 1;
        return lo;
    }
    }
    return 0;
}

std::vector<std::uint64_t> denomination_split(std::uint64_t total) {
    // Greedy 1/2/5 * 10^k decomposition, largest first.
    static const std::uint64_t denoms[] = {
        5000000, 2000000, 1000000, 500000, 200000, 100000, 50000, 20000,
        10000,   5000,    2000,    1000,   500,    200,    100,   50,
        20,      10,      5,       2,      1};
    std::vector<std::uint64_t> parts;
    for (std::uint64_t d : denoms)
        while (total >= d && parts.size() < 16) {
            parts.push_back(d);
            total -= d;
        }
    if (parts.empty())
        parts.push_back(1);
    return parts;
}

} // namespace

void SimConfig::validate() const {
    if (blocks == 0)
        throw ConfigError("blocks must be positive");
    if (root_name.empty())
        throw ConfigError("root branch name must not be empty");
    if (block_interval == 0)
        throw ConfigError("block_interval must be positive");
    if (ringsize.n == 0)
        throw ConfigError("ringsize must be at least 1");
    if (spend_age.median_days <= 0 || spend_age.sigma <= 0)
        throw ConfigError("spend_age parameters must be positive");
    if (decoys.kind == DecoyRegime::Kind::RecentZone) {
        if (decoys.recent_q < 0 || decoys.recent_q > 1)
            throw ConfigError("recent zone fraction must be in [0,1]");
        if (decoys.recent_window_days <= 0)
            throw ConfigError("recent zone window must be positive");
        if (decoys.base == DecoyRegime::Kind::RecentZone ||
            decoys.base == DecoyRegime::Kind::Gamma)
            throw ConfigError("recent zone base must be uniform or triangular");
    }
    if (decoys.kind == DecoyRegime::Kind::Gamma &&
        (decoys.gamma_shape <= 0 || decoys.gamma_scale <= 0))
        throw ConfigError("gamma parameters must be positive");
    std::set<std::string> names{root_name};
    for (const ForkPlan& f : forks) {
        if (f.name.empty() || !names.insert(f.name).second)
            throw ConfigError("fork names must be unique and non-empty");
        if (f.fork_height == 0 || f.fork_height >= blocks)
            throw ConfigError("fork height must lie strictly inside the root chain");
        if (f.blocks == 0)
            throw ConfigError("fork must have at least one block");
        if (f.p_redeem < 0 || f.p_redeem > 1)
            throw ConfigError("p_redeem must be in [0,1]");
    }
}

namespace {

struct GenOutput {
    Amount amount = 0;
    std::uint32_t index = 0;
    std::uint32_t height = 0;
    std::int64_t time = 0;
};

/// Per-amount decoy pool and organic-spend bookkeeping for one branch.
struct PoolClass {
    std::vector<std::uint32_t> ids; // creation order (eligible as decoys)
    std::vector<std::uint8_t> spent;
    std::uint64_t unspent_count = 0;
};

struct BranchCtx {
    std::string name;
    bool is_root = false;
    std::map<Amount, PoolClass> classes;
    std::map<Amount, std::uint32_t> next_index; // per-amount ref index space
    std::deque<std::uint32_t> redeem_queue;
    Sampler sampler{0};
    std::vector<RawBlock> blocks;
};

class Simulation {
public:
    explicit Simulation(const SimConfig& cfg) : cfg_(cfg) {}

    SimArtifacts run() {
        cfg_.validate();

        root_.name = cfg_.root_name;
        root_.is_root = true;
        root_.sampler = Sampler(splitmix64(cfg_.seed));

        std::vector<ForkPlan> forks = cfg_.forks;
        std::stable_sort(forks.begin(), forks.end(),
                         [](const ForkPlan& a, const ForkPlan& b) {
                             return a.fork_height < b.fork_height;
                         });
        std::vector<BranchCtx> children(forks.size());
        for (std::size_t i = 0; i < forks.size(); ++i) {
            children[i].name = forks[i].name;
            children[i].sampler = Sampler(splitmix64(cfg_.seed ^ (0xf0f0f0f0ull + i)));
        }

        // Root chain; each fork point snapshots pools and schedules spends.
        std::vector<std::map<Amount, PoolClass>> snapshots(forks.size());
        for (std::uint32_t h = 0; h < cfg_.blocks; ++h) {
            for (std::size_t i = 0; i < forks.size(); ++i)
                if (forks[i].fork_height == h) {
                    snapshots[i] = root_.classes;
                    partition_redemptions(forks[i], children[i]);
                }
            std::uint32_t remaining = cfg_.blocks - h;
            std::uint32_t quota = static_cast<std::uint32_t>(
                (root_.redeem_queue.size() + remaining - 1) / remaining);
            generate_block(root_, h, quota);
        }
        if (!root_.redeem_queue.empty())
            throw ConfigError("internal: root redemption queue not drained");

        for (std::size_t i = 0; i < forks.size(); ++i) {
            BranchCtx& child = children[i];
            child.classes = std::move(snapshots[i]);
            // The child starts from the shared prefix; only its own
            // (post-fork) outputs are organically spendable there.
            for (auto& [amount, cls] : child.classes) {
                std::fill(cls.spent.begin(), cls.spent.end(), std::uint8_t{1});
                cls.unspent_count = 0;
                // Child per-amount index spaces continue the prefix count.
                child.next_index[amount] = static_cast<std::uint32_t>(cls.ids.size());
            }
            std::uint32_t end = forks[i].fork_height + forks[i].blocks;
            for (std::uint32_t h = forks[i].fork_height; h < end; ++h) {
                std::uint32_t remaining = end - h;
                std::uint32_t quota = static_cast<std::uint32_t>(
                    (child.redeem_queue.size() + remaining - 1) / remaining);
                generate_block(child, h, quota);
            }
            if (!child.redeem_queue.empty())
                throw ConfigError("internal: child redemption queue not drained");
        }

        return assemble(forks, children);
    }

private:
    std::int64_t block_time(std::uint32_t h) const {
        return cfg_.genesis_time + static_cast<std::int64_t>(h) * cfg_.block_interval;
    }

    std::uint32_t new_output(BranchCtx& ctx, Amount amount, std::uint32_t height) {
        GenOutput o;
        o.amount = amount;
        o.height = height;
        o.time = block_time(height);
        auto [it, fresh] = ctx.next_index.try_emplace(amount, 0u);
        o.index = it->second++;
        outputs_.push_back(o);
        std::uint32_t id = static_cast<std::uint32_t>(outputs_.size() - 1);
        pending_registration_.push_back({&ctx, id});
        return id;
    }

    void partition_redemptions(const ForkPlan& fork, BranchCtx& child) {
        // Unspent pre-fork outputs either get scheduled on both branches or
        // stay exclusive to the root's organic pool.
        for (auto& [amount, cls] : root_.classes)
            for (std::size_t i = 0; i < cls.ids.size(); ++i) {
                if (cls.spent[i])
                    continue;
                if (child.sampler.uniform01() < fork.p_redeem) {
                    cls.spent[i] = 1; // leaves the organic pool on the root
                    --cls.unspent_count;
                    root_.redeem_queue.push_back(cls.ids[i]);
                    child.redeem_queue.push_back(cls.ids[i]);
                    ++stats_.redemptions;
                }
            }
    }

    struct SpendPick {
        std::uint32_t id;
        Amount amount;
    };

    /// Organic real-spend selection following the spend-age model.
    bool pick_real(BranchCtx& ctx, std::int64_t now, SpendPick& out) {
        // Amount class weighted by unspent counts (single class when
        // confidential).
        Amount amount = 0;
        std::uint64_t total_unspent = 0;
        for (const auto& [a, cls] : ctx.classes)
            total_unspent += cls.unspent_count;
        if (total_unspent == 0)
            return false;
        std::uint64_t roll = ctx.sampler.below(total_unspent);
        for (const auto& [a, cls] : ctx.classes) {
            if (roll < cls.unspent_count) {
                amount = a;
                break;
            }
            roll -= cls.unspent_count;
        }
        auto& cls = ctx.classes[amount];
        if (cls.ids.empty())
            return false;

        std::size_t pos;
        if (cfg_.spend_age.kind == SpendAgeModel::Kind::MatchDecoy) {
            pos = sample_position(
                cfg_.decoys, cfg_.decoys.kind, now, cls.ids.size(),
                [&](std::size_t i) { return outputs_[cls.ids[i]].time; }, ctx.sampler);
        } else {
            double mu = std::log(cfg_.spend_age.median_days * 86400.0);
            double age = std::exp(mu + cfg_.spend_age.sigma * ctx.sampler.normal());
            std::int64_t target = now - static_cast<std::int64_t>(age);
            std::size_t lo = 0, hi = cls.ids.size();
            while (lo < hi) {
                std::size_t mid = (lo + hi) / 2;
                if (outputs_[cls.ids[mid]].time < target)
                    lo = mid + 1;
                else
                    hi = mid;
            }
            pos = lo < cls.ids.size() ? lo : cls.ids.size() - 1;
        }
        // Nearest unspent around the sampled position.
        for (std::size_t d = 0; d < cls.ids.size(); ++d) {
            if (pos >= d && !cls.spent[pos - d]) {
                pos = pos - d;
                break;
            }
            if (pos + d < cls.ids.size() && !cls.spent[pos + d]) {
                pos = pos + d;
                break;
            }
        }
        if (cls.spent[pos])
            return false;
        cls.spent[pos] = 1;
        --cls.unspent_count;
        out = {cls.ids[pos], amount};
        return true;
    }

    std::uint32_t draw_ringsize(BranchCtx& ctx) {
        const RingsizePolicy& p = cfg_.ringsize;
        if (p.kind == RingsizePolicy::Kind::Fixed)
            return p.n;
        std::uint32_t extra = 0;
        while (extra < 8 && ctx.sampler.uniform01() < p.extra_p)
            ++extra;
        return p.n + extra;
    }

    RawRing build_ring(BranchCtx& ctx, std::uint32_t real_id, std::uint32_t height) {
        const GenOutput& real = outputs_[real_id];
        auto& cls = ctx.classes[real.amount];
        std::int64_t now = block_time(height);
        std::uint32_t k = draw_ringsize(ctx);

        // Pool excludes nothing but the real itself; spent outputs remain
        // valid decoys.
        std::size_t pool_n = cls.ids.size();
        std::uint32_t want = k - 1;
        std::uint64_t avail = pool_n ? pool_n - 1 : 0; // minus the real
        if (avail < want) {
            want = static_cast<std::uint32_t>(avail);
            ++stats_.clamped_rings;
        }

        std::set<std::uint32_t> members{real_id};
        std::uint32_t attempts = 0, cap = 64 * (want + 1);
        while (members.size() < want + 1u && attempts++ < cap) {
            std::size_t pos = sample_position(
                cfg_.decoys, cfg_.decoys.kind, now, pool_n,
                [&](std::size_t i) { return outputs_[cls.ids[i]].time; }, ctx.sampler);
            members.insert(cls.ids[pos]);
        }
        // Deterministic fill if rejection sampling ran short.
        for (std::size_t i = 0; members.size() < want + 1u && i < pool_n; ++i)
            members.insert(cls.ids[i]);

        RawRing ring;
        ring.key_image = hex16(splitmix64(0x200000000ull + real_id));
        for (std::uint32_t id : members) // ascending id = ascending index here
            ring.members.push_back(RawRef{outputs_[id].amount, outputs_[id].index});
        record_truth(ctx, ring.key_image, real_id, height);
        ++stats_.rings;
        return ring;
    }

    void record_truth(BranchCtx& ctx, const std::string& ki, std::uint32_t real_id,
                      std::uint32_t height) {
        auto [it, fresh] = truth_index_.emplace(ki, truth_.size());
        if (fresh) {
            truth_.push_back({ki, OutputRef{outputs_[real_id].amount, outputs_[real_id].index},
                              {}});
            truth_emissions_.push_back(0);
        }
        ++truth_emissions_[it->second];
        TruthRecord& rec = truth_[it->second];
        auto add_branch = [&](const std::string& name) {
            if (std::find(rec.branches.begin(), rec.branches.end(), name) ==
                rec.branches.end())
                rec.branches.push_back(name);
        };
        if (ctx.is_root) {
            add_branch(root_.name);
            for (const ForkPlan& f : cfg_.forks)
                if (height < f.fork_height)
                    add_branch(f.name); // shared-prefix spend
        } else {
            add_branch(ctx.name);
        }
    }

    void generate_block(BranchCtx& ctx, std::uint32_t height, std::uint32_t redemption_quota) {
        RawBlock blk;
        blk.height = height;
        blk.timestamp = block_time(height);

        // Coinbase.
        RawTx cb;
        cb.hash = hex16(splitmix64(0x100000000ull + tx_counter_++));
        cb.coinbase = true;
        std::vector<std::uint32_t> created;
        if (cfg_.value_model == ValueModel::Confidential) {
            created.push_back(new_output(ctx, 0, height));
        } else {
            for (std::uint64_t part : denomination_split(600))
                created.push_back(new_output(ctx, part, height));
        }
        for (std::uint32_t id : created)
            cb.outputs.push_back(RawOutput{outputs_[id].amount});
        blk.txs.push_back(std::move(cb));

        std::uint32_t organic_txs = ctx.sampler.count(cfg_.txs_per_block);
        std::uint32_t quota = std::min<std::uint32_t>(
            redemption_quota, static_cast<std::uint32_t>(ctx.redeem_queue.size()));

        std::uint32_t made = 0;
        while (made < organic_txs || quota > 0) {
            RawTx tx;
            tx.hash = hex16(splitmix64(0x100000000ull + tx_counter_++));
            tx.coinbase = false;
            std::uint32_t n_in = std::max<std::uint32_t>(1, ctx.sampler.count(cfg_.inputs_per_tx));
            for (std::uint32_t i = 0; i < n_in; ++i) {
                if (quota > 0) {
                    std::uint32_t real = ctx.redeem_queue.front();
                    ctx.redeem_queue.pop_front();
                    --quota;
                    tx.inputs.push_back(build_ring(ctx, real, height));
                } else if (made < organic_txs) {
                    SpendPick pick;
                    if (pick_real(ctx, block_time(height), pick))
                        tx.inputs.push_back(build_ring(ctx, pick.id, height));
                }
            }
            if (made < organic_txs)
                ++made;
            if (tx.inputs.empty())
                continue; // nothing spendable yet
            std::vector<std::uint32_t> outs;
            if (cfg_.value_model == ValueModel::Confidential) {
                std::uint32_t n_out = ctx.sampler.count(cfg_.outputs_per_tx);
                for (std::uint32_t i = 0; i < n_out; ++i)
                    outs.push_back(new_output(ctx, 0, height));
            } else {
                std::uint64_t total = 1 + ctx.sampler.below(9999);
                for (std::uint64_t part : denomination_split(total))
                    outs.push_back(new_output(ctx, part, height));
            }
            for (std::uint32_t id : outs)
                tx.outputs.push_back(RawOutput{outputs_[id].amount});
            blk.txs.push_back(std::move(tx));
        }

        ctx.blocks.push_back(std::move(blk));
        // Outputs become decoy-eligible and spendable from the next block on.
        for (auto& [pctx, id] : pending_registration_) {
            auto& cls = pctx->classes[outputs_[id].amount];
            cls.ids.push_back(id);
            cls.spent.push_back(0);
            ++cls.unspent_count;
        }
        pending_registration_.clear();
    }

    SimArtifacts assemble(const std::vector<ForkPlan>& forks,
                          std::vector<BranchCtx>& children) {
        SimArtifacts art;
        auto render = [](const BranchCtx& ctx) {
            std::string text;
            for (const RawBlock& blk : ctx.blocks) {
                text += block_to_json_line(blk);
                text += '\n';
            }
            return text;
        };
        art.branch_buffers.push_back(
            BranchBuffer{root_.name, std::nullopt, std::nullopt, render(root_)});
        for (std::size_t i = 0; i < children.size(); ++i)
            art.branch_buffers.push_back(BranchBuffer{children[i].name, root_.name,
                                                      forks[i].fork_height,
                                                      render(children[i])});

        std::string spec = "{\"branches\":[";
        for (std::size_t i = 0; i < art.branch_buffers.size(); ++i) {
            const BranchBuffer& b = art.branch_buffers[i];
            if (i)
                spec += ',';
            spec += "{\"name\":\"" + b.name + "\",\"file\":\"" + b.name + ".jsonl\",";
            if (b.parent)
                spec += "\"parent\":\"" + *b.parent +
                        "\",\"fork_height\":" + std::to_string(*b.fork_height) + "}";
            else
                spec += "\"parent\":null,\"fork_height\":null}";
        }
        spec += "]}\n";
        art.fork_spec_json = std::move(spec);

        std::string gt;
        for (const TruthRecord& rec : truth_) {
            gt += "{\"key_image\":\"" + rec.key_image +
                  "\",\"real\":{\"amount\":" + std::to_string(rec.real.amount) +
                  ",\"index\":" + std::to_string(rec.real.index) + "},\"branches\":[";
            for (std::size_t i = 0; i < rec.branches.size(); ++i) {
                if (i)
                    gt += ',';
                gt += "\"" + rec.branches[i] + "\"";
            }
            gt += "]}\n";
        }
        art.ground_truth_lines = std::move(gt);

        stats_.outputs = outputs_.size();
        for (std::size_t i = 0; i < truth_.size(); ++i)
            stats_.cross_chain_keys += truth_emissions_[i] >= 2;
        art.stats = stats_;
        return art;
    }

    SimConfig cfg_;
    BranchCtx root_;
    std::vector<GenOutput> outputs_;
    std::vector<std::pair<BranchCtx*, std::uint32_t>> pending_registration_;
    std::vector<TruthRecord> truth_;
    std::vector<std::uint32_t> truth_emissions_;
    std::map<std::string, std::size_t> truth_index_;
    std::uint64_t tx_counter_ = 0;
    SimStats stats_;
};

} // namespace

SimArtifacts simulate(const SimConfig& config) { return Simulation(config).run(); }

SimOutputPaths simulate_to_dir(const SimConfig& config, const std::filesystem::path& out_dir) {
    SimArtifacts art = simulate(config);
    std::filesystem::create_directories(out_dir);
    SimOutputPaths paths;
    for (const BranchBuffer& b : art.branch_buffers) {
        std::filesystem::path p = out_dir / (b.name + ".jsonl");
        std::ofstream os(p, std::ios::binary);
        os << b.content;
        paths.branch_files.push_back(p);
    }
    paths.fork_spec = out_dir / "forkspec.json";
    {
        std::ofstream os(paths.fork_spec, std::ios::binary);
        os << art.fork_spec_json;
    }
    paths.ground_truth = out_dir / "ground_truth.jsonl";
    {
        std::ofstream os(paths.ground_truth, std::ios::binary);
        os << art.ground_truth_lines;
    }
    paths.stats = art.stats;
    return paths;
}

std::vector<TruthRecord> parse_ground_truth(std::istream& in) {
    std::vector<TruthRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        njson j;
        try {
            j = njson::parse(line);
        } catch (const njson::parse_error& e) {
            throw SyntaxError(e.what(), line_no);
        }
        TruthRecord rec;
        rec.key_image = j.at("key_image").get<std::string>();
        rec.real.amount = j.at("real").at("amount").get<Amount>();
        rec.real.index = j.at("real").at("index").get<std::uint32_t>();
        for (const njson& b : j.at("branches"))
            rec.branches.push_back(b.get<std::string>());
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<OutputUid> sample_decoys(const DecoyRegime& regime, std::int64_t now,
                                     const std::vector<EligibleOutput>& eligible,
                                     std::uint32_t k, std::mt19937_64& rng) {
    if (eligible.size() < k)
        throw ExhaustedDecoyPool("need " + std::to_string(k) + " decoys, only " +
                                 std::to_string(eligible.size()) + " eligible outputs");
    Sampler s(0);
    s.rng = rng;
    std::set<std::size_t> chosen;
    std::uint64_t attempts = 0, cap = 64ull * (k + 1);
    while (chosen.size() < k && attempts++ < cap) {
        std::size_t pos = sample_position(
            regime, regime.kind, now, eligible.size(),
            [&](std::size_t i) { return eligible[i].created_at; }, s);
        chosen.insert(pos);
    }
    for (std::size_t i = 0; chosen.size() < k && i < eligible.size(); ++i)
        chosen.insert(i);
    rng = s.rng;
    std::vector<OutputUid> out;
    out.reserve(k);
    for (std::size_t pos : chosen)
        out.push_back(eligible[pos].uid);
    return out;
}

std::vector<EligibleOutput> confidential_pool_filter(const std::vector<EligibleOutput>& pool,
                                                     Amount spend_amount) {
    std::vector<EligibleOutput> out;
    for (const EligibleOutput& e : pool)
        if (e.amount == spend_amount)
            out.push_back(e);
    return out;
}

SimConfig load_sim_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open sim config: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    njson j;
    try {
        j = njson::parse(buf.str());
    } catch (const njson::parse_error& e) {
        throw ConfigError("sim config parse error: " + std::string(e.what()));
    }
    if (!j.is_object())
        throw ConfigError("sim config must be a JSON object");

    SimConfig cfg;
    auto get = [&](const char* name, auto& field) {
        if (j.contains(name))
            field = j[name].get<std::decay_t<decltype(field)>>();
    };
    get("seed", cfg.seed);
    get("name", cfg.root_name);
    get("blocks", cfg.blocks);
    get("block_interval", cfg.block_interval);
    get("genesis_time", cfg.genesis_time);

    auto parse_count = [&](const char* name, CountDist& d) {
        if (!j.contains(name))
            return;
        const njson& c = j[name];
        std::string kind = c.value("dist", "fixed");
        if (kind == "fixed") {
            d.kind = CountDist::Kind::Fixed;
            d.a = c.value("value", 1.0);
        } else if (kind == "uniform") {
            d.kind = CountDist::Kind::Uniform;
            d.a = c.value("lo", 1.0);
            d.b = c.value("hi", 1.0);
        } else if (kind == "poisson") {
            d.kind = CountDist::Kind::Poisson;
            d.a = c.value("mean", 1.0);
        } else {
            throw ConfigError("unknown count distribution: " + kind);
        }
    };
    parse_count("txs_per_block", cfg.txs_per_block);
    parse_count("inputs_per_tx", cfg.inputs_per_tx);
    parse_count("outputs_per_tx", cfg.outputs_per_tx);

    if (j.contains("value_model")) {
        std::string v = j["value_model"].get<std::string>();
        if (v == "confidential")
            cfg.value_model = ValueModel::Confidential;
        else if (v == "denominated")
            cfg.value_model = ValueModel::Denominated;
        else
            throw ConfigError("unknown value model: " + v);
    }
    if (j.contains("ringsize")) {
        const njson& r = j["ringsize"];
        std::string policy = r.value("policy", "fixed");
        cfg.ringsize.n = r.value("n", 11u);
        if (policy == "fixed") {
            cfg.ringsize.kind = RingsizePolicy::Kind::Fixed;
        } else if (policy == "minimum") {
            cfg.ringsize.kind = RingsizePolicy::Kind::Minimum;
            cfg.ringsize.extra_p = r.value("extra_p", 0.5);
        } else {
            throw ConfigError("unknown ringsize policy: " + policy);
        }
    }
    if (j.contains("spend_age")) {
        const njson& s = j["spend_age"];
        std::string kind = s.value("dist", "lognormal");
        if (kind == "lognormal") {
            cfg.spend_age.kind = SpendAgeModel::Kind::LogNormal;
            cfg.spend_age.median_days = s.value("median_days", 2.0);
            cfg.spend_age.sigma = s.value("sigma", 1.0);
        } else if (kind == "match_decoy") {
            cfg.spend_age.kind = SpendAgeModel::Kind::MatchDecoy;
        } else {
            throw ConfigError("unknown spend age distribution: " + kind);
        }
    }
    if (j.contains("decoys")) {
        const njson& d = j["decoys"];
        std::string regime = d.value("regime", "uniform");
        auto base_kind = [](const std::string& name) {
            if (name == "uniform")
                return DecoyRegime::Kind::Uniform;
            if (name == "triangular")
                return DecoyRegime::Kind::Triangular;
            throw ConfigError("unknown base regime: " + name);
        };
        if (regime == "uniform") {
            cfg.decoys.kind = DecoyRegime::Kind::Uniform;
        } else if (regime == "triangular") {
            cfg.decoys.kind = DecoyRegime::Kind::Triangular;
        } else if (regime == "recent_zone") {
            cfg.decoys.kind = DecoyRegime::Kind::RecentZone;
            cfg.decoys.recent_q = d.value("q", 0.5);
            cfg.decoys.recent_window_days = d.value("window_days", 1.8);
            cfg.decoys.base = base_kind(d.value("base", "uniform"));
        } else if (regime == "gamma") {
            cfg.decoys.kind = DecoyRegime::Kind::Gamma;
            cfg.decoys.gamma_shape = d.value("shape", 19.28);
            cfg.decoys.gamma_scale = d.value("scale", 1.0 / 1.61);
        } else {
            throw ConfigError("unknown decoy regime: " + regime);
        }
    }
    if (j.contains("forks")) {
        for (const njson& f : j["forks"]) {
            ForkPlan plan;
            plan.name = f.value("name", "");
            plan.fork_height = f.value("fork_height", 0u);
            plan.blocks = f.value("blocks", 0u);
            plan.p_redeem = f.value("p_redeem", 0.0);
            cfg.forks.push_back(std::move(plan));
        }
    }
    cfg.validate();
    return cfg;
}

} // namespace ringtrace
