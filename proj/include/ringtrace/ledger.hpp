#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ringtrace/errors.hpp"

namespace ringtrace {

using OutputUid = std::uint32_t;
using KeyImageId = std::uint32_t;
using TxIndex = std::uint32_t;
using RingIndex = std::uint32_t;
using BranchIndex = std::uint32_t;
using InstanceIndex = std::uint32_t;
using Amount = std::uint64_t;

inline constexpr std::uint32_t kNone32 = 0xffffffffu;

/// Absolute (amount, per-amount position) reference to an output on a branch.
struct OutputRef {
    Amount amount = 0;
    std::uint32_t index = 0;

    friend bool operator==(const OutputRef&, const OutputRef&) = default;
    friend auto operator<=>(const OutputRef&, const OutputRef&) = default;
};

struct Output {
    OutputUid uid = kNone32;
    Amount amount = 0;
    std::uint32_t index = 0;          // per-amount position on the origin branch
    BranchIndex origin_branch = 0;    // branch whose file created it
    std::uint32_t height = 0;
    std::int64_t created_at = 0;
    TxIndex creating_tx = kNone32;
};

/// One transaction input: a key image plus its ordered member list.
struct Ring {
    KeyImageId key_image = kNone32;
    std::vector<OutputUid> members;
    TxIndex spending_tx = kNone32;
    BranchIndex origin_branch = 0;     // branch whose file contains the spend
    std::uint32_t height = 0;
    std::int64_t spend_time = 0;
    std::vector<BranchIndex> branches; // branches whose timeline contains the spend

    bool nontrivial() const { return members.size() > 1; }
};

struct Transaction {
    std::string hash;
    bool coinbase = false;
    BranchIndex origin_branch = 0;
    std::uint32_t height = 0;
    std::int64_t time = 0;
    std::vector<RingIndex> inputs;
    std::vector<OutputUid> outputs;
};

struct Block {
    std::uint32_t height = 0;
    std::int64_t timestamp = 0;
    std::vector<TxIndex> txs;
};

/// A (ring, branch) pair. Pre-fork rings get one instance per branch they
/// live on; post-fork rings exactly one.
struct RingInstance {
    RingIndex ring = kNone32;
    BranchIndex branch = kNone32;
};

struct Branch {
    std::string name;
    BranchIndex parent = kNone32;   // kNone32 for the root
    std::uint32_t fork_height = 0;  // first own height
    std::vector<Block> blocks;      // own blocks only; shared prefix lives in ancestors

    // own outputs per amount, in creation order
    std::unordered_map<Amount, std::vector<OutputUid>> own_outputs;
    // per-amount output count of the ancestor prefix (index-space offset)
    std::unordered_map<Amount, std::uint32_t> prefix_counts;

    std::uint32_t first_instance = 0;
    std::uint32_t end_instance = 0; // instances [first_instance, end_instance)
    std::unordered_map<KeyImageId, InstanceIndex> key_images; // full timeline

    std::uint32_t tip_height() const {
        return blocks.empty() ? (fork_height == 0 ? 0 : fork_height - 1)
                              : blocks.back().height;
    }
};

/// Immutable multi-branch ledger. Built by the ingestion module; safe to
/// share across threads once constructed.
class LedgerView {
public:
    const std::vector<Branch>& branches() const { return branches_; }
    const std::vector<Output>& outputs() const { return outputs_; }
    const std::vector<Ring>& rings() const { return rings_; }
    const std::vector<Transaction>& transactions() const { return txs_; }
    const std::vector<RingInstance>& instances() const { return instances_; }

    const Branch& branch(BranchIndex b) const { return branches_.at(b); }
    const Output& output(OutputUid uid) const { return outputs_.at(uid); }
    const Ring& ring(RingIndex r) const { return rings_.at(r); }
    const Transaction& transaction(TxIndex t) const { return txs_.at(t); }
    const RingInstance& instance(InstanceIndex i) const { return instances_.at(i); }

    std::size_t branch_count() const { return branches_.size(); }
    std::size_t key_image_count() const { return ki_names_.size(); }

    BranchIndex branch_index(std::string_view name) const;

    /// Resolves an (amount, index) reference on a branch to its OutputUid.
    /// Pre-fork references resolve to the same uid on every branch.
    OutputUid resolve(OutputRef ref, BranchIndex branch) const;

    /// The (amount, index) reference of an output (identical on every branch
    /// that contains the output).
    OutputRef ref_of(OutputUid uid) const {
        const Output& o = output(uid);
        return OutputRef{o.amount, o.index};
    }

    KeyImageId key_image_id(std::string_view hex) const; // kNone32 if unseen
    const std::string& key_image_name(KeyImageId ki) const { return ki_names_.at(ki); }

    /// Every (branch, ring) pair carrying the key image. A pre-fork ring
    /// contributes one entry per branch, all referencing the same ring.
    std::vector<std::pair<BranchIndex, const Ring*>>
    rings_for_key_image(std::string_view hex) const;

    /// Branches carrying a key image, in branch-index order.
    const std::vector<BranchIndex>& ki_branches(KeyImageId ki) const {
        return ki_branches_.at(ki);
    }

    /// Instance of a key image on one branch; kNone32 if absent there.
    InstanceIndex instance_of(BranchIndex b, KeyImageId ki) const {
        const auto& m = branches_.at(b).key_images;
        auto it = m.find(ki);
        return it == m.end() ? kNone32 : it->second;
    }

    /// True if the output exists on the branch's timeline.
    bool on_branch(OutputUid uid, BranchIndex b) const;

    /// Walks the branch's full timeline (ancestor prefix first, then own
    /// blocks), invoking fn(branch_of_block, block) in height order.
    template <typename Fn>
    void for_each_timeline_block(BranchIndex b, Fn&& fn) const {
        walk_timeline(b, [&](BranchIndex seg, const Block& blk) { fn(seg, blk); });
    }

private:
    friend class LedgerBuilder;

    void walk_timeline(BranchIndex b,
                       const std::function<void(BranchIndex, const Block&)>& fn) const;

    std::vector<Branch> branches_;
    std::vector<Output> outputs_;
    std::vector<Ring> rings_;
    std::vector<Transaction> txs_;
    std::vector<RingInstance> instances_;
    std::vector<std::string> ki_names_;
    std::unordered_map<std::string, KeyImageId> ki_ids_;
    std::vector<std::vector<BranchIndex>> ki_branches_;
};

} // namespace ringtrace
