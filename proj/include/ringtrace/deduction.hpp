#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "ringtrace/ledger.hpp"

namespace ringtrace {

enum class Rule { ZeroMixin, Intersection, CrossChain };

/// "zmr", "ir" or "cc".
Rule rule_from_name(std::string_view name);
std::string_view rule_name(Rule r);

enum class Mark : std::uint8_t { Unknown, Mixin, Real };

/// Mutable deduction state over one LedgerView: per-instance candidate sets,
/// per-branch spent sets, and the global key-image resolution map.
/// Candidate sets only shrink, spent sets only grow.
class MarkStore {
public:
    explicit MarkStore(const LedgerView& view);

    const LedgerView& view() const { return *view_; }

    std::uint32_t candidate_count(InstanceIndex inst) const { return cand_count_[inst]; }
    bool is_candidate(InstanceIndex inst, std::uint32_t member_idx) const;
    std::vector<OutputUid> candidates(InstanceIndex inst) const;
    Mark mark(InstanceIndex inst, std::uint32_t member_idx) const;

    /// Real spend of a key image, or kNone32 while unresolved.
    OutputUid resolved(KeyImageId ki) const { return resolved_[ki]; }

    bool is_spent(BranchIndex b, OutputUid uid) const { return spent_[b][uid] != 0; }
    bool is_spent_unattributed(BranchIndex b, OutputUid uid) const {
        return spent_[b][uid] == 1;
    }
    std::vector<OutputUid> spent_outputs(BranchIndex b) const;
    std::vector<OutputUid> spent_unattributed(BranchIndex b) const;

    friend bool operator==(const MarkStore& a, const MarkStore& b) {
        return a.cand_bits_ == b.cand_bits_ && a.resolved_ == b.resolved_ &&
               a.spent_ == b.spent_ && a.attributed_ == b.attributed_;
    }

private:
    friend class DeductionEngine;

    bool bit(InstanceIndex inst, std::uint32_t member_idx) const {
        const auto& w = cand_bits_[word_base_[inst] + member_idx / 64];
        return (w >> (member_idx % 64)) & 1u;
    }

    const LedgerView* view_;
    std::vector<std::uint32_t> cand_count_;  // per instance
    std::vector<std::size_t> word_base_;     // per instance, into cand_bits_
    std::vector<std::uint64_t> cand_bits_;   // 1 = still a candidate
    std::vector<std::uint8_t> attributed_;   // per instance: resolution applied
    std::vector<OutputUid> resolved_;        // per key image, kNone32 = open
    std::vector<std::vector<std::uint8_t>> spent_; // per branch/uid: 0|1 unattributed|2 attributed
    std::shared_ptr<std::vector<std::vector<std::pair<InstanceIndex, std::uint32_t>>>>
        occ_cache_; // lazily built occurrence index, not part of the state
};

struct IterationStats {
    std::uint64_t zmr = 0;
    std::uint64_t ir = 0;
    std::uint64_t cc = 0;

    std::uint64_t total() const { return zmr + ir + cc; }
};

struct DeductionOptions {
    std::vector<Rule> rules{Rule::ZeroMixin, Rule::CrossChain, Rule::Intersection};
    unsigned threads = 1; // per-branch rules fan out over branches
};

struct DeductionResult {
    MarkStore store;
    std::vector<IterationStats> iterations; // last entry is all zero

    std::size_t iteration_count() const { return iterations.size(); }
};

/// One pass of the spent-singleton rule on a branch: every key image whose
/// candidate set has shrunk to one member is resolved to it, the member is
/// added to the branch spent set and struck from all other rings on the
/// branch, chaining until quiescent. Returns the number of marks changed.
std::uint64_t zero_mixin_sweep(const LedgerView& view, MarkStore& store, BranchIndex branch);

/// One pass of matching-based intersection removal on a branch: strikes every
/// (ring, member) edge that no ring-saturating matching uses, and records
/// outputs matched in every such matching as spent (unattributed). Subsumes
/// the N-rings-over-N-members tight-set rule for every N.
std::uint64_t allowed_edge_filter(const LedgerView& view, MarkStore& store, BranchIndex branch);

/// One pass of cross-chain narrowing: candidate sets of a key image present
/// on several branches are replaced by their intersection.
std::uint64_t cross_chain_intersect(const LedgerView& view, MarkStore& store);

/// Applies the enabled rules round-robin until a full iteration changes
/// nothing. The result is order- and thread-count-independent.
DeductionResult run_fixpoint(const LedgerView& view, const DeductionOptions& opts = {});

/// |candidate set| of the key image on the branch; 1 means traced.
/// Throws UnknownKeyImage if the key image is not on the branch.
std::uint32_t effective_ringsize(const MarkStore& store, BranchIndex branch, KeyImageId ki);

/// Line-oriented result export:
/// {"key_image":..., "branch":..., "real":{...}|null, "candidates":[...]}
void export_deduction(const DeductionResult& result, std::ostream& out);

/// Spent-set file for one branch: {"amount":A,"index":I,"key_image":hex|null}
/// per line, null meaning spent-unattributed.
void export_spent_set(const DeductionResult& result, BranchIndex branch, std::ostream& out);

} // namespace ringtrace
