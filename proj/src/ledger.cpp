#include "ringtrace/ledger.hpp"

#include <algorithm>

namespace ringtrace {

BranchIndex LedgerView::branch_index(std::string_view name) const {
    for (BranchIndex b = 0; b < branches_.size(); ++b)
        if (branches_[b].name == name)
            return b;
    throw ConfigError("unknown branch: " + std::string(name));
}

OutputUid LedgerView::resolve(OutputRef ref, BranchIndex b) const {
    const Branch* br = &branches_.at(b);
    for (;;) {
        std::uint32_t prefix = 0;
        if (auto it = br->prefix_counts.find(ref.amount); it != br->prefix_counts.end())
            prefix = it->second;
        if (ref.index >= prefix) {
            auto it = br->own_outputs.find(ref.amount);
            std::uint32_t local = ref.index - prefix;
            if (it == br->own_outputs.end() || local >= it->second.size())
                throw UnknownOutputRef("no output (amount=" + std::to_string(ref.amount) +
                                       ", index=" + std::to_string(ref.index) +
                                       ") on branch " + br->name);
            return it->second[local];
        }
        br = &branches_.at(br->parent); // reference lies in the shared prefix
    }
}

KeyImageId LedgerView::key_image_id(std::string_view hex) const {
    auto it = ki_ids_.find(std::string(hex));
    return it == ki_ids_.end() ? kNone32 : it->second;
}

std::vector<std::pair<BranchIndex, const Ring*>>
LedgerView::rings_for_key_image(std::string_view hex) const {
    std::vector<std::pair<BranchIndex, const Ring*>> out;
    KeyImageId ki = key_image_id(hex);
    if (ki == kNone32)
        return out;
    for (BranchIndex b : ki_branches_[ki]) {
        InstanceIndex inst = instance_of(b, ki);
        out.emplace_back(b, &rings_[instances_[inst].ring]);
    }
    return out;
}

bool LedgerView::on_branch(OutputUid uid, BranchIndex b) const {
    const Output& o = output(uid);
    // Own output, or created on an ancestor below the fork point.
    BranchIndex cur = b;
    std::uint32_t cutoff = 0xffffffffu;
    while (cur != kNone32) {
        if (cur == o.origin_branch)
            return o.height < cutoff;
        cutoff = std::min(cutoff, branches_[cur].fork_height);
        cur = branches_[cur].parent;
    }
    return false;
}

void LedgerView::walk_timeline(
    BranchIndex b, const std::function<void(BranchIndex, const Block&)>& fn) const {
    // Collect the ancestor chain, root first.
    std::vector<BranchIndex> chain;
    for (BranchIndex cur = b; cur != kNone32; cur = branches_[cur].parent)
        chain.push_back(cur);
    std::reverse(chain.begin(), chain.end());
    for (std::size_t i = 0; i < chain.size(); ++i) {
        const Branch& seg = branches_[chain[i]];
        // Blocks of this segment stop where the next segment forks off.
        std::uint32_t stop = (i + 1 < chain.size()) ? branches_[chain[i + 1]].fork_height
                                                    : 0xffffffffu;
        for (const Block& blk : seg.blocks) {
            if (blk.height >= stop)
                break;
            fn(chain[i], blk);
        }
    }
}

} // namespace ringtrace
