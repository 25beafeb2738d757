#include "ringtrace/deduction.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <ostream>
#include <thread>
#include <unordered_map>

#include "ringtrace/matching.hpp"

namespace ringtrace {

Rule rule_from_name(std::string_view name) {
    if (name == "zmr")
        return Rule::ZeroMixin;
    if (name == "ir")
        return Rule::Intersection;
    if (name == "cc")
        return Rule::CrossChain;
    throw ConfigError("unknown rule: " + std::string(name) + " (expected zmr, ir or cc)");
}

std::string_view rule_name(Rule r) {
    switch (r) {
    case Rule::ZeroMixin:
        return "zmr";
    case Rule::Intersection:
        return "ir";
    case Rule::CrossChain:
        return "cc";
    }
    return "?";
}

MarkStore::MarkStore(const LedgerView& view) : view_(&view) {
    const auto& instances = view.instances();
    cand_count_.resize(instances.size());
    word_base_.resize(instances.size());
    std::size_t words = 0;
    for (std::size_t i = 0; i < instances.size(); ++i) {
        std::size_t n = view.ring(instances[i].ring).members.size();
        cand_count_[i] = static_cast<std::uint32_t>(n);
        word_base_[i] = words;
        words += (n + 63) / 64;
    }
    cand_bits_.assign(words, 0);
    for (std::size_t i = 0; i < instances.size(); ++i) {
        std::size_t n = view.ring(instances[i].ring).members.size();
        for (std::size_t m = 0; m < n; ++m)
            cand_bits_[word_base_[i] + m / 64] |= std::uint64_t{1} << (m % 64);
    }
    attributed_.assign(instances.size(), 0);
    resolved_.assign(view.key_image_count(), kNone32);
    spent_.assign(view.branch_count(), std::vector<std::uint8_t>(view.outputs().size(), 0));
}

bool MarkStore::is_candidate(InstanceIndex inst, std::uint32_t member_idx) const {
    return bit(inst, member_idx);
}

std::vector<OutputUid> MarkStore::candidates(InstanceIndex inst) const {
    const Ring& ring = view_->ring(view_->instance(inst).ring);
    std::vector<OutputUid> out;
    out.reserve(cand_count_[inst]);
    for (std::uint32_t m = 0; m < ring.members.size(); ++m)
        if (bit(inst, m))
            out.push_back(ring.members[m]);
    return out;
}

Mark MarkStore::mark(InstanceIndex inst, std::uint32_t member_idx) const {
    if (!bit(inst, member_idx))
        return Mark::Mixin;
    return attributed_[inst] ? Mark::Real : Mark::Unknown;
}

std::vector<OutputUid> MarkStore::spent_outputs(BranchIndex b) const {
    std::vector<OutputUid> out;
    for (OutputUid u = 0; u < spent_[b].size(); ++u)
        if (spent_[b][u])
            out.push_back(u);
    return out;
}

std::vector<OutputUid> MarkStore::spent_unattributed(BranchIndex b) const {
    std::vector<OutputUid> out;
    for (OutputUid u = 0; u < spent_[b].size(); ++u)
        if (spent_[b][u] == 1)
            out.push_back(u);
    return out;
}

class DeductionEngine {
public:
    struct Resolution {
        KeyImageId ki;
        OutputUid real;
    };

    /// Occurrence index: output uid -> (instance, member position) pairs.
    static std::vector<std::vector<std::pair<InstanceIndex, std::uint32_t>>>
    occurrences(const LedgerView& view) {
        std::vector<std::vector<std::pair<InstanceIndex, std::uint32_t>>> occ(
            view.outputs().size());
        for (InstanceIndex i = 0; i < view.instances().size(); ++i) {
            const Ring& ring = view.ring(view.instance(i).ring);
            for (std::uint32_t m = 0; m < ring.members.size(); ++m)
                occ[ring.members[m]].emplace_back(i, m);
        }
        return occ;
    }

    static void clear_bit(MarkStore& s, InstanceIndex inst, std::uint32_t member_idx) {
        s.cand_bits_[s.word_base_[inst] + member_idx / 64] &=
            ~(std::uint64_t{1} << (member_idx % 64));
    }

    static std::uint64_t zmr_sweep(MarkStore& s, BranchIndex b,
                                   std::vector<Resolution>& resolutions) {
        const LedgerView& view = *s.view_;
        const Branch& br = view.branch(b);
        const auto& occ = occurrence_cache(s);
        std::uint64_t changes = 0;

        std::vector<InstanceIndex> work;
        for (InstanceIndex i = br.first_instance; i < br.end_instance; ++i)
            if (s.cand_count_[i] == 1 && !s.attributed_[i])
                work.push_back(i);

        while (!work.empty()) {
            InstanceIndex inst = work.back();
            work.pop_back();
            if (s.attributed_[inst])
                continue;
            const Ring& ring = view.ring(view.instance(inst).ring);
            OutputUid real = kNone32;
            for (std::uint32_t m = 0; m < ring.members.size(); ++m)
                if (s.bit(inst, m)) {
                    real = ring.members[m];
                    break;
                }
            KeyImageId ki = ring.key_image;
            if (s.resolved_[ki] != kNone32 && s.resolved_[ki] != real)
                throw InconsistentLedger("key image " + view.key_image_name(ki) +
                                         " resolves to two different outputs");
            resolutions.push_back({ki, real});
            s.attributed_[inst] = 1;
            s.spent_[b][real] = 2;
            ++changes;

            // The spent member leaves every other ring on this branch.
            for (auto [other, midx] : occ[real]) {
                if (other == inst || view.instance(other).branch != b || !s.bit(other, midx))
                    continue;
                clear_bit(s, other, midx);
                ++changes;
                if (--s.cand_count_[other] == 0)
                    throw InconsistentLedger(
                        "removing spent output " + std::to_string(real) +
                        " empties ring " +
                        view.key_image_name(view.ring(view.instance(other).ring).key_image));
                if (s.cand_count_[other] == 1 && !s.attributed_[other])
                    work.push_back(other);
            }
        }
        return changes;
    }

    static std::uint64_t ir_sweep(MarkStore& s, BranchIndex b) {
        const LedgerView& view = *s.view_;
        const Branch& br = view.branch(b);
        std::uint32_t n_instances = br.end_instance - br.first_instance;
        if (n_instances == 0)
            return 0;

        BipartiteGraph g;
        g.adj.resize(n_instances);
        std::vector<OutputUid> right_uid;
        std::unordered_map<OutputUid, std::uint32_t> right_id;
        std::vector<std::vector<std::uint32_t>> member_pos(n_instances);

        for (std::uint32_t l = 0; l < n_instances; ++l) {
            InstanceIndex inst = br.first_instance + l;
            const Ring& ring = view.ring(view.instance(inst).ring);
            for (std::uint32_t m = 0; m < ring.members.size(); ++m) {
                if (!s.bit(inst, m))
                    continue;
                OutputUid uid = ring.members[m];
                auto [it, fresh] =
                    right_id.emplace(uid, static_cast<std::uint32_t>(right_uid.size()));
                if (fresh)
                    right_uid.push_back(uid);
                g.adj[l].push_back(it->second);
                member_pos[l].push_back(m);
            }
        }
        g.right_count = static_cast<std::uint32_t>(right_uid.size());

        Matching m = maximum_matching(g);
        if (!m.saturates_left())
            throw InconsistentLedger("branch " + br.name + " has " +
                                     std::to_string(n_instances - m.size) +
                                     " rings more than assignable outputs");

        EdgeClassification cls = classify_edges(g, m);
        std::uint64_t changes = 0;
        for (std::uint32_t l = 0; l < n_instances; ++l) {
            InstanceIndex inst = br.first_instance + l;
            KeyImageId ki = view.ring(view.instance(inst).ring).key_image;
            for (std::size_t i = 0; i < g.adj[l].size(); ++i) {
                if (cls.admissible[l][i])
                    continue;
                if (right_uid[g.adj[l][i]] == s.resolved_[ki])
                    throw InconsistentLedger("matching filter would strike the resolved spend of " +
                                             view.key_image_name(ki));
                clear_bit(s, inst, member_pos[l][i]);
                --s.cand_count_[inst];
                ++changes;
            }
        }
        for (std::uint32_t r = 0; r < g.right_count; ++r) {
            if (!cls.right_always_matched[r])
                continue;
            OutputUid uid = right_uid[r];
            if (s.spent_[b][uid] == 0) {
                s.spent_[b][uid] = 1;
                ++changes;
            }
        }
        return changes;
    }

    static std::uint64_t cc_sweep(MarkStore& s) {
        const LedgerView& view = *s.view_;
        std::uint64_t changes = 0;
        for (KeyImageId ki = 0; ki < view.key_image_count(); ++ki) {
            const auto& branches = view.ki_branches(ki);
            if (branches.size() < 2)
                continue;
            std::vector<InstanceIndex> insts;
            insts.reserve(branches.size());
            for (BranchIndex b : branches)
                insts.push_back(view.instance_of(b, ki));

            // Intersection of the per-branch candidate sets.
            std::vector<OutputUid> inter = s.candidates(insts[0]);
            std::sort(inter.begin(), inter.end());
            for (std::size_t i = 1; i < insts.size(); ++i) {
                std::vector<OutputUid> c = s.candidates(insts[i]);
                std::sort(c.begin(), c.end());
                std::vector<OutputUid> next;
                std::set_intersection(inter.begin(), inter.end(), c.begin(), c.end(),
                                      std::back_inserter(next));
                inter = std::move(next);
            }
            if (inter.empty())
                throw InconsistentLedger("cross-chain intersection for key image " +
                                         view.key_image_name(ki) + " is empty");

            for (std::size_t i = 0; i < insts.size(); ++i) {
                InstanceIndex inst = insts[i];
                const Ring& ring = view.ring(view.instance(inst).ring);
                for (std::uint32_t mi = 0; mi < ring.members.size(); ++mi) {
                    if (!s.bit(inst, mi))
                        continue;
                    if (!std::binary_search(inter.begin(), inter.end(), ring.members[mi])) {
                        if (ring.members[mi] == s.resolved_[ki])
                            throw InconsistentLedger(
                                "cross-chain intersection would strike the resolved spend of " +
                                view.key_image_name(ki));
                        clear_bit(s, inst, mi);
                        --s.cand_count_[inst];
                        ++changes;
                    }
                }
            }
        }
        return changes;
    }

    static void apply_resolutions(MarkStore& s, const std::vector<Resolution>& res) {
        const LedgerView& view = *s.view_;
        for (const Resolution& r : res) {
            if (s.resolved_[r.ki] == kNone32)
                s.resolved_[r.ki] = r.real;
            else if (s.resolved_[r.ki] != r.real)
                throw InconsistentLedger("key image " + view.key_image_name(r.ki) +
                                         " resolves to two different outputs");
            // The resolved spend must still be a candidate wherever the key
            // image occurs; contradictory data would have struck it.
            for (BranchIndex b : view.ki_branches(r.ki)) {
                InstanceIndex inst = view.instance_of(b, r.ki);
                const Ring& ring = view.ring(view.instance(inst).ring);
                auto it = std::find(ring.members.begin(), ring.members.end(), r.real);
                std::uint32_t idx = static_cast<std::uint32_t>(it - ring.members.begin());
                if (it == ring.members.end() || !s.bit(inst, idx))
                    throw InconsistentLedger(
                        "key image " + view.key_image_name(r.ki) + " resolves to an output " +
                        "already ruled out on branch " + view.branch(b).name);
            }
        }
    }

    /// Runs fn(branch) over all branches, optionally on threads. Results are
    /// merged in branch order so the outcome is schedule-independent.
    template <typename Fn>
    static std::uint64_t per_branch(MarkStore& s, unsigned threads, Fn&& fn) {
        std::size_t nb = s.view_->branch_count();
        std::vector<std::uint64_t> counts(nb, 0);
        std::vector<std::vector<Resolution>> res(nb);
        if (threads <= 1 || nb <= 1) {
            for (BranchIndex b = 0; b < nb; ++b)
                counts[b] = fn(b, res[b]);
        } else {
            std::vector<std::exception_ptr> errors(nb);
            std::vector<std::thread> pool;
            std::size_t active = std::min<std::size_t>(threads, nb);
            std::atomic<std::uint32_t> next{0};
            for (std::size_t t = 0; t < active; ++t)
                pool.emplace_back([&]() {
                    for (;;) {
                        std::uint32_t b = next.fetch_add(1);
                        if (b >= nb)
                            return;
                        try {
                            counts[b] = fn(b, res[b]);
                        } catch (...) {
                            errors[b] = std::current_exception();
                        }
                    }
                });
            for (auto& th : pool)
                th.join();
            for (std::size_t b = 0; b < nb; ++b)
                if (errors[b])
                    std::rethrow_exception(errors[b]);
        }
        std::uint64_t total = 0;
        for (BranchIndex b = 0; b < nb; ++b) {
            apply_resolutions(s, res[b]);
            total += counts[b];
        }
        return total;
    }

private:
    // One occurrence index per store; rebuilt lazily after construction.
    static const std::vector<std::vector<std::pair<InstanceIndex, std::uint32_t>>>&
    occurrence_cache(MarkStore& s) {
        if (!s.occ_cache_)
            s.occ_cache_ = std::make_shared<
                std::vector<std::vector<std::pair<InstanceIndex, std::uint32_t>>>>(
                occurrences(*s.view_));
        return *s.occ_cache_;
    }
};

std::uint64_t zero_mixin_sweep(const LedgerView& view, MarkStore& store, BranchIndex branch) {
    (void)view;
    std::vector<DeductionEngine::Resolution> res;
    std::uint64_t n = DeductionEngine::zmr_sweep(store, branch, res);
    DeductionEngine::apply_resolutions(store, res);
    return n;
}

std::uint64_t allowed_edge_filter(const LedgerView& view, MarkStore& store, BranchIndex branch) {
    (void)view;
    return DeductionEngine::ir_sweep(store, branch);
}

std::uint64_t cross_chain_intersect(const LedgerView& view, MarkStore& store) {
    (void)view;
    return DeductionEngine::cc_sweep(store);
}

DeductionResult run_fixpoint(const LedgerView& view, const DeductionOptions& opts) {
    MarkStore store(view);
    std::vector<IterationStats> iterations;
    for (;;) {
        IterationStats st;
        for (Rule rule : opts.rules) {
            switch (rule) {
            case Rule::ZeroMixin:
                st.zmr += DeductionEngine::per_branch(
                    store, opts.threads, [&](BranchIndex b, auto& res) {
                        return DeductionEngine::zmr_sweep(store, b, res);
                    });
                break;
            case Rule::Intersection:
                st.ir += DeductionEngine::per_branch(
                    store, opts.threads, [&](BranchIndex b, auto& res) {
                        (void)res;
                        return DeductionEngine::ir_sweep(store, b);
                    });
                break;
            case Rule::CrossChain:
                st.cc += DeductionEngine::cc_sweep(store);
                break;
            }
        }
        iterations.push_back(st);
        if (st.total() == 0)
            break;
    }
    return DeductionResult{std::move(store), std::move(iterations)};
}

std::uint32_t effective_ringsize(const MarkStore& store, BranchIndex branch, KeyImageId ki) {
    InstanceIndex inst = store.view().instance_of(branch, ki);
    if (inst == kNone32)
        throw UnknownKeyImage("key image not present on branch " +
                              store.view().branch(branch).name);
    return store.candidate_count(inst);
}

void export_deduction(const DeductionResult& result, std::ostream& out) {
    const LedgerView& view = result.store.view();
    for (BranchIndex b = 0; b < view.branch_count(); ++b) {
        const Branch& br = view.branch(b);
        for (InstanceIndex i = br.first_instance; i < br.end_instance; ++i) {
            const Ring& ring = view.ring(view.instance(i).ring);
            out << "{\"key_image\":\"" << view.key_image_name(ring.key_image)
                << "\",\"branch\":\"" << br.name << "\",\"real\":";
            OutputUid real = result.store.resolved(ring.key_image);
            if (real == kNone32) {
                out << "null";
            } else {
                OutputRef ref = view.ref_of(real);
                out << "{\"amount\":" << ref.amount << ",\"index\":" << ref.index << "}";
            }
            out << ",\"candidates\":[";
            bool first = true;
            for (OutputUid uid : result.store.candidates(i)) {
                if (!first)
                    out << ',';
                first = false;
                OutputRef ref = view.ref_of(uid);
                out << "{\"amount\":" << ref.amount << ",\"index\":" << ref.index << "}";
            }
            out << "]}\n";
        }
    }
}

void export_spent_set(const DeductionResult& result, BranchIndex branch, std::ostream& out) {
    const LedgerView& view = result.store.view();
    // Attribution map for this branch: spent output -> resolving key image.
    std::unordered_map<OutputUid, KeyImageId> attributed;
    for (KeyImageId ki = 0; ki < view.key_image_count(); ++ki) {
        OutputUid real = result.store.resolved(ki);
        if (real != kNone32 && view.instance_of(branch, ki) != kNone32)
            attributed.emplace(real, ki);
    }
    for (OutputUid uid : result.store.spent_outputs(branch)) {
        OutputRef ref = view.ref_of(uid);
        out << "{\"amount\":" << ref.amount << ",\"index\":" << ref.index << ",\"key_image\":";
        auto it = attributed.find(uid);
        if (it == attributed.end() || result.store.is_spent_unattributed(branch, uid))
            out << "null";
        else
            out << '"' << view.key_image_name(it->second) << '"';
        out << "}\n";
    }
}

} // namespace ringtrace
