#include "ringtrace/oracle.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

namespace ringtrace {
namespace {

struct DisjointSet {
    std::vector<std::uint32_t> parent;
    explicit DisjointSet(std::size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), 0u);
    }
    std::uint32_t find(std::uint32_t x) {
        while (parent[x] != x)
            x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(std::uint32_t a, std::uint32_t b) { parent[find(a)] = find(b); }
};

/// Backtracking search over one component. Key images carry their feasible
/// value lists; per-branch injectivity is the only cross constraint.
class ComponentSearch {
public:
    ComponentSearch(const LedgerView& view, std::vector<KeyImageId> kis,
                    const std::vector<std::vector<OutputUid>>& allowed,
                    std::uint64_t node_budget)
        : view_(view), kis_(std::move(kis)), node_budget_(node_budget) {
        // Fail-first: tightest key images first, id as tiebreak.
        std::sort(kis_.begin(), kis_.end(), [&](KeyImageId a, KeyImageId b) {
            if (allowed[a].size() != allowed[b].size())
                return allowed[a].size() < allowed[b].size();
            return a < b;
        });
        for (KeyImageId ki : kis_)
            values_.push_back(allowed[ki]);
        used_.resize(view.branch_count());
        assignment_.resize(kis_.size());
    }

    struct Stats {
        std::uint64_t count = 0;
        bool saturated = false;
        std::vector<std::unordered_set<OutputUid>> value_union; // per local ki
        std::vector<std::unordered_set<OutputUid>> forced;      // per branch
        bool any = false;
    };

    /// Full enumeration with a count cap. Value unions and forced sets are
    /// recomputed by satisfiability probes when the cap is hit, so they stay
    /// exact regardless of enumeration order.
    Stats enumerate(std::uint64_t max_count) {
        Stats st;
        st.value_union.resize(kis_.size());
        st.forced.resize(view_.branch_count());
        nodes_ = 0;
        enumerate_rec(0, max_count, st);
        if (!st.saturated)
            return st;
        for (std::size_t i = 0; i < kis_.size(); ++i) {
            st.value_union[i].clear();
            for (OutputUid v : values_[i])
                if (feasible(static_cast<std::uint32_t>(i), v, kNone32, 0))
                    st.value_union[i].insert(v);
        }
        for (BranchIndex b = 0; b < view_.branch_count(); ++b) {
            st.forced[b].clear();
            std::unordered_set<OutputUid> pool;
            for (std::uint32_t i = 0; i < kis_.size(); ++i)
                if (on_branch(i, b))
                    for (OutputUid v : values_[i])
                        pool.insert(v);
            for (OutputUid v : pool)
                if (!feasible(kNone32, 0, b, v))
                    st.forced[b].insert(v);
        }
        return st;
    }

    const std::vector<KeyImageId>& order() const { return kis_; }

private:
    bool on_branch(std::uint32_t local, BranchIndex b) const {
        const auto& brs = view_.ki_branches(kis_[local]);
        return std::find(brs.begin(), brs.end(), b) != brs.end();
    }

    void charge() {
        if (++nodes_ > node_budget_)
            throw TooLarge("oracle node budget exceeded (" + std::to_string(node_budget_) +
                           " nodes)");
    }

    void enumerate_rec(std::uint32_t depth, std::uint64_t max_count, Stats& st) {
        if (st.saturated)
            return;
        charge();
        if (depth == kis_.size()) {
            if (!st.any) {
                for (BranchIndex b = 0; b < view_.branch_count(); ++b)
                    st.forced[b] = used_[b];
                st.any = true;
            } else {
                for (BranchIndex b = 0; b < view_.branch_count(); ++b)
                    std::erase_if(st.forced[b],
                                  [&](OutputUid v) { return !used_[b].count(v); });
            }
            for (std::uint32_t i = 0; i < kis_.size(); ++i)
                st.value_union[i].insert(assignment_[i]);
            if (++st.count >= max_count)
                st.saturated = true;
            return;
        }
        const auto& branches = view_.ki_branches(kis_[depth]);
        for (OutputUid v : values_[depth]) {
            bool clash = false;
            for (BranchIndex b : branches)
                if (used_[b].count(v)) {
                    clash = true;
                    break;
                }
            if (clash)
                continue;
            for (BranchIndex b : branches)
                used_[b].insert(v);
            assignment_[depth] = v;
            enumerate_rec(depth + 1, max_count, st);
            for (BranchIndex b : branches)
                used_[b].erase(v);
            if (st.saturated)
                return;
        }
    }

    /// First-solution probe. When fixed_local != kNone32 that key image is
    /// pinned to fixed_value; when ban_branch != kNone32 no key image on that
    /// branch may take ban_value.
    bool feasible(std::uint32_t fixed_local, OutputUid fixed_value, BranchIndex ban_branch,
                  OutputUid ban_value) {
        for (auto& u : used_)
            u.clear();
        return feasible_rec(0, fixed_local, fixed_value, ban_branch, ban_value);
    }

    bool feasible_rec(std::uint32_t depth, std::uint32_t fixed_local, OutputUid fixed_value,
                      BranchIndex ban_branch, OutputUid ban_value) {
        charge();
        if (depth == kis_.size())
            return true;
        const auto& branches = view_.ki_branches(kis_[depth]);
        auto try_value = [&](OutputUid v) {
            if (ban_branch != kNone32 && v == ban_value && on_branch(depth, ban_branch))
                return false;
            for (BranchIndex b : branches)
                if (used_[b].count(v))
                    return false;
            for (BranchIndex b : branches)
                used_[b].insert(v);
            if (feasible_rec(depth + 1, fixed_local, fixed_value, ban_branch, ban_value))
                return true;
            for (BranchIndex b : branches)
                used_[b].erase(v);
            return false;
        };
        if (depth == fixed_local)
            return try_value(fixed_value);
        for (OutputUid v : values_[depth])
            if (try_value(v))
                return true;
        return false;
    }

    const LedgerView& view_;
    std::vector<KeyImageId> kis_;
    std::vector<std::vector<OutputUid>> values_;
    std::vector<std::unordered_set<OutputUid>> used_;
    std::vector<OutputUid> assignment_;
    std::uint64_t node_budget_ = 0;
    std::uint64_t nodes_ = 0;
};

} // namespace

OracleResult enumerate_assignments(const LedgerView& view, const OracleOptions& opts) {
    std::size_t n_ki = view.key_image_count();

    // Feasible value list per key image: intersection of its rings' members.
    std::vector<std::vector<OutputUid>> allowed(n_ki);
    for (KeyImageId ki = 0; ki < n_ki; ++ki) {
        bool first = true;
        std::vector<OutputUid> inter;
        std::vector<RingIndex> seen;
        for (BranchIndex b : view.ki_branches(ki)) {
            RingIndex ri = view.instance(view.instance_of(b, ki)).ring;
            if (std::find(seen.begin(), seen.end(), ri) != seen.end())
                continue;
            seen.push_back(ri);
            std::vector<OutputUid> m = view.ring(ri).members;
            std::sort(m.begin(), m.end());
            if (first) {
                inter = std::move(m);
                first = false;
            } else {
                std::vector<OutputUid> next;
                std::set_intersection(inter.begin(), inter.end(), m.begin(), m.end(),
                                      std::back_inserter(next));
                inter = std::move(next);
            }
        }
        if (inter.empty() && !view.ki_branches(ki).empty())
            throw Unsatisfiable("key image " + view.key_image_name(ki) +
                                " has an empty cross-ring intersection");
        allowed[ki] = std::move(inter);
    }

    // Components: key images interact when they share a branch and a value.
    DisjointSet dsu(n_ki);
    for (BranchIndex b = 0; b < view.branch_count(); ++b) {
        std::unordered_map<OutputUid, KeyImageId> first_with;
        for (KeyImageId ki = 0; ki < n_ki; ++ki) {
            const auto& brs = view.ki_branches(ki);
            if (std::find(brs.begin(), brs.end(), b) == brs.end())
                continue;
            for (OutputUid v : allowed[ki]) {
                auto [it, fresh] = first_with.emplace(v, ki);
                if (!fresh)
                    dsu.unite(ki, it->second);
            }
        }
    }
    std::unordered_map<std::uint32_t, std::vector<KeyImageId>> components;
    for (KeyImageId ki = 0; ki < n_ki; ++ki)
        components[dsu.find(ki)].push_back(ki);

    std::vector<std::vector<KeyImageId>> ordered;
    for (auto& [root, kis] : components)
        ordered.push_back(std::move(kis));
    std::sort(ordered.begin(), ordered.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });

    OracleResult result;
    result.candidates.resize(n_ki);
    result.forced_spent.resize(view.branch_count());

    unsigned __int128 total = 1;
    for (auto& kis : ordered) {
        if (kis.size() > opts.max_component_key_images)
            throw TooLarge("component with " + std::to_string(kis.size()) +
                           " key images exceeds the guard of " +
                           std::to_string(opts.max_component_key_images));
        ComponentSearch search(view, std::move(kis), allowed, opts.node_budget);
        auto st = search.enumerate(opts.max_assignments);
        if (st.count == 0)
            throw Unsatisfiable("component containing key image " +
                                view.key_image_name(search.order().front()) +
                                " admits no consistent assignment");
        result.saturated |= st.saturated;
        total *= st.count;
        if (total > opts.max_assignments) {
            total = opts.max_assignments;
            result.saturated = true;
        }
        const auto& order = search.order();
        for (std::size_t i = 0; i < order.size(); ++i) {
            auto& c = result.candidates[order[i]];
            c.assign(st.value_union[i].begin(), st.value_union[i].end());
            std::sort(c.begin(), c.end());
        }
        for (BranchIndex b = 0; b < view.branch_count(); ++b)
            for (OutputUid v : st.forced[b])
                result.forced_spent[b].push_back(v);
    }
    for (auto& f : result.forced_spent)
        std::sort(f.begin(), f.end());
    result.assignment_count = static_cast<std::uint64_t>(total);
    return result;
}

} // namespace ringtrace
