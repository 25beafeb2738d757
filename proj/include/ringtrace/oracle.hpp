#pragma once

#include <cstdint>
#include <vector>

#include "ringtrace/ledger.hpp"

namespace ringtrace {

struct OracleOptions {
    std::uint32_t max_component_key_images = 12;
    std::uint64_t max_assignments = 1'000'000; // count cap; sets stay exact
    std::uint64_t node_budget = 20'000'000;    // search-tree guard per component
};

struct OracleResult {
    std::uint64_t assignment_count = 0;
    bool saturated = false; // count hit the cap; candidate/forced sets are still exact
    std::vector<std::vector<OutputUid>> candidates;   // per key image, sorted
    std::vector<std::vector<OutputUid>> forced_spent; // per branch, sorted

    bool traced(KeyImageId ki) const { return candidates[ki].size() == 1; }
};

/// Exhaustive reference deduction: enumerates every assignment of key images
/// to spent outputs that (a) picks each value from the intersection of the
/// key image's rings and (b) is injective per branch. Decomposes into
/// connected components first. Throws TooLarge when a component exceeds the
/// guard or the node budget, Unsatisfiable when no assignment exists.
OracleResult enumerate_assignments(const LedgerView& view, const OracleOptions& opts = {});

} // namespace ringtrace
