#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "ringtrace/deduction.hpp"
#include "ringtrace/heuristics.hpp"
#include "ringtrace/ingest.hpp"

namespace ringtrace {

/// Per-month traceability counts over nontrivial rings. Per-branch rows count
/// pre-fork rings on every branch carrying them; the "all" row counts each
/// ring once (at its origin branch).
struct MonthlyRow {
    int month = 0; // calendar key, see calendar.hpp
    std::string branch;
    std::uint64_t nontrivial_rings = 0;
    std::uint64_t traced_rings = 0;
    std::uint64_t mixin_members = 0;
    std::uint64_t real_members = 0;
    std::uint64_t spent_unattributed_members = 0;
    std::uint64_t members_total = 0;
};

struct ReportWindow {
    std::int64_t from = std::numeric_limits<std::int64_t>::min();
    std::int64_t to = std::numeric_limits<std::int64_t>::max(); // exclusive
};

/// Rows keyed by UTC month of the spending block, per branch plus "all".
/// Throws EmptyWindow when no block of any branch falls into the window.
std::vector<MonthlyRow> monthly_aggregate(const DeductionResult& result,
                                          const LedgerView& view, ReportWindow window = {});

/// Paired comparison of two rule sets (with vs without cross-chain analysis),
/// joined on (month, branch).
struct DeltaRow {
    int month = 0;
    std::string branch;
    std::uint64_t traced_with = 0, traced_without = 0;
    std::uint64_t mixin_with = 0, mixin_without = 0;
    std::uint64_t real_with = 0, real_without = 0;
};
std::vector<DeltaRow> delta_rows(const std::vector<MonthlyRow>& with_cc,
                                 const std::vector<MonthlyRow>& without_cc);

/// Ratio formatting: plain integers elsewhere, ratios with 4 decimals.
std::string format_ratio(double value);

void write_monthly_csv(const std::vector<MonthlyRow>& rows, std::ostream& out);
void write_delta_csv(const std::vector<DeltaRow>& rows, std::ostream& out);
void write_accuracy_csv(const std::vector<AccuracyRow>& rows, std::ostream& out);
void write_validation_csv(const ValidationReport& report, std::ostream& out);

} // namespace ringtrace
