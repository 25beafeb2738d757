#include "ringtrace/report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <ostream>

#include "ringtrace/calendar.hpp"

namespace ringtrace {
namespace {

struct Tally {
    std::uint64_t nontrivial = 0, traced = 0, mixin = 0, real = 0, unattributed = 0,
                  members = 0;
};

void add_instance(Tally& t, const MarkStore& store, const LedgerView& view,
                  InstanceIndex inst) {
    const RingInstance& ri = view.instance(inst);
    const Ring& ring = view.ring(ri.ring);
    if (!ring.nontrivial())
        return;
    std::uint32_t n = static_cast<std::uint32_t>(ring.members.size());
    std::uint32_t cands = store.candidate_count(inst);
    t.nontrivial += 1;
    t.traced += cands == 1;
    t.mixin += n - cands;
    t.members += n;
    for (std::uint32_t m = 0; m < n; ++m) {
        Mark mk = store.mark(inst, m);
        t.real += mk == Mark::Real;
        t.unattributed += mk == Mark::Unknown &&
                          store.is_spent_unattributed(ri.branch, ring.members[m]);
    }
}

} // namespace

std::vector<MonthlyRow> monthly_aggregate(const DeductionResult& result,
                                          const LedgerView& view, ReportWindow window) {
    const MarkStore& store = result.store;

    bool any_block = false;
    for (const Branch& br : view.branches())
        for (const Block& blk : br.blocks)
            if (blk.timestamp >= window.from && blk.timestamp < window.to)
                any_block = true;
    if (!any_block)
        throw EmptyWindow("no block falls inside the report window");

    // (month, branch column index) -> tally; branch_count() is the "all" column.
    std::map<std::pair<int, std::size_t>, Tally> buckets;
    for (BranchIndex b = 0; b < view.branch_count(); ++b) {
        const Branch& br = view.branch(b);
        for (InstanceIndex i = br.first_instance; i < br.end_instance; ++i) {
            const Ring& ring = view.ring(view.instance(i).ring);
            if (ring.spend_time < window.from || ring.spend_time >= window.to)
                continue;
            int month = month_key(ring.spend_time);
            add_instance(buckets[{month, b}], store, view, i);
            // Unique-ring view: attribute each ring once, at its origin.
            if (ring.origin_branch == b)
                add_instance(buckets[{month, view.branch_count()}], store, view, i);
        }
    }

    std::vector<MonthlyRow> rows;
    for (const auto& [key, t] : buckets) {
        MonthlyRow row;
        row.month = key.first;
        row.branch = key.second == view.branch_count() ? "all" : view.branch(key.second).name;
        row.nontrivial_rings = t.nontrivial;
        row.traced_rings = t.traced;
        row.mixin_members = t.mixin;
        row.real_members = t.real;
        row.spent_unattributed_members = t.unattributed;
        row.members_total = t.members;
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<DeltaRow> delta_rows(const std::vector<MonthlyRow>& with_cc,
                                 const std::vector<MonthlyRow>& without_cc) {
    std::map<std::pair<int, std::string>, DeltaRow> joined;
    for (const MonthlyRow& r : with_cc) {
        DeltaRow& d = joined[{r.month, r.branch}];
        d.month = r.month;
        d.branch = r.branch;
        d.traced_with = r.traced_rings;
        d.mixin_with = r.mixin_members;
        d.real_with = r.real_members;
    }
    for (const MonthlyRow& r : without_cc) {
        DeltaRow& d = joined[{r.month, r.branch}];
        d.month = r.month;
        d.branch = r.branch;
        d.traced_without = r.traced_rings;
        d.mixin_without = r.mixin_members;
        d.real_without = r.real_members;
    }
    std::vector<DeltaRow> rows;
    for (auto& [key, d] : joined)
        rows.push_back(std::move(d));
    return rows;
}

std::string format_ratio(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", value);
    return buf;
}

void write_monthly_csv(const std::vector<MonthlyRow>& rows, std::ostream& out) {
    out << "month,branch,nontrivial_rings,traced_rings,mixin_members,real_members,"
           "spent_unattributed_members,members_total\n";
    for (const MonthlyRow& r : rows)
        out << month_string(r.month) << ',' << r.branch << ',' << r.nontrivial_rings << ','
            << r.traced_rings << ',' << r.mixin_members << ',' << r.real_members << ','
            << r.spent_unattributed_members << ',' << r.members_total << '\n';
}

void write_delta_csv(const std::vector<DeltaRow>& rows, std::ostream& out) {
    out << "month,branch,traced_with_cc,traced_without_cc,mixin_with_cc,mixin_without_cc,"
           "real_with_cc,real_without_cc\n";
    for (const DeltaRow& r : rows)
        out << month_string(r.month) << ',' << r.branch << ',' << r.traced_with << ','
            << r.traced_without << ',' << r.mixin_with << ',' << r.mixin_without << ','
            << r.real_with << ',' << r.real_without << '\n';
}

void write_accuracy_csv(const std::vector<AccuracyRow>& rows, std::ostream& out) {
    out << "month,heuristic,basis,tp,fp,undecided,accuracy,baseline\n";
    for (const AccuracyRow& r : rows)
        out << month_string(r.month) << ',' << heuristic_name(r.heuristic) << ','
            << basis_name(r.basis) << ',' << r.tp << ',' << r.fp << ',' << r.undecided << ','
            << format_ratio(r.accuracy) << ',' << format_ratio(r.baseline) << '\n';
}

void write_validation_csv(const ValidationReport& report, std::ostream& out) {
    out << "branch,scope,blocks,transactions,coinbase_txs,outputs,rings,nontrivial_rings,"
           "ring_members\n";
    for (const auto& pb : report.branches) {
        auto line = [&](const char* scope, const BranchCounts& c) {
            out << pb.branch << ',' << scope << ',' << c.blocks << ',' << c.transactions
                << ',' << c.coinbase_txs << ',' << c.outputs << ',' << c.rings << ','
                << c.nontrivial_rings << ',' << c.ring_members << '\n';
        };
        line("own", pb.own);
        line("total", pb.total);
    }
}

} // namespace ringtrace
