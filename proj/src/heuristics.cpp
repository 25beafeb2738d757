#include "ringtrace/heuristics.hpp"

#include <algorithm>
#include <map>

#include "ringtrace/calendar.hpp"
#include "ringtrace/simulator.hpp"

namespace ringtrace {

std::string_view heuristic_name(HeuristicId id) {
    return id == HeuristicId::GuessNewest ? "gnh" : "omh";
}

std::string_view basis_name(AggregationBasis b) {
    return b == AggregationBasis::InTime ? "in" : "out";
}

OutputUid guess_newest(const LedgerView& view, const Ring& ring, BranchIndex branch) {
    (void)view;
    (void)branch; // uid order is creation order on any branch containing the ring
    return *std::max_element(ring.members.begin(), ring.members.end());
}

std::vector<Guess> output_merging_guesses(const LedgerView& view, TxIndex tx_index,
                                          BranchIndex branch) {
    const Transaction& tx = view.transaction(tx_index);
    std::vector<Guess> out;
    if (tx.inputs.size() < 2)
        return out;

    // source tx -> (ring -> members from that source)
    std::map<TxIndex, std::map<RingIndex, std::vector<OutputUid>>> by_source;
    for (RingIndex ri : tx.inputs)
        for (OutputUid uid : view.ring(ri).members)
            by_source[view.output(uid).creating_tx][ri].push_back(uid);

    for (const auto& [source, ring_members] : by_source) {
        if (ring_members.size() < 2)
            continue;
        // Keep rings holding exactly one output of the source, then drop
        // members claimed by more than one ring.
        std::map<OutputUid, std::uint32_t> claims;
        for (const auto& [ri, members] : ring_members)
            if (members.size() == 1)
                ++claims[members.front()];
        std::vector<std::pair<RingIndex, OutputUid>> qualified;
        for (const auto& [ri, members] : ring_members)
            if (members.size() == 1 && claims[members.front()] == 1)
                qualified.emplace_back(ri, members.front());
        if (qualified.size() < 2)
            continue;
        for (auto [ri, uid] : qualified)
            out.push_back(Guess{view.ring(ri).key_image, branch, uid,
                                HeuristicId::OutputMerging});
    }
    return out;
}

std::vector<Guess> collect_gnh_guesses(const LedgerView& view) {
    std::vector<Guess> out;
    for (BranchIndex b = 0; b < view.branch_count(); ++b) {
        const Branch& br = view.branch(b);
        for (InstanceIndex i = br.first_instance; i < br.end_instance; ++i) {
            const Ring& ring = view.ring(view.instance(i).ring);
            if (!ring.nontrivial())
                continue;
            out.push_back(Guess{ring.key_image, b, guess_newest(view, ring, b),
                                HeuristicId::GuessNewest});
        }
    }
    return out;
}

std::vector<Guess> collect_omh_guesses(const LedgerView& view) {
    std::vector<Guess> out;
    for (BranchIndex b = 0; b < view.branch_count(); ++b)
        view.for_each_timeline_block(b, [&](BranchIndex, const Block& blk) {
            for (TxIndex ti : blk.txs) {
                if (view.transaction(ti).inputs.size() < 2)
                    continue;
                auto guesses = output_merging_guesses(view, ti, b);
                out.insert(out.end(), guesses.begin(), guesses.end());
            }
        });
    return out;
}

GroundTruthMap index_ground_truth(const LedgerView& view,
                                  const std::vector<TruthRecord>& records) {
    GroundTruthMap map;
    for (const TruthRecord& rec : records) {
        KeyImageId ki = view.key_image_id(rec.key_image);
        if (ki == kNone32)
            continue;
        map.real.emplace(ki, view.resolve(rec.real, view.branch_index(rec.branches.front())));
    }
    return map;
}

namespace {

enum class Verdict { TP, FP, Undecided };

template <typename Judge, typename RingsizeOf>
std::vector<AccuracyRow> evaluate_impl(const std::vector<Guess>& guesses,
                                       const LedgerView& view, AggregationBasis basis,
                                       Judge&& judge, RingsizeOf&& ringsize_of) {
    struct Bucket {
        std::uint64_t tp = 0, fp = 0, undecided = 0;
        double inverse_ringsize_sum = 0;
    };
    std::map<std::pair<int, HeuristicId>, Bucket> buckets;
    std::uint64_t decided_total = 0;

    for (const Guess& g : guesses) {
        InstanceIndex inst = view.instance_of(g.branch, g.key_image);
        const Ring& ring = view.ring(view.instance(inst).ring);
        int month = basis == AggregationBasis::InTime
                        ? month_key(ring.spend_time)
                        : month_key(view.output(g.guessed).created_at);
        Bucket& bucket = buckets[{month, g.heuristic}];
        switch (judge(g, inst)) {
        case Verdict::TP:
            ++bucket.tp;
            ++decided_total;
            bucket.inverse_ringsize_sum += 1.0 / ringsize_of(g, inst);
            break;
        case Verdict::FP:
            ++bucket.fp;
            ++decided_total;
            bucket.inverse_ringsize_sum += 1.0 / ringsize_of(g, inst);
            break;
        case Verdict::Undecided:
            ++bucket.undecided;
            break;
        }
    }
    if (decided_total == 0)
        throw EmptyEvaluation("no guess was decidable against the given truth");

    std::vector<AccuracyRow> rows;
    for (const auto& [key, bucket] : buckets) {
        AccuracyRow row;
        row.month = key.first;
        row.heuristic = key.second;
        row.basis = basis;
        row.tp = bucket.tp;
        row.fp = bucket.fp;
        row.undecided = bucket.undecided;
        std::uint64_t decided = bucket.tp + bucket.fp;
        row.accuracy = decided ? static_cast<double>(bucket.tp) / static_cast<double>(decided) : 0.0;
        row.baseline = decided ? bucket.inverse_ringsize_sum / static_cast<double>(decided) : 0.0;
        rows.push_back(row);
    }
    return rows;
}

} // namespace

std::vector<AccuracyRow> evaluate(const std::vector<Guess>& guesses,
                                  const GroundTruthMap& truth, const LedgerView& view,
                                  AggregationBasis basis) {
    return evaluate_impl(
        guesses, view, basis,
        [&](const Guess& g, InstanceIndex) {
            auto it = truth.real.find(g.key_image);
            if (it == truth.real.end())
                return Verdict::Undecided;
            return it->second == g.guessed ? Verdict::TP : Verdict::FP;
        },
        [&](const Guess& g, InstanceIndex inst) {
            (void)g;
            return static_cast<double>(
                view.ring(view.instance(inst).ring).members.size());
        });
}

std::vector<AccuracyRow> evaluate(const std::vector<Guess>& guesses,
                                  const DeductionResult& deduced, const LedgerView& view,
                                  AggregationBasis basis) {
    return evaluate_impl(
        guesses, view, basis,
        [&](const Guess& g, InstanceIndex inst) {
            OutputUid resolved = deduced.store.resolved(g.key_image);
            if (resolved != kNone32)
                return resolved == g.guessed ? Verdict::TP : Verdict::FP;
            const Ring& ring = view.ring(view.instance(inst).ring);
            auto it = std::find(ring.members.begin(), ring.members.end(), g.guessed);
            std::uint32_t idx = static_cast<std::uint32_t>(it - ring.members.begin());
            if (deduced.store.mark(inst, idx) == Mark::Mixin)
                return Verdict::FP;
            return Verdict::Undecided;
        },
        [&](const Guess& g, InstanceIndex inst) {
            (void)g;
            return static_cast<double>(deduced.store.candidate_count(inst));
        });
}

} // namespace ringtrace
