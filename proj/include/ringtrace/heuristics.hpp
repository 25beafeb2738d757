#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "ringtrace/deduction.hpp"
#include "ringtrace/ledger.hpp"

namespace ringtrace {

enum class HeuristicId { GuessNewest, OutputMerging };
enum class AggregationBasis { InTime, OutTime };

std::string_view heuristic_name(HeuristicId id);   // "gnh" / "omh"
std::string_view basis_name(AggregationBasis b);   // "in" / "out"

struct Guess {
    KeyImageId key_image = kNone32;
    BranchIndex branch = 0;
    OutputUid guessed = kNone32;
    HeuristicId heuristic = HeuristicId::GuessNewest;
};

/// The member created last on the branch's timeline (block height, then
/// intra-block order). Depends only on the member set, not its order.
OutputUid guess_newest(const LedgerView& view, const Ring& ring, BranchIndex branch);

/// Guesses for one transaction: for every source transaction whose outputs
/// appear in >=2 of the tx's rings (distinct outputs, one per ring), each such
/// ring is guessed to spend its member from that source. Rings with two
/// members from one source, or rings duplicating another ring's member, are
/// ambiguous and yield no guess.
std::vector<Guess> output_merging_guesses(const LedgerView& view, TxIndex tx,
                                          BranchIndex branch);

/// One guess per (branch, nontrivial ring) instance.
std::vector<Guess> collect_gnh_guesses(const LedgerView& view);
/// Guesses over every (branch, tx with >=2 inputs) instance.
std::vector<Guess> collect_omh_guesses(const LedgerView& view);

struct AccuracyRow {
    int month = 0;           // month key; see calendar.hpp
    HeuristicId heuristic = HeuristicId::GuessNewest;
    AggregationBasis basis = AggregationBasis::InTime;
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t undecided = 0;
    double accuracy = 0;  // tp / (tp + fp)
    double baseline = 0;  // mean 1/ringsize over decided guesses
};

/// Ground-truth lookup built from simulator records.
struct GroundTruthMap {
    std::unordered_map<KeyImageId, OutputUid> real;
};

struct TruthRecord;
GroundTruthMap index_ground_truth(const LedgerView& view,
                                  const std::vector<TruthRecord>& records);

/// Accuracy rows against exact ground truth (zero undecided when the truth
/// covers all guessed key images). Baseline uses nominal ring sizes.
std::vector<AccuracyRow> evaluate(const std::vector<Guess>& guesses,
                                  const GroundTruthMap& truth, const LedgerView& view,
                                  AggregationBasis basis);

/// Accuracy rows against deduction results (the estimator the traced-ring
/// methodology gives): TP/FP where the key image resolved or the guessed
/// member was struck as mixin, undecided otherwise. Baseline uses effective
/// ring sizes.
std::vector<AccuracyRow> evaluate(const std::vector<Guess>& guesses,
                                  const DeductionResult& deduced, const LedgerView& view,
                                  AggregationBasis basis);

} // namespace ringtrace
