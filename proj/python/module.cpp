#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <fstream>
#include <sstream>

#include "ringtrace/calendar.hpp"
#include "ringtrace/cli.hpp"
#include "ringtrace/deduction.hpp"
#include "ringtrace/heuristics.hpp"
#include "ringtrace/ingest.hpp"
#include "ringtrace/oracle.hpp"
#include "ringtrace/report.hpp"
#include "ringtrace/simulator.hpp"

namespace py = pybind11;
using namespace ringtrace;

namespace {

std::vector<Rule> rules_from_names(const std::vector<std::string>& names) {
    std::vector<Rule> rules;
    for (const auto& n : names)
        rules.push_back(rule_from_name(n));
    return rules;
}

py::dict ring_to_dict(const LedgerView& view, const Ring& ring) {
    py::dict d;
    d["key_image"] = view.key_image_name(ring.key_image);
    d["members"] = ring.members;
    d["height"] = ring.height;
    d["spend_time"] = ring.spend_time;
    py::list branches;
    for (BranchIndex b : ring.branches)
        branches.append(view.branch(b).name);
    d["branches"] = branches;
    return d;
}

py::dict counts_to_dict(const BranchCounts& c) {
    py::dict d;
    d["blocks"] = c.blocks;
    d["transactions"] = c.transactions;
    d["coinbase_txs"] = c.coinbase_txs;
    d["outputs"] = c.outputs;
    d["rings"] = c.rings;
    d["nontrivial_rings"] = c.nontrivial_rings;
    d["ring_members"] = c.ring_members;
    return d;
}

GroundTruthMap load_truth(const LedgerView& view, const std::string& path) {
    std::ifstream is(path);
    if (!is)
        throw Error("cannot open ground truth: " + path);
    return index_ground_truth(view, parse_ground_truth(is));
}

py::list rows_to_list(const std::vector<AccuracyRow>& rows) {
    py::list out;
    for (const auto& r : rows) {
        py::dict d;
        d["month"] = month_string(r.month);
        d["heuristic"] = std::string(heuristic_name(r.heuristic));
        d["basis"] = std::string(basis_name(r.basis));
        d["tp"] = r.tp;
        d["fp"] = r.fp;
        d["undecided"] = r.undecided;
        d["accuracy"] = r.accuracy;
        d["baseline"] = r.baseline;
        out.append(d);
    }
    return out;
}

} // namespace

PYBIND11_MODULE(ringtrace, m) {
    m.doc() = "traceability analysis for ring-signature ledgers";

    py::register_exception<Error>(m, "LedgerError");

    py::class_<LedgerView>(m, "LedgerView")
        .def("branches",
             [](const LedgerView& v) {
                 std::vector<std::string> names;
                 for (const Branch& b : v.branches())
                     names.push_back(b.name);
                 return names;
             })
        .def("output_count", [](const LedgerView& v) { return v.outputs().size(); })
        .def("ring_count", [](const LedgerView& v) { return v.rings().size(); })
        .def("key_images",
             [](const LedgerView& v) {
                 std::vector<std::string> out;
                 for (KeyImageId k = 0; k < v.key_image_count(); ++k)
                     out.push_back(v.key_image_name(k));
                 return out;
             })
        .def(
            "resolve",
            [](const LedgerView& v, const std::string& branch, Amount amount,
               std::uint32_t index) {
                return v.resolve(OutputRef{amount, index}, v.branch_index(branch));
            },
            py::arg("branch"), py::arg("amount"), py::arg("index"),
            "Resolve an (amount, index) reference to its output uid.")
        .def(
            "ref_of",
            [](const LedgerView& v, OutputUid uid) {
                OutputRef r = v.ref_of(uid);
                return py::make_tuple(r.amount, r.index);
            },
            py::arg("uid"))
        .def(
            "rings_for_key_image",
            [](const LedgerView& v, const std::string& hex) {
                py::list out;
                for (auto [b, ring] : v.rings_for_key_image(hex))
                    out.append(py::make_tuple(v.branch(b).name, ring_to_dict(v, *ring)));
                return out;
            },
            py::arg("key_image"));

    py::class_<DeductionResult>(m, "DeductionResult")
        .def("iterations", [](const DeductionResult& r) { return r.iteration_count(); })
        .def("resolved",
             [](const DeductionResult& r) {
                 py::dict out;
                 const LedgerView& view = r.store.view();
                 for (KeyImageId k = 0; k < view.key_image_count(); ++k)
                     if (r.store.resolved(k) != kNone32)
                         out[py::str(view.key_image_name(k))] = r.store.resolved(k);
                 return out;
             })
        .def(
            "candidates",
            [](const DeductionResult& r, const std::string& branch, const std::string& ki) {
                const LedgerView& view = r.store.view();
                KeyImageId id = view.key_image_id(ki);
                if (id == kNone32)
                    throw UnknownKeyImage("unknown key image: " + ki);
                InstanceIndex inst = view.instance_of(view.branch_index(branch), id);
                if (inst == kNone32)
                    throw UnknownKeyImage("key image not on branch " + branch);
                auto cands = r.store.candidates(inst);
                std::sort(cands.begin(), cands.end());
                return cands;
            },
            py::arg("branch"), py::arg("key_image"))
        .def(
            "effective_ringsize",
            [](const DeductionResult& r, const std::string& branch, const std::string& ki) {
                const LedgerView& view = r.store.view();
                KeyImageId id = view.key_image_id(ki);
                if (id == kNone32)
                    throw UnknownKeyImage("unknown key image: " + ki);
                return effective_ringsize(r.store, view.branch_index(branch), id);
            },
            py::arg("branch"), py::arg("key_image"))
        .def(
            "spent",
            [](const DeductionResult& r, const std::string& branch) {
                return r.store.spent_outputs(r.store.view().branch_index(branch));
            },
            py::arg("branch"))
        .def(
            "spent_unattributed",
            [](const DeductionResult& r, const std::string& branch) {
                return r.store.spent_unattributed(r.store.view().branch_index(branch));
            },
            py::arg("branch"));

    m.def("load_ledger", &load_ledger, py::arg("fork_spec"),
          "Ingest a fork spec and its branch files into a ledger view.");

    m.def(
        "validate",
        [](const std::string& fork_spec) {
            BuildResult r = build_ledger(load_fork_spec(fork_spec));
            py::dict out;
            out["ok"] = r.report.ok();
            py::list violations;
            for (const auto& v : r.report.violations) {
                py::dict d;
                d["severity"] = v.severity == Severity::Fatal ? "fatal" : "warning";
                d["rule"] = v.rule;
                d["location"] = v.location;
                d["message"] = v.message;
                violations.append(d);
            }
            out["violations"] = violations;
            py::dict branches;
            for (const auto& pb : r.report.branches) {
                py::dict scoped;
                scoped["own"] = counts_to_dict(pb.own);
                scoped["total"] = counts_to_dict(pb.total);
                branches[py::str(pb.branch)] = scoped;
            }
            out["branches"] = branches;
            return out;
        },
        py::arg("fork_spec"), "Parse and validate without building; returns the report.");

    m.def(
        "run_deduction",
        [](const LedgerView& view, const std::vector<std::string>& rules, unsigned threads) {
            DeductionOptions opts;
            opts.rules = rules_from_names(rules);
            opts.threads = threads;
            return run_fixpoint(view, opts);
        },
        py::arg("view"), py::arg("rules") = std::vector<std::string>{"zmr", "cc", "ir"},
        py::arg("threads") = 1, py::keep_alive<0, 1>(),
        "Run the deduction rules to a fixpoint.");

    m.def(
        "simulate",
        [](const std::string& config_path, const std::string& out_dir) {
            SimOutputPaths paths = simulate_to_dir(load_sim_config(config_path), out_dir);
            py::dict out;
            py::list files;
            for (const auto& p : paths.branch_files)
                files.append(p.string());
            out["branch_files"] = files;
            out["fork_spec"] = paths.fork_spec.string();
            out["ground_truth"] = paths.ground_truth.string();
            out["rings"] = paths.stats.rings;
            out["outputs"] = paths.stats.outputs;
            out["redemptions"] = paths.stats.redemptions;
            out["cross_chain_keys"] = paths.stats.cross_chain_keys;
            return out;
        },
        py::arg("config"), py::arg("out_dir"),
        "Generate a synthetic ledger with ground truth.");

    m.def(
        "evaluate_heuristic",
        [](const LedgerView& view, const std::string& heuristic,
           const std::string& truth_path, const std::string& basis) {
            auto guesses = heuristic == "gnh" ? collect_gnh_guesses(view)
                                              : collect_omh_guesses(view);
            AggregationBasis b =
                basis == "in" ? AggregationBasis::InTime : AggregationBasis::OutTime;
            return rows_to_list(evaluate(guesses, load_truth(view, truth_path), view, b));
        },
        py::arg("view"), py::arg("heuristic"), py::arg("truth_file"), py::arg("basis") = "in",
        "Score gnh/omh guesses against a simulator ground-truth file.");

    m.def(
        "oracle",
        [](const LedgerView& view, std::uint32_t max_component,
           std::uint64_t max_assignments) {
            OracleOptions opts;
            opts.max_component_key_images = max_component;
            opts.max_assignments = max_assignments;
            OracleResult r = enumerate_assignments(view, opts);
            py::dict out;
            out["assignments"] = r.assignment_count;
            out["saturated"] = r.saturated;
            py::dict cands;
            for (KeyImageId k = 0; k < view.key_image_count(); ++k)
                cands[py::str(view.key_image_name(k))] = r.candidates[k];
            out["candidates"] = cands;
            py::dict forced;
            for (BranchIndex b = 0; b < view.branch_count(); ++b)
                forced[py::str(view.branch(b).name)] = r.forced_spent[b];
            out["forced_spent"] = forced;
            return out;
        },
        py::arg("view"), py::arg("max_component") = 12,
        py::arg("max_assignments") = 1000000,
        "Exhaustive assignment enumeration for small instances.");

    m.def(
        "monthly_report",
        [](const DeductionResult& result) {
            py::list out;
            for (const MonthlyRow& r : monthly_aggregate(result, result.store.view())) {
                py::dict d;
                d["month"] = month_string(r.month);
                d["branch"] = r.branch;
                d["nontrivial_rings"] = r.nontrivial_rings;
                d["traced_rings"] = r.traced_rings;
                d["mixin_members"] = r.mixin_members;
                d["real_members"] = r.real_members;
                d["spent_unattributed_members"] = r.spent_unattributed_members;
                d["members_total"] = r.members_total;
                out.append(d);
            }
            return out;
        },
        py::arg("result"), "Monthly traceability rows over nontrivial rings.");

    m.def("run_cli", &run_cli, py::arg("args"),
          "Invoke the command-line interface; returns its exit code.");
}
