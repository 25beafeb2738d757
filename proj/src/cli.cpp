#include "ringtrace/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "ringtrace/calendar.hpp"
#include "ringtrace/deduction.hpp"
#include "ringtrace/heuristics.hpp"
#include "ringtrace/ingest.hpp"
#include "ringtrace/oracle.hpp"
#include "ringtrace/report.hpp"
#include "ringtrace/simulator.hpp"

namespace ringtrace {
namespace {

namespace fs = std::filesystem;

std::vector<Rule> parse_rules(const std::string& spec) {
    std::vector<Rule> rules;
    std::stringstream ss(spec);
    std::string token;
    while (std::getline(ss, token, ','))
        if (!token.empty())
            rules.push_back(rule_from_name(token));
    if (rules.empty())
        throw ConfigError("at least one rule is required");
    return rules;
}

LedgerView load_or_fail(const fs::path& spec_path, ValidationReport* report_out = nullptr) {
    BuildResult built = build_ledger(load_fork_spec(spec_path));
    if (!built.report.ok()) {
        for (const auto& v : built.report.violations)
            if (v.severity == Severity::Fatal)
                std::cerr << "fatal: " << v.rule << " at " << v.location << ": " << v.message
                          << "\n";
        throw Error("ledger validation failed with " +
                    std::to_string(built.report.fatal_count()) + " fatal violation(s)");
    }
    for (const auto& v : built.report.violations)
        std::cerr << "warning: " << v.rule << " at " << v.location << ": " << v.message << "\n";
    if (report_out)
        *report_out = built.report;
    return std::move(*built.view);
}


struct GlobalOptions {
    std::uint64_t seed = 0;
    bool seed_set = false;
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    std::string format = "csv";
};

int cmd_simulate(const fs::path& config_path, const fs::path& out_dir,
                 const GlobalOptions& global) {
    SimConfig cfg = load_sim_config(config_path);
    if (global.seed_set)
        cfg.seed = global.seed;
    SimOutputPaths paths = simulate_to_dir(cfg, out_dir);
    std::cout << "simulated " << paths.stats.rings << " rings, " << paths.stats.outputs
              << " outputs, " << paths.stats.redemptions << " redemptions ("
              << paths.stats.cross_chain_keys << " cross-chain key images, "
              << paths.stats.clamped_rings << " clamped rings)\n";
    std::cout << "fork spec: " << paths.fork_spec.string() << "\n";
    std::cout << "ground truth: " << paths.ground_truth.string() << "\n";
    return 0;
}

int cmd_analyze(const fs::path& spec_path, const std::string& rules_spec,
                const fs::path& out_dir, const GlobalOptions& global) {
    ValidationReport report;
    LedgerView view = load_or_fail(spec_path, &report);
    DeductionOptions opts;
    opts.rules = parse_rules(rules_spec);
    opts.threads = global.threads;
    DeductionResult result = run_fixpoint(view, opts);

    fs::create_directories(out_dir);
    {
        std::ofstream os(out_dir / "validation.csv", std::ios::binary);
        write_validation_csv(report, os);
    }
    {
        std::ofstream os(out_dir / "rings.jsonl", std::ios::binary);
        export_deduction(result, os);
    }
    std::uint64_t traced = 0, resolved = 0;
    for (BranchIndex b = 0; b < view.branch_count(); ++b) {
        const Branch& br = view.branch(b);
        std::ofstream os(out_dir / ("spent_" + br.name + ".jsonl"), std::ios::binary);
        export_spent_set(result, b, os);
        for (InstanceIndex i = br.first_instance; i < br.end_instance; ++i)
            if (view.ring(view.instance(i).ring).nontrivial() &&
                result.store.candidate_count(i) == 1)
                ++traced;
    }
    for (KeyImageId ki = 0; ki < view.key_image_count(); ++ki)
        resolved += result.store.resolved(ki) != kNone32;
    std::cout << "deduction finished after " << result.iteration_count() << " iterations: "
              << resolved << " key images resolved, " << traced
              << " traced nontrivial ring instances\n";
    std::cout << "results in " << out_dir.string() << "\n";
    return 0;
}

int cmd_evaluate(const fs::path& spec_path, const std::string& heuristic,
                 const std::string& truth, const fs::path& truth_file,
                 const std::string& basis_name_arg, const std::string& rules_spec,
                 const fs::path& out_dir, const GlobalOptions& global) {
    LedgerView view = load_or_fail(spec_path);
    std::vector<Guess> guesses = heuristic == "gnh" ? collect_gnh_guesses(view)
                                                    : collect_omh_guesses(view);
    AggregationBasis basis =
        basis_name_arg == "in" ? AggregationBasis::InTime : AggregationBasis::OutTime;

    std::vector<AccuracyRow> rows;
    if (truth == "ground") {
        std::ifstream is(truth_file);
        if (!is)
            throw Error("cannot open ground truth: " + truth_file.string());
        GroundTruthMap map = index_ground_truth(view, parse_ground_truth(is));
        rows = evaluate(guesses, map, view, basis);
    } else {
        DeductionOptions opts;
        opts.rules = parse_rules(rules_spec);
        opts.threads = global.threads;
        DeductionResult result = run_fixpoint(view, opts);
        rows = evaluate(guesses, result, view, basis);
    }

    fs::create_directories(out_dir);
    fs::path out = out_dir / ("accuracy_" + heuristic + "_" + basis_name_arg + ".csv");
    std::ofstream os(out, std::ios::binary);
    write_accuracy_csv(rows, os);
    std::cout << "evaluated " << guesses.size() << " guesses into " << out.string() << "\n";
    if (truth != "ground")
        std::cout << "note: accuracy is estimated from deduction-traced rings only; "
                     "that sample is small and selection-biased for recent months\n";
    return 0;
}

int cmd_report(const fs::path& spec_path, const std::string& from, const std::string& to,
               const std::string& rules_spec, const fs::path& out_dir,
               const GlobalOptions& global) {
    LedgerView view = load_or_fail(spec_path);
    ReportWindow window;
    if (!from.empty())
        window.from = parse_date(from);
    if (!to.empty())
        window.to = parse_date(to) + 86400; // inclusive end date

    DeductionOptions with_cc;
    with_cc.rules = parse_rules(rules_spec);
    with_cc.threads = global.threads;
    DeductionOptions without_cc = with_cc;
    std::erase(without_cc.rules, Rule::CrossChain);

    DeductionResult full = run_fixpoint(view, with_cc);
    auto monthly = monthly_aggregate(full, view, window);

    fs::create_directories(out_dir);
    {
        std::ofstream os(out_dir / "monthly.csv", std::ios::binary);
        write_monthly_csv(monthly, os);
    }
    if (!without_cc.rules.empty()) {
        DeductionResult reduced = run_fixpoint(view, without_cc);
        auto reduced_monthly = monthly_aggregate(reduced, view, window);
        std::ofstream os(out_dir / "delta.csv", std::ios::binary);
        write_delta_csv(delta_rows(monthly, reduced_monthly), os);
    }
    std::cout << "wrote " << (out_dir / "monthly.csv").string() << "\n";
    return 0;
}

int cmd_oracle(const fs::path& spec_path, std::uint32_t max_component,
               std::uint64_t max_assignments) {
    LedgerView view = load_or_fail(spec_path);
    OracleOptions opts;
    opts.max_component_key_images = max_component;
    opts.max_assignments = max_assignments;
    OracleResult result = enumerate_assignments(view, opts);
    std::cout << "assignments: " << result.assignment_count
              << (result.saturated ? "+ (saturated)" : "") << "\n";
    for (KeyImageId ki = 0; ki < view.key_image_count(); ++ki) {
        std::cout << view.key_image_name(ki) << ":";
        for (OutputUid uid : result.candidates[ki]) {
            OutputRef ref = view.ref_of(uid);
            std::cout << " (" << ref.amount << "," << ref.index << ")";
        }
        if (result.traced(ki))
            std::cout << " [traced]";
        std::cout << "\n";
    }
    for (BranchIndex b = 0; b < view.branch_count(); ++b)
        std::cout << "forced spent on " << view.branch(b).name << ": "
                  << result.forced_spent[b].size() << "\n";
    return 0;
}

} // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"traceability analysis for ring-signature ledgers"};
    app.require_subcommand(1);

    GlobalOptions global;
    app.add_option("--seed", global.seed, "override the simulation seed")
        ->each([&](const std::string&) { global.seed_set = true; });
    app.add_option("--threads", global.threads, "engine parallelism (default: all cores)");
    app.add_option("--format", global.format, "output format")
        ->check(CLI::IsMember({"csv"}));

    std::string config_path, spec_path, out_dir = ".";
    std::string rules_spec = "zmr,cc,ir";
    std::string heuristic = "gnh", truth = "ground", truth_file, basis = "in";
    std::string from_date, to_date;
    bool monthly_flag = false;
    std::uint32_t max_component = 12;
    std::uint64_t max_assignments = 1000000;

    CLI::App* sim = app.add_subcommand("simulate", "generate a synthetic ledger");
    sim->add_option("--config", config_path, "simulation config file")->required();
    sim->add_option("--out", out_dir, "output directory")->required();

    auto rules_check = CLI::Validator(
        [](std::string& value) -> std::string {
            std::stringstream ss(value);
            std::string token;
            while (std::getline(ss, token, ','))
                if (token != "zmr" && token != "ir" && token != "cc")
                    return "unknown rule: " + token + " (expected zmr, ir or cc)";
            return {};
        },
        "RULES");

    CLI::App* analyze = app.add_subcommand("analyze", "run deduction rules to a fixpoint");
    analyze->add_option("--spec", spec_path, "fork spec file")->required();
    analyze->add_option("--rules", rules_spec, "ordered rule subset (zmr,ir,cc)")
        ->check(rules_check);
    analyze->add_option("--out", out_dir, "output directory")->required();

    CLI::App* evaluate_cmd = app.add_subcommand("evaluate", "score a guessing heuristic");
    evaluate_cmd->add_option("--spec", spec_path, "fork spec file")->required();
    evaluate_cmd->add_option("--heuristic", heuristic, "gnh or omh")
        ->check(CLI::IsMember({"gnh", "omh"}));
    evaluate_cmd->add_option("--truth", truth, "ground or deduced")
        ->check(CLI::IsMember({"ground", "deduced"}));
    evaluate_cmd->add_option("--truth-file", truth_file, "ground truth file (for --truth ground)");
    evaluate_cmd->add_option("--basis", basis, "aggregation basis: in or out")
        ->check(CLI::IsMember({"in", "out"}));
    evaluate_cmd->add_option("--rules", rules_spec, "rules for --truth deduced")
        ->check(rules_check);
    evaluate_cmd->add_option("--out", out_dir, "output directory")->required();

    CLI::App* report = app.add_subcommand("report", "monthly traceability tables");
    report->add_option("--spec", spec_path, "fork spec file")->required();
    report->add_option("--from", from_date, "window start (YYYY-MM-DD, UTC)");
    report->add_option("--to", to_date, "window end (YYYY-MM-DD, inclusive)");
    report->add_flag("--monthly", monthly_flag, "monthly aggregation (default)");
    report->add_option("--rules", rules_spec, "ordered rule subset")->check(rules_check);
    report->add_option("--out", out_dir, "output directory")->required();

    CLI::App* oracle = app.add_subcommand("oracle", "exhaustive small-instance enumeration");
    oracle->add_option("--spec", spec_path, "fork spec file")->required();
    oracle->add_option("--max-component", max_component, "component size guard");
    oracle->add_option("--max-assignments", max_assignments, "enumeration cap");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
            app.exit(e);
            return 0; // --help
        }
        std::cerr << e.what() << "\n" << app.help() << "\n";
        return 2;
    }

    if (evaluate_cmd->parsed() && truth == "ground" && truth_file.empty()) {
        std::cerr << "--truth ground requires --truth-file\n" << evaluate_cmd->help() << "\n";
        return 2;
    }

    try {
        if (sim->parsed())
            return cmd_simulate(config_path, out_dir, global);
        if (analyze->parsed())
            return cmd_analyze(spec_path, rules_spec, out_dir, global);
        if (evaluate_cmd->parsed())
            return cmd_evaluate(spec_path, heuristic, truth, truth_file, basis, rules_spec,
                                out_dir, global);
        if (report->parsed())
            return cmd_report(spec_path, from_date, to_date, rules_spec, out_dir, global);
        if (oracle->parsed())
            return cmd_oracle(spec_path, max_component, max_assignments);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

} // namespace ringtrace
