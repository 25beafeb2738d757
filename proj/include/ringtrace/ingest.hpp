#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ringtrace/ledger.hpp"

namespace ringtrace {

// ---- raw (pre-validation) block model, one JSON object per line ----

struct RawRef {
    Amount amount = 0;
    std::uint32_t index = 0;
};

struct RawRing {
    std::string key_image;
    std::vector<RawRef> members;
};

struct RawOutput {
    Amount amount = 0;
};

struct RawTx {
    std::string hash;
    bool coinbase = false;
    std::vector<RawRing> inputs;
    std::vector<RawOutput> outputs;
};

struct RawBlock {
    std::uint32_t height = 0;
    std::int64_t timestamp = 0;
    std::vector<RawTx> txs;
    std::size_t line = 0; // 1-based source line, 0 when synthesized
};

/// Parses a line-oriented branch ledger stream. Blocks come back in file
/// order; heights must be consecutive from the first block's height.
/// Throws SyntaxError, HeightGap or DuplicateField.
std::vector<RawBlock> parse_branch_file(std::istream& in);
std::vector<RawBlock> parse_branch_text(std::string_view text);

/// Serializes one block as a single JSON line (no trailing newline).
std::string block_to_json_line(const RawBlock& block);

// ---- fork specification ----

struct BranchDesc {
    std::string name;
    std::filesystem::path file;
    std::optional<std::string> parent;
    std::optional<std::uint32_t> fork_height;
};

struct ForkSpec {
    std::vector<BranchDesc> branches;
};

/// Loads a fork spec file; relative branch file paths are resolved against
/// the spec file's directory. Throws ConfigError on structural problems
/// (no unique root, unknown parent, missing/invalid fork height, ...).
ForkSpec load_fork_spec(const std::filesystem::path& path);

// ---- validation report ----

struct BranchCounts {
    std::uint64_t blocks = 0;
    std::uint64_t transactions = 0;
    std::uint64_t coinbase_txs = 0;
    std::uint64_t outputs = 0;
    std::uint64_t rings = 0;
    std::uint64_t nontrivial_rings = 0;
    std::uint64_t ring_members = 0;
};

enum class Severity { Warning, Fatal };

struct Violation {
    Severity severity = Severity::Fatal;
    std::string rule;     // e.g. "DuplicateKeyImageOnBranch"
    std::string location; // "branch:height" or "branch:line N"
    std::string message;
};

struct ValidationReport {
    struct PerBranch {
        std::string branch;
        BranchCounts own;   // data unique to this branch's file
        BranchCounts total; // full timeline including the shared prefix
    };
    std::vector<PerBranch> branches;
    std::vector<Violation> violations;

    bool ok() const {
        for (const auto& v : violations)
            if (v.severity == Severity::Fatal)
                return false;
        return true;
    }
    std::size_t fatal_count() const {
        std::size_t n = 0;
        for (const auto& v : violations)
            n += v.severity == Severity::Fatal;
        return n;
    }
};

struct BuildResult {
    std::optional<LedgerView> view; // engaged only when report.ok()
    ValidationReport report;
};

/// Parses all branch files and assembles a validated LedgerView.
/// Uid assignment is deterministic: shared prefix first, then per branch
/// in spec order.
BuildResult build_ledger(const ForkSpec& spec);

/// Same as build_ledger but with in-memory file contents (tests, simulator).
struct BranchBuffer {
    std::string name;
    std::optional<std::string> parent;
    std::optional<std::uint32_t> fork_height;
    std::string content;
};
BuildResult build_ledger_from_buffers(const std::vector<BranchBuffer>& branches);

/// Convenience wrapper: throws Error with the first fatal violation.
LedgerView load_ledger(const std::filesystem::path& fork_spec_path);

/// Writes a branch back to the line-oriented file format (own blocks only).
void export_branch(const LedgerView& view, BranchIndex b, std::ostream& out);

} // namespace ringtrace
