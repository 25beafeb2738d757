#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "ringtrace/ingest.hpp"
#include "ringtrace/ledger.hpp"

namespace ringtrace {

/// Discrete distribution knob used for per-block/per-tx counts.
struct CountDist {
    enum class Kind { Fixed, Uniform, Poisson } kind = Kind::Fixed;
    double a = 1; // Fixed: value; Uniform: lo; Poisson: mean
    double b = 0; // Uniform: hi
};

struct RingsizePolicy {
    enum class Kind { Fixed, Minimum } kind = Kind::Fixed;
    std::uint32_t n = 11;
    double extra_p = 0.5; // Minimum: geometric tail over the minimum
};

struct SpendAgeModel {
    enum class Kind { LogNormal, MatchDecoy } kind = Kind::LogNormal;
    double median_days = 2.0;
    double sigma = 1.0; // log-space standard deviation
};

struct DecoyRegime {
    enum class Kind { Uniform, Triangular, RecentZone, Gamma } kind = Kind::Uniform;
    // RecentZone parameters.
    double recent_q = 0.5;
    double recent_window_days = 1.8;
    Kind base = Kind::Uniform; // regime outside the zone
    // Gamma over ln(age in seconds).
    double gamma_shape = 19.28;
    double gamma_scale = 1.0 / 1.61;
};

enum class ValueModel { Confidential, Denominated };

struct ForkPlan {
    std::string name;
    std::uint32_t fork_height = 0;
    std::uint32_t blocks = 0;   // own post-fork blocks
    double p_redeem = 0.0;      // chance an output unspent at fork is spent on both branches
};

struct SimConfig {
    std::uint64_t seed = 1;
    std::string root_name = "main";
    std::uint32_t blocks = 100;
    std::uint32_t block_interval = 120; // seconds
    std::int64_t genesis_time = 1420070400;
    CountDist txs_per_block{CountDist::Kind::Fixed, 2, 0};
    CountDist inputs_per_tx{CountDist::Kind::Fixed, 1, 0};
    CountDist outputs_per_tx{CountDist::Kind::Fixed, 2, 0};
    ValueModel value_model = ValueModel::Confidential;
    RingsizePolicy ringsize;
    SpendAgeModel spend_age;
    DecoyRegime decoys;
    std::vector<ForkPlan> forks; // all fork off the root

    void validate() const; // throws ConfigError
};

/// Reads a config file (JSON mirroring the field names above).
SimConfig load_sim_config(const std::filesystem::path& path);

struct SimStats {
    std::uint64_t rings = 0;
    std::uint64_t outputs = 0;
    std::uint64_t clamped_rings = 0;     // decoy pool ran short
    std::uint64_t redemptions = 0;       // outputs scheduled on both branches
    std::uint64_t cross_chain_keys = 0;  // key images emitted on >=2 branches
};

struct SimArtifacts {
    std::vector<BranchBuffer> branch_buffers; // ledger file contents
    std::string fork_spec_json;
    std::string ground_truth_lines;
    SimStats stats;
};

/// Generates a synthetic multi-branch ledger with known ground truth.
/// Deterministic: identical config => byte-identical artifacts.
SimArtifacts simulate(const SimConfig& config);

/// simulate + write branch files, fork spec and ground truth into out_dir.
struct SimOutputPaths {
    std::vector<std::filesystem::path> branch_files;
    std::filesystem::path fork_spec;
    std::filesystem::path ground_truth;
    SimStats stats;
};
SimOutputPaths simulate_to_dir(const SimConfig& config, const std::filesystem::path& out_dir);

/// Ground-truth record: key image hex -> real reference + carrying branches.
struct TruthRecord {
    std::string key_image;
    OutputRef real;
    std::vector<std::string> branches;
};
std::vector<TruthRecord> parse_ground_truth(std::istream& in);

// ---- decoy sampling primitives (exposed for direct use and tests) ----

/// One eligible decoy candidate: creation position and timestamp.
struct EligibleOutput {
    OutputUid uid = 0;
    std::int64_t created_at = 0;
    Amount amount = 0;
};

/// Draws k distinct decoys from `eligible` (creation-ordered, none equal to
/// the real spend) according to the regime. Throws ExhaustedDecoyPool when
/// fewer than k candidates exist.
std::vector<OutputUid> sample_decoys(const DecoyRegime& regime, std::int64_t now,
                                     const std::vector<EligibleOutput>& eligible,
                                     std::uint32_t k, std::mt19937_64& rng);

/// Restricts a pool to the amount class compatible with a spend: confidential
/// spends sample confidential outputs only, denominated spends their own
/// denomination.
std::vector<EligibleOutput> confidential_pool_filter(const std::vector<EligibleOutput>& pool,
                                                     Amount spend_amount);

} // namespace ringtrace
