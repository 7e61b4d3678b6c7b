#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "infprim/bp.hpp"
#include "infprim/ising.hpp"
#include "infprim/protocol.hpp"

namespace infprim {

// SK instance with the last spin fixed down, which breaks the global flip
// degeneracy and leaves an (n-1)-spin problem with fields.
IsingProblem generate_sk_fixed(int n, std::uint64_t seed);

struct GenConfig {
    int n = 12;
    int count = 10;
    std::uint64_t seed = 1;
    std::string out_dir = ".";
};

// Writes `count` symmetry-broken SK instances; returns the file paths.
std::vector<std::string> run_gen(const GenConfig& cfg);

struct SolveConfig {
    std::string instance_path;
    std::string protocol_path;
    std::optional<std::uint64_t> seed;     // overrides the protocol file
    std::optional<int> workers;            // overrides the protocol file
    std::string out_prefix = "run";
    bool dump_reads = false;
};

struct SolveResult {
    RunRecord record;
    std::string events_path;
    std::string summary_path;
    std::string best_path;
    std::string reads_path;  // empty unless dump_reads
};

SolveResult run_solve(const SolveConfig& cfg);

// Uncertainty-calibration experiment: freshly generated symmetry-broken SK
// instances are sampled with the traditional (global-search) protocol, per-bit
// (S, P) statistics are computed from the raw reads, and bits are binned by P
// and compared against the exhaustive ground state.
struct CalibrationConfig {
    int instances = 100;
    int n = 12;
    int reads = 201;
    int bins = 10;
    double temperature = 0.8246;
    int tau = 20;
    int trotter_slices = 30;
    std::uint64_t seed = 1;
    int exhaustive_cap = 24;

    void validate() const;
};

struct CalibrationHistogram {
    std::vector<long> total;     // bits per bin, bins partition [0, 0.5]
    std::vector<long> agree;     // S matches the ground state
    std::vector<long> disagree;  // S does not
    int instances_used = 0;

    // disagree/total per bin; empty bins yield NaN
    std::vector<double> error_fraction() const;
};

// Per-instance accumulation; rejects instances without a unique ground state
// (DegenerateInstanceError).
void calibration_accumulate(const IsingProblem& problem, const CalibrationConfig& cfg,
                            std::uint64_t instance_seed, CalibrationHistogram& hist);

CalibrationHistogram run_calibration(const CalibrationConfig& cfg);

std::string format_calibration_csv(const CalibrationHistogram& hist,
                                   const CalibrationConfig& cfg);
void write_calibration_csv(const CalibrationHistogram& hist, const CalibrationConfig& cfg,
                           const std::string& path);

// Exhaustive ground states written as a small text report.
std::string format_ground_states(const GroundStates& gs);
void run_oracle(const std::string& instance_path, const std::string& out_path, int cap = 24);

// BP marginals and their belief conversion as CSV (bit,b_plus,b_minus,S,P);
// the header comment carries the convergence flag.
std::string format_bp_csv(const IsingProblem& problem, const BPParams& params);
void run_bp_csv(const std::string& instance_path, const BPParams& params,
                const std::string& out_path);

}  // namespace infprim
