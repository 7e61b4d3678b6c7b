#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "infprim/belief.hpp"
#include "infprim/bp.hpp"
#include "infprim/ising.hpp"
#include "infprim/uncertainty.hpp"

namespace infprim {

struct AnnealParams {
    double temperature = 0.8246;  // simulation temperature, energy units
    int tau = 20;                 // Metropolis sweeps per schedule leg
    int trotter_slices = 30;      // imaginary-time slices of the path integral
    int reads = 1;                // independent repetitions returned
    std::uint64_t seed = 0;

    void validate() const;
    bool operator==(const AnnealParams&) const = default;
};

// Per-cluster reverse-anneal plan. The global annealing parameter follows the
// triangle path 1 -> min_i s'_i -> 1 over tau sweeps per leg, and each spin
// sees s_i(t) = max(s_global(t - offset_i), s'_i).
struct ScheduleSpec {
    ScheduleFunctions functions = ScheduleFunctions::linear();
    ClusterSet clusters;
    std::vector<double> s_prime;  // per cluster, in [0, 1]
    std::vector<double> offsets;  // per cluster, sweep units (empty = all 0)

    double s_min() const;
    double offset_of(int cluster_index) const;
    void validate() const;
};

// Triangle path value at sweep time t (clamped to s = 1 outside the anneal).
double schedule_s_global(const ScheduleSpec& sched, double t, int tau);
// Per-cluster annealing parameter, never below that cluster's s'.
double schedule_s_at(const ScheduleSpec& sched, double t, int cluster_index, int tau);

// Maps cluster uncertainties to reverse-anneal targets through the given
// schedule's uncertainty heuristic: P = 0.5 -> s' = 0, P = 0 -> s' = 1.
ScheduleSpec build_schedule(const Belief& belief, const ScheduleFunctions& heuristic,
                            const std::vector<double>& offsets = {});

// Path-integral sampler of the transverse-field anneal: trotter_slices
// replicas at temperature T, Metropolis sweeps while the per-spin annealing
// parameter runs the reverse-anneal triangle. Each read starts every slice at
// `initial` (spins with s' = 0 are randomized instead) and reports the
// lowest-energy slice of the final state. Spins with s' = 1 never move.
CandidateSet piqa_sample(const IsingProblem& problem, const SpinConfig& initial,
                         const ScheduleSpec& sched, const AnnealParams& params);

// Classical stand-in backend: single-spin proposals at a per-spin temperature
// scaled by the cluster uncertainty (2 P_i), plus collective flips for
// multi-spin clusters. Spins with P = 0 never move; P = 0.5 spins start
// random. Same output contract as piqa_sample.
CandidateSet sa_sample(const IsingProblem& problem, const SpinConfig& initial,
                       const Belief& belief, const AnnealParams& params);

// Removes every singleton cluster with P = 0 from the problem, pinning it at
// its S value. Multi-spin clusters with P = 0 are unsupported.
struct FixedSpinReduction {
    ReducedProblem reduction;
    Belief belief;                 // on the reduced problem
    std::vector<int> cluster_map;  // original cluster index -> reduced (-1 if dropped)
};

FixedSpinReduction apply_fixed_spins(const IsingProblem& problem, const Belief& belief);

enum class BackendKind { Piqa, Sa, Bp };

BackendKind backend_from_name(const std::string& name);
const char* backend_name(BackendKind kind);

struct InferOptions {
    ScheduleFunctions schedule = ScheduleFunctions::linear();
    std::vector<double> offsets;  // per cluster, optional
    BPParams bp;                  // used by the BP backend
};

// The inference primitive: pins certain spins, builds the reverse-anneal
// schedule, runs the chosen sampler on the reduced problem, then lifts the
// candidates back to full space with energies recomputed on the full problem.
CandidateSet infer(BackendKind backend, const Belief& belief, const IsingProblem& problem,
                   const AnnealParams& params, const InferOptions& opts = {});

// Raw read dump: one row per read, columns read, energy, s0..s{n-1}.
std::string format_reads_csv(const CandidateSet& reads);
void write_reads_csv(const CandidateSet& reads, const std::string& path);

}  // namespace infprim
