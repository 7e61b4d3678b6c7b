#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "infprim/belief.hpp"
#include "infprim/ising.hpp"

namespace infprim {

// Outputs of several inference primitive calls, kept per call so heuristics
// can use candidate provenance (genetic combination) or discard it (flatten).
struct CandidateCollection {
    std::vector<CandidateSet> sets;

    int n_inputs() const { return static_cast<int>(sets.size()); }
};

// Energy-dependent part of a candidate weighting factor. The bit-dependent
// part is always the binomial Hamming weight below.
struct WeightingFactor {
    enum class Kind { Uniform, Thermal, Elite };
    Kind kind = Kind::Uniform;
    double temperature = 1.0;       // Thermal
    double elite_threshold = 0.0;   // Elite: weight 1 iff e < threshold

    static WeightingFactor uniform() { return {}; }
    static WeightingFactor thermal(double t);
    static WeightingFactor elite(double threshold);

    // e_shift is subtracted inside the thermal exponent; the shift cancels in
    // weighted ratios and keeps exp() in range.
    double energy_weight(double e, double e_shift) const;
};

// 1 / C(cluster_size, distance): inverse count of states at a given Hamming
// distance, favoring near-total agreement or disagreement.
double binomial_weight(int cluster_size, int distance);

// Concatenation of all sets, within-set order preserved.
std::pair<std::vector<SpinConfig>, std::vector<double>> flatten(const CandidateCollection& c);

// First-occurrence deduplication; identical candidates reporting different
// energies are rejected since E is a function of G.
std::pair<std::vector<SpinConfig>, std::vector<double>> unique_candidates(
    const std::vector<SpinConfig>& configs, const std::vector<double>& energies);

// No-information belief: P = 0.5 on every cluster, S = +1 on every bit.
Belief f_init(const ClusterSet& clusters, int n_bits);

// Majority vote per bit (ties -> +1), disagreement fraction per singleton
// cluster; multi-spin clusters use the overlap-weighted uncertainty with
// uniform energy weights.
Belief belief_raw(const CandidateSet& g, const ClusterSet& clusters);

// belief_raw restricted to candidates with energy strictly below the elite
// threshold. Throws EmptyEliteSetError when nothing qualifies.
Belief belief_elite(const CandidateSet& g, const ClusterSet& clusters, double elite_threshold);

// The as-printed variant of the elite uncertainty (agreement fraction, no
// clamp); kept for comparison, deliberately not wrapped in a Belief since its
// values exceed 0.5.
std::vector<double> elite_agreement_fractions(const CandidateSet& g, const ClusterSet& clusters,
                                              double elite_threshold);

// Boltzmann-weighted statistics over the unique candidate list at
// meta-temperature t; weights use max-shifted exponents (exact, the shift
// cancels in the normalization).
Belief belief_thermal(const CandidateSet& g, const ClusterSet& clusters, double t);

// Weighted probability that the cluster assignment is closer to the truth
// than its flip:
//   M_j = sum_{k in R} S_k G_j(k) / |R|,
//   P   = min( sum_{M_j<0} W_j / sum_j W_j, 0.5 ),
//   W_j = energy_weight(E_j) / C(|R|, hamming(S_R, G_j[R])).
// Candidates with M_j = 0 count only in the denominator.
double cluster_uncertainty(const std::vector<SpinConfig>& configs,
                           const std::vector<double>& energies, const SpinConfig& values,
                           const std::vector<int>& cluster, const WeightingFactor& w);

// Fix-or-free belief: bits unanimous across the elite subset get P = 0,
// everything else P = 0.5.
Belief f_fix(const CandidateSet& g, const ClusterSet& clusters, double elite_threshold);

// Local-search belief: S from the best candidate, one global uncertainty.
Belief f_local_search(const CandidateSet& g, const ClusterSet& clusters, double p_next);

// Breeding heuristic over the best candidate of each parent set: agreeing
// bits get P = p_agree, disagreeing bits P = 0.5 with S taken from the
// lowest-energy parent. Needs at least two parents.
Belief genetic_agreement(const CandidateCollection& c, const ClusterSet& clusters,
                         double p_agree);

enum class AlignMode { Majority, Search };

// For field-free (Z2-symmetric) problems, chooses global inversions of whole
// candidate sets before they are combined: majority vote per set, or a search
// for the inversion pattern maximizing the summed pairwise bit correlation of
// best candidates (exhaustive up to 12 sets, annealed above). Problems with
// fields are returned unchanged.
CandidateCollection align_inversions(const CandidateCollection& c, const IsingProblem& problem,
                                     AlignMode mode, std::uint64_t seed = 0);

}  // namespace infprim
