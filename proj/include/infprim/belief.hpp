#pragma once

#include <vector>

#include "infprim/ising.hpp"

namespace infprim {

// Clusters are non-empty sets of spin indices treated as a unit for
// uncertainty. The canonical layout is one singleton per spin (in index
// order) optionally followed by multi-spin clusters.
struct ClusterSet {
    std::vector<std::vector<int>> clusters;

    int size() const { return static_cast<int>(clusters.size()); }
    void validate(int n_bits) const;

    // Per spin, the index of its singleton cluster (-1 if none).
    std::vector<int> singleton_of_spin(int n_bits) const;

    static ClusterSet singletons(int n_bits);
};

// Inferred bit values plus per-cluster uncertainties. p = 0.5 carries no
// information, p = 0 is certainty.
struct Belief {
    ClusterSet clusters;
    SpinConfig values;                // S_i, one per bit
    std::vector<double> uncertainty;  // P_i in [0, 0.5], one per cluster

    int n_bits() const { return static_cast<int>(values.size()); }
    void validate() const;
};

// Output of an inference primitive call: candidate configurations with their
// energies, e[j] == energy(problem, g[j]).
struct CandidateSet {
    std::vector<SpinConfig> configs;
    std::vector<double> energies;

    int size() const { return static_cast<int>(configs.size()); }
    void validate() const;
    // Index of the lowest-energy candidate, ties broken by first index.
    int best_index() const;
    double min_energy() const;
};

}  // namespace infprim
