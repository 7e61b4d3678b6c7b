#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "infprim/belief.hpp"
#include "infprim/ising.hpp"

namespace infprim {

struct BPParams {
    double temperature = 1.0;
    int max_iters = 500;
    double damping = 0.3;     // in [0, 1); fraction of the old message kept
    double tolerance = 1e-10;

    void validate() const;
    bool operator==(const BPParams&) const = default;
};

// Per-bit marginals b_i(+1), b_i(-1), normalized to sum to 1.
struct Marginals {
    std::vector<std::array<double, 2>> b;  // [i][0] = b(+1), [i][1] = b(-1)
    bool converged = false;
    int iterations = 0;

    int n_bits() const { return static_cast<int>(b.size()); }
};

// Damped synchronous sum-product on the pairwise graph at temperature T.
// Exact on trees; non-convergence is reported through the flag, not an error.
Marginals bp_run(const IsingProblem& problem, const BPParams& params);

// S_i = sgn(b+ - b-) (ties -> +1), P_i = 0.5 (1 - |b+ - b-| / (b+ + b-)).
// Singleton clusters only.
Belief marginal_to_belief(const Marginals& m, const ClusterSet& clusters);

// BP as an inference primitive: the incoming belief enters as per-bit prior
// fields of strength (T/2) ln((1-P)/P) S_i (bits with P = 0 are pinned
// outright), and `reads` configurations are drawn from the product of the
// resulting marginals.
CandidateSet bp_as_primitive(const IsingProblem& problem, const Belief& belief_in,
                             const BPParams& params, int reads, std::uint64_t seed);

// Replaces (S, P) with the values read off the marginals; pure and idempotent.
Belief dynamic_update(const Marginals& m, const Belief& belief);

}  // namespace infprim
