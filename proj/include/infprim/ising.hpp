#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace infprim {

// Spin values are +1 / -1 throughout.
using SpinConfig = std::vector<int>;

struct Coupler {
    int i = 0;
    int j = 0;  // i < j
    double value = 0.0;
};

// Pairwise Ising problem on an arbitrary graph.
//
// Energy convention:  E(s) = offset - sum_i h_i s_i - sum_{i<j} J_ij s_i s_j.
// The offset carries the constant terms produced by fixing spins, so energies
// of reduced problems stay directly comparable to the original.
struct IsingProblem {
    int n = 0;
    std::vector<double> fields;      // h_i, length n
    std::vector<Coupler> couplers;   // i < j, no duplicate pairs
    double offset = 0.0;

    void validate() const;  // throws std::invalid_argument on malformed data
    bool has_fields() const;
};

double energy(const IsingProblem& p, const SpinConfig& s);

// Fully connected spin glass: all h_i = 0, each J_ij uniform in [-1, 1].
IsingProblem generate_sk(int n, std::uint64_t seed);

// Single-spin reduction: removes `index`, folding its couplers into the
// remaining fields and its field into the offset. Energies are preserved
// exactly: energy(reduced, r) == energy(original, lift of r).
IsingProblem fix_spin(const IsingProblem& p, int index, int value);

// Batch reduction. `pinned` has length n with entries -1/+1 for spins to fix
// and 0 for spins kept free.
struct ReducedProblem {
    IsingProblem problem;
    std::vector<int> kept;  // reduced index -> original index
    SpinConfig pinned;      // full length; 0 where free
};

ReducedProblem reduce_problem(const IsingProblem& p, const SpinConfig& pinned);
SpinConfig lift_config(const ReducedProblem& r, const SpinConfig& reduced);

struct GroundStates {
    std::vector<SpinConfig> configs;  // all minimum-energy configurations
    double energy = 0.0;
};

// Enumerates all 2^n configurations; refuses above `cap` spins.
GroundStates exhaustive_solve(const IsingProblem& p, int cap = 24);

SpinConfig global_flip(const SpinConfig& c);

int hamming_distance(const SpinConfig& a, const SpinConfig& b);

// Text instance format, one problem per file:
//   ising v1 n=<N>
//   h <i> <value>
//   J <i> <j> <value>
// Lines starting with '#' are comments. The writer records the energy sign
// convention as a comment and, when nonzero, the offset as "# offset <v>"
// (which the parser reads back). Duplicate entries and bad indices are
// rejected.
IsingProblem parse_instance(std::istream& in, const std::string& name = "<stream>");
IsingProblem read_instance(const std::string& path);
std::string format_instance(const IsingProblem& p);
void write_instance(const IsingProblem& p, const std::string& path);

}  // namespace infprim
