#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "infprim/backends.hpp"
#include "infprim/belief.hpp"
#include "infprim/processing.hpp"

namespace infprim {

// Named processing heuristic with parameters, as written in protocol files.
struct HeuristicSpec {
    std::string fn = "raw";
    double temperature = 1.0;      // thermal
    double elite_threshold = 0.0;  // elite, fix
    double p = 0.2;                // local_search
    double p_agree = 0.1;          // genetic_agreement

    // Declared input count: 0 for init, 2 for genetic_agreement, 1 otherwise.
    int arity() const;
    void validate() const;
    bool operator==(const HeuristicSpec&) const = default;
};

// Applies a named heuristic to primitive outputs. Single-stream heuristics
// flatten the collection first; init ignores it.
Belief apply_heuristic(const HeuristicSpec& spec, const CandidateCollection& inputs,
                       const ClusterSet& clusters, int n_bits);

enum class TemplateKind { Traditional, LocalSearch, PopulationAnnealing, ParallelTempering };
enum class PexConvention { Paper, Metropolis };

struct ProtocolNode {
    std::string id;
    bool is_primitive = false;
    std::string backend;      // primitive nodes
    HeuristicSpec heuristic;  // processing nodes
    bool operator==(const ProtocolNode&) const = default;
};

// Declarative protocol: a bipartite diagram of primitive and processing
// nodes plus the pool/round parameters the executor runs from.
struct ProtocolGraph {
    TemplateKind kind = TemplateKind::Traditional;
    std::vector<ProtocolNode> nodes;
    std::vector<std::pair<std::string, std::string>> edges;

    BackendKind backend = BackendKind::Piqa;
    AnnealParams anneal;
    BPParams bp;

    // schedule family (linear unless table files are set)
    double schedule_gamma0 = 1.0;
    double schedule_t_phys = 0.0;
    std::string schedule_a_file;
    std::string schedule_b_file;

    int rounds = 1;
    std::vector<double> p_ladder;   // local search, one p per round
    int population = 0;             // population annealing
    std::vector<double> t_ladder;   // PA: per round; PT: rung temperatures
    int genetic_count = 0;          // PA offspring slots per round
    bool genetic = false;           // PT hybridization pool
    double p_agree = 0.1;
    HeuristicSpec post;             // traditional post-processing
    PexConvention pex = PexConvention::Paper;
    std::uint64_t seed = 0;
    int workers = 1;
    int patience = 0;  // rounds without improvement before stopping; 0 = rounds

    ScheduleFunctions schedule() const;
    void validate() const;
    bool operator==(const ProtocolGraph&) const = default;
};

ProtocolGraph template_traditional();
ProtocolGraph template_local_search(int rounds, std::vector<double> p_ladder);
ProtocolGraph template_population_annealing(int pop, std::vector<double> t_ladder,
                                            int genetic_count);
ProtocolGraph template_parallel_tempering(std::vector<double> t_ladder, int rounds, bool genetic);

struct PoolMember {
    double t_eff = 1.0;
    Belief belief;
    CandidateSet candidates;
    double min_energy = 0.0;
};

struct PoolState {
    std::vector<PoolMember> members;
    int lanes = 1;  // members per temperature rung (2 with a hybridization pool)
    SpinConfig best_config;
    double best_energy = 0.0;
    int round = 0;
};

struct RunEvent {
    int round = 0;
    int member = 0;
    double t_eff = 0.0;
    double min_energy = 0.0;
    std::string event;
};

struct RunRecord {
    std::uint64_t seed = 0;
    int rounds_executed = 0;
    SpinConfig best_config;
    double best_energy = 0.0;
    std::vector<double> best_by_round;
    std::vector<RunEvent> events;
    CandidateSet best_member_reads;  // final-round reads of the best member

    std::string event_log() const;    // one line per event
    std::string summary_csv() const;  // round,member,T_eff,min_energy,event
};

// Draws k distinct member indices, sequentially without replacement, from
// Boltzmann weights exp(-min_energy/t_eff) renormalized after each draw.
std::vector<int> pa_select_parents(const std::vector<double>& min_energies, double t_eff, int k,
                                   std::mt19937_64& rng);

// One sweep of adjacent-rung exchanges (low to high T), lane-wise, accepting
// with min(1, exp((1/T_a - 1/T_b)(E_a - E_b))) on member min energies.
void pt_swap(PoolState& pool, std::mt19937_64& rng, RunRecord* record);

// Reinserts hybridization outputs into the main pool. Each output (ordered by
// source rung, coolest first) tests members from the lowest T_eff upward and
// replaces one with probability
//   paper:      P_ex = min(exp((min E_hyb - min E)/T_eff), 1)   (as printed)
//   metropolis: P_ex = min(exp((min E - min E_hyb)/T_eff), 1)
// and is discarded if every member rejects it.
void hybrid_replace(PoolState& pool, const std::vector<CandidateSet>& genetic_outputs,
                    PexConvention convention, std::mt19937_64& rng, RunRecord* record);

RunRecord run_protocol(const ProtocolGraph& graph, const IsingProblem& problem);

ProtocolGraph parse_protocol_text(const std::string& text, const std::string& name = "<protocol>");
ProtocolGraph parse_protocol(const std::string& path);
std::string serialize_protocol(const ProtocolGraph& graph);

}  // namespace infprim
