#include "infprim/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "infprim/errors.hpp"
#include "infprim/rng.hpp"

namespace infprim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
    std::ostringstream o;
    o.precision(17);
    o << v;
    return o.str();
}

// Uncertainty whose matched (Nishimori) temperature equals t_eff; this links
// a pool rung's effective temperature to the search range of its members.
double uncertainty_for_t(double t_eff) {
    if (t_eff == kInf) return 0.5;
    return 1.0 / (1.0 + std::exp(2.0 / t_eff));
}

std::uint64_t call_stream(int round, int member) {
    return (static_cast<std::uint64_t>(round + 1) << 24) ^ static_cast<std::uint64_t>(member + 1);
}

}  // namespace

int HeuristicSpec::arity() const {
    if (fn == "init") return 0;
    if (fn == "genetic_agreement") return 2;
    return 1;
}

void HeuristicSpec::validate() const {
    static const std::set<std::string> known = {"init",        "raw", "elite",
                                                "thermal",     "fix", "local_search",
                                                "genetic_agreement"};
    if (!known.count(fn)) throw std::invalid_argument("unknown heuristic '" + fn + "'");
    if (fn == "thermal" && !(temperature > 0.0))
        throw std::domain_error("thermal heuristic needs T > 0");
    if (fn == "local_search" && !(p >= 0.0 && p <= 0.5))
        throw std::domain_error("local search p must lie in [0, 0.5]");
    if (fn == "genetic_agreement" && !(p_agree > 0.0 && p_agree < 0.5))
        throw std::domain_error("p_agree must lie in (0, 0.5)");
}

Belief apply_heuristic(const HeuristicSpec& spec, const CandidateCollection& inputs,
                       const ClusterSet& clusters, int n_bits) {
    spec.validate();
    if (spec.fn == "init") return f_init(clusters, n_bits);
    if (spec.fn == "genetic_agreement") return genetic_agreement(inputs, clusters, spec.p_agree);

    auto [g, e] = flatten(inputs);
    CandidateSet flat{std::move(g), std::move(e)};
    if (spec.fn == "raw") return belief_raw(flat, clusters);
    if (spec.fn == "elite") return belief_elite(flat, clusters, spec.elite_threshold);
    if (spec.fn == "thermal") return belief_thermal(flat, clusters, spec.temperature);
    if (spec.fn == "fix") return f_fix(flat, clusters, spec.elite_threshold);
    return f_local_search(flat, clusters, spec.p);
}

ScheduleFunctions ProtocolGraph::schedule() const {
    if (!schedule_a_file.empty() || !schedule_b_file.empty())
        return ScheduleFunctions::from_files(schedule_a_file, schedule_b_file, schedule_t_phys);
    return ScheduleFunctions::linear(schedule_gamma0, schedule_t_phys);
}

namespace {

ProtocolNode primitive_node(std::string id, const std::string& backend) {
    ProtocolNode n;
    n.id = std::move(id);
    n.is_primitive = true;
    n.backend = backend;
    return n;
}

ProtocolNode processing_node(std::string id, HeuristicSpec h) {
    ProtocolNode n;
    n.id = std::move(id);
    n.is_primitive = false;
    n.heuristic = std::move(h);
    return n;
}

HeuristicSpec init_spec() {
    HeuristicSpec h;
    h.fn = "init";
    return h;
}

HeuristicSpec ls_spec(double p) {
    HeuristicSpec h;
    h.fn = "local_search";
    h.p = p;
    return h;
}

HeuristicSpec genetic_spec(double p_agree) {
    HeuristicSpec h;
    h.fn = "genetic_agreement";
    h.p_agree = p_agree;
    return h;
}

// Structural checks shared by templates and explicit documents: unique ids,
// known endpoints, primitive/processing alternation, declared arities.
void validate_topology(const std::vector<ProtocolNode>& nodes,
                       const std::vector<std::pair<std::string, std::string>>& edges) {
    std::map<std::string, const ProtocolNode*> by_id;
    for (const auto& n : nodes) {
        if (n.id.empty()) throw std::invalid_argument("node with empty id");
        if (!by_id.insert({n.id, &n}).second)
            throw std::invalid_argument("duplicate node id '" + n.id + "'");
        if (!n.is_primitive) n.heuristic.validate();
    }
    std::map<std::string, int> indegree;
    for (const auto& [a, b] : edges) {
        auto ia = by_id.find(a);
        auto ib = by_id.find(b);
        if (ia == by_id.end()) throw std::invalid_argument("edge references unknown node '" + a + "'");
        if (ib == by_id.end()) throw std::invalid_argument("edge references unknown node '" + b + "'");
        if (ia->second->is_primitive == ib->second->is_primitive)
            throw std::invalid_argument("edge '" + a + "' -> '" + b +
                                        "' violates primitive/processing alternation");
        ++indegree[b];
    }
    for (const auto& n : nodes) {
        const int want = n.is_primitive ? 1 : n.heuristic.arity();
        const int got = indegree.count(n.id) ? indegree[n.id] : 0;
        if (got != want) {
            std::ostringstream msg;
            msg << "node '" << n.id << "' has in-degree " << got << ", declared " << want;
            throw std::invalid_argument(msg.str());
        }
    }
}

void build_chain_topology(ProtocolGraph& g) {
    g.nodes.clear();
    g.edges.clear();
    const std::string backend = backend_name(g.backend);
    g.nodes.push_back(processing_node("init", init_spec()));
    g.nodes.push_back(primitive_node("phi0", backend));
    g.edges.push_back({"init", "phi0"});
    std::string prev = "phi0";
    for (std::size_t r = 0; r < g.p_ladder.size(); ++r) {
        const std::string f = "ls" + std::to_string(r + 1);
        const std::string phi = "phi" + std::to_string(r + 1);
        g.nodes.push_back(processing_node(f, ls_spec(g.p_ladder[r])));
        g.nodes.push_back(primitive_node(phi, backend));
        g.edges.push_back({prev, f});
        g.edges.push_back({f, phi});
        prev = phi;
    }
    if (g.kind == TemplateKind::Traditional) {
        g.nodes.push_back(processing_node("post", g.post));
        g.edges.push_back({prev, "post"});
    }
}

void build_population_topology(ProtocolGraph& g) {
    g.nodes.clear();
    g.edges.clear();
    const std::string backend = backend_name(g.backend);
    for (int k = 0; k < g.population; ++k) {
        const std::string init = "init" + std::to_string(k);
        const std::string phi = "phi" + std::to_string(k);
        g.nodes.push_back(processing_node(init, init_spec()));
        g.nodes.push_back(primitive_node(phi, backend));
        g.edges.push_back({init, phi});
    }
    // one representative resampling layer: genetic slots take two parents
    for (int j = 0; j < g.genetic_count; ++j) {
        const std::string f = "gen" + std::to_string(j);
        g.nodes.push_back(processing_node(f, genetic_spec(g.p_agree)));
        g.edges.push_back({"phi" + std::to_string((2 * j) % g.population), f});
        g.edges.push_back({"phi" + std::to_string((2 * j + 1) % g.population), f});
    }
    for (int k = 0; k < g.population - g.genetic_count; ++k) {
        const std::string f = "next" + std::to_string(k);
        g.nodes.push_back(processing_node(f, ls_spec(0.2)));
        g.edges.push_back({"phi" + std::to_string(k), f});
    }
}

void build_tempering_topology(ProtocolGraph& g) {
    g.nodes.clear();
    g.edges.clear();
    const std::string backend = backend_name(g.backend);
    const int lanes = g.genetic ? 2 : 1;
    for (std::size_t r = 0; r < g.t_ladder.size(); ++r) {
        for (int l = 0; l < lanes; ++l) {
            const std::string suffix = std::to_string(r) + "_" + std::to_string(l);
            g.nodes.push_back(processing_node("init" + suffix, init_spec()));
            g.nodes.push_back(primitive_node("phi" + suffix, backend));
            g.edges.push_back({"init" + suffix, "phi" + suffix});
        }
        if (g.genetic) {
            const std::string hyb = "hyb" + std::to_string(r);
            g.nodes.push_back(processing_node(hyb, genetic_spec(g.p_agree)));
            g.edges.push_back({"phi" + std::to_string(r) + "_0", hyb});
            g.edges.push_back({"phi" + std::to_string(r) + "_1", hyb});
            g.nodes.push_back(primitive_node("hphi" + std::to_string(r), backend));
            g.edges.push_back({hyb, "hphi" + std::to_string(r)});
        }
    }
}

void rebuild_topology(ProtocolGraph& g) {
    switch (g.kind) {
        case TemplateKind::Traditional:
        case TemplateKind::LocalSearch: build_chain_topology(g); break;
        case TemplateKind::PopulationAnnealing: build_population_topology(g); break;
        case TemplateKind::ParallelTempering: build_tempering_topology(g); break;
    }
}

}  // namespace

void ProtocolGraph::validate() const {
    anneal.validate();
    bp.validate();
    if (rounds < 1) throw std::invalid_argument("rounds must be >= 1");
    if (workers < 1) throw std::invalid_argument("workers must be >= 1");
    if (patience < 0) throw std::invalid_argument("patience must be >= 0");
    switch (kind) {
        case TemplateKind::Traditional:
            post.validate();
            break;
        case TemplateKind::LocalSearch:
            if (p_ladder.empty()) throw std::invalid_argument("local search needs a non-empty p ladder");
            if (static_cast<int>(p_ladder.size()) != rounds)
                throw std::invalid_argument("p ladder length must equal rounds");
            for (double p : p_ladder)
                if (!(p >= 0.0 && p <= 0.5))
                    throw std::domain_error("p ladder entries must lie in [0, 0.5]");
            break;
        case TemplateKind::PopulationAnnealing:
            if (population < 2) throw std::invalid_argument("population must be >= 2");
            if (genetic_count < 0) throw std::invalid_argument("genetic count must be >= 0");
            if (2 * genetic_count > population)
                throw std::invalid_argument("genetic count must not exceed population/2");
            if (t_ladder.empty()) throw std::invalid_argument("population annealing needs a T ladder");
            for (double t : t_ladder)
                if (!(t > 0.0)) throw std::domain_error("T ladder entries must be > 0");
            break;
        case TemplateKind::ParallelTempering:
            if (t_ladder.size() < 2)
                throw std::invalid_argument("parallel tempering needs at least 2 ladder rungs");
            for (std::size_t r = 0; r < t_ladder.size(); ++r) {
                if (!(t_ladder[r] > 0.0)) throw std::domain_error("T ladder entries must be > 0");
                if (r > 0 && !(t_ladder[r] > t_ladder[r - 1]))
                    throw std::invalid_argument("T ladder must be strictly increasing");
            }
            break;
    }
    if (genetic || genetic_count > 0) {
        if (!(p_agree > 0.0 && p_agree < 0.5))
            throw std::domain_error("p_agree must lie in (0, 0.5)");
    }
    validate_topology(nodes, edges);
    schedule();  // throws if the schedule family is malformed
}

ProtocolGraph template_traditional() {
    ProtocolGraph g;
    g.kind = TemplateKind::Traditional;
    g.rounds = 1;
    g.post = ls_spec(0.0);  // best-candidate extraction
    rebuild_topology(g);
    return g;
}

ProtocolGraph template_local_search(int rounds, std::vector<double> p_ladder) {
    ProtocolGraph g;
    g.kind = TemplateKind::LocalSearch;
    g.rounds = rounds;
    g.p_ladder = std::move(p_ladder);
    rebuild_topology(g);
    g.validate();
    return g;
}

ProtocolGraph template_population_annealing(int pop, std::vector<double> t_ladder,
                                            int genetic_count) {
    ProtocolGraph g;
    g.kind = TemplateKind::PopulationAnnealing;
    g.population = pop;
    g.t_ladder = std::move(t_ladder);
    g.genetic_count = genetic_count;
    g.rounds = static_cast<int>(g.t_ladder.size());
    rebuild_topology(g);
    g.validate();
    return g;
}

ProtocolGraph template_parallel_tempering(std::vector<double> t_ladder, int rounds, bool genetic) {
    ProtocolGraph g;
    g.kind = TemplateKind::ParallelTempering;
    g.t_ladder = std::move(t_ladder);
    g.rounds = rounds;
    g.genetic = genetic;
    rebuild_topology(g);
    g.validate();
    return g;
}

std::vector<int> pa_select_parents(const std::vector<double>& min_energies, double t_eff, int k,
                                   std::mt19937_64& rng) {
    const int m = static_cast<int>(min_energies.size());
    if (k > m) throw std::invalid_argument("cannot select more parents than pool members");
    if (!(t_eff > 0.0)) throw std::domain_error("selection temperature must be > 0");

    const double e_min = *std::min_element(min_energies.begin(), min_energies.end());
    std::vector<double> w(m);
    for (int j = 0; j < m; ++j) w[j] = std::exp(-(min_energies[j] - e_min) / t_eff);

    std::vector<int> picked;
    picked.reserve(k);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int draw = 0; draw < k; ++draw) {
        double total = 0.0;
        for (double x : w) total += x;
        double target = unit(rng) * total;
        int choice = -1;
        for (int j = 0; j < m; ++j) {
            if (w[j] <= 0.0) continue;
            target -= w[j];
            choice = j;
            if (target < 0.0) break;
        }
        picked.push_back(choice);
        w[choice] = 0.0;  // without replacement
    }
    return picked;
}

void pt_swap(PoolState& pool, std::mt19937_64& rng, RunRecord* record) {
    const int lanes = pool.lanes;
    const int rungs = static_cast<int>(pool.members.size()) / lanes;
    if (rungs < 2) throw std::invalid_argument("swap needs at least 2 ladder rungs");
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int r = 0; r + 1 < rungs; ++r) {
        for (int l = 0; l < lanes; ++l) {
            PoolMember& a = pool.members[r * lanes + l];
            PoolMember& b = pool.members[(r + 1) * lanes + l];
            const double x = (1.0 / a.t_eff - 1.0 / b.t_eff) * (a.min_energy - b.min_energy);
            const double p = std::min(1.0, std::exp(x));
            const bool accept = unit(rng) < p;
            if (accept) {
                std::swap(a.belief, b.belief);
                std::swap(a.candidates, b.candidates);
                std::swap(a.min_energy, b.min_energy);
            }
            if (record) {
                record->events.push_back({pool.round, r * lanes + l, a.t_eff, a.min_energy,
                                          "swap with=" + std::to_string((r + 1) * lanes + l) +
                                              " p=" + fmt(p) +
                                              (accept ? " accepted" : " rejected")});
            }
        }
    }
}

void hybrid_replace(PoolState& pool, const std::vector<CandidateSet>& genetic_outputs,
                    PexConvention convention, std::mt19937_64& rng, RunRecord* record) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t g = 0; g < genetic_outputs.size(); ++g) {
        if (genetic_outputs[g].configs.empty()) continue;
        const double e_hyb = genetic_outputs[g].min_energy();
        bool replaced = false;
        // members are laid out coolest rung first, so ascending index is the
        // required lowest-T_eff-upward order
        for (std::size_t m = 0; m < pool.members.size() && !replaced; ++m) {
            PoolMember& member = pool.members[m];
            const double diff = convention == PexConvention::Paper
                                    ? e_hyb - member.min_energy
                                    : member.min_energy - e_hyb;
            const double p_ex = std::min(1.0, std::exp(diff / member.t_eff));
            const bool accept = unit(rng) < p_ex;
            if (record) {
                record->events.push_back({pool.round, static_cast<int>(m), member.t_eff,
                                          member.min_energy,
                                          "replace genetic=" + std::to_string(g) + " p=" +
                                              fmt(p_ex) + (accept ? " accepted" : " rejected")});
            }
            if (accept) {
                member.candidates = genetic_outputs[g];
                member.min_energy = e_hyb;
                replaced = true;
            }
        }
        if (!replaced && record) {
            record->events.push_back(
                {pool.round, -1, 0.0, e_hyb, "discard genetic=" + std::to_string(g)});
        }
    }
}

namespace {

class Executor {
public:
    Executor(const ProtocolGraph& graph, const IsingProblem& problem)
        : graph_(graph),
          problem_(problem),
          clusters_(ClusterSet::singletons(problem.n)),
          serial_rng_(make_rng(graph.seed, 0x5e1ec7ULL)) {
        graph_.validate();
        problem_.validate();
        if (problem.n < 1) throw std::invalid_argument("protocol needs a non-empty problem");
        opts_.schedule = graph.schedule();
        opts_.bp = graph.bp;
        record_.seed = graph.seed;
        record_.best_energy = kInf;
        patience_ = graph.patience > 0 ? graph.patience : graph.rounds;
    }

    RunRecord run() {
        switch (graph_.kind) {
            case TemplateKind::Traditional: run_traditional(); break;
            case TemplateKind::LocalSearch: run_local_search(); break;
            case TemplateKind::PopulationAnnealing: run_population(); break;
            case TemplateKind::ParallelTempering: run_tempering(); break;
        }
        return std::move(record_);
    }

private:
    ProtocolGraph graph_;
    IsingProblem problem_;
    ClusterSet clusters_;
    InferOptions opts_;
    RunRecord record_;
    std::mt19937_64 serial_rng_;
    int patience_ = 1;
    int last_improvement_ = 0;

    // Runs one batch of primitive calls, one per belief, across the
    // configured worker threads. Seeds depend only on (round, member_base+i),
    // so results are identical for any worker count.
    std::vector<CandidateSet> sample(const std::vector<Belief>& beliefs, int round,
                                     int member_base) {
        const int m = static_cast<int>(beliefs.size());
        std::vector<CandidateSet> out(m);
        std::vector<std::exception_ptr> errors(m);
        const int workers = std::min(std::max(1, graph_.workers), m);
        auto task = [&](int w) {
            for (int i = w; i < m; i += workers) {
                try {
                    AnnealParams params = graph_.anneal;
                    params.seed = derive_seed(graph_.seed, call_stream(round, member_base + i));
                    out[i] = infer(graph_.backend, beliefs[i], problem_, params, opts_);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        };
        if (workers == 1) {
            task(0);
        } else {
            std::vector<std::thread> threads;
            threads.reserve(workers);
            for (int w = 0; w < workers; ++w) threads.emplace_back(task, w);
            for (auto& t : threads) t.join();
        }
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
        return out;
    }

    bool note_candidates(const CandidateSet& reads, int round) {
        const int j = reads.best_index();
        if (reads.energies[j] < record_.best_energy) {
            record_.best_energy = reads.energies[j];
            record_.best_config = reads.configs[j];
            record_.best_member_reads = reads;
            last_improvement_ = round;
            return true;
        }
        return false;
    }

    void log_sample(int round, int member, double t_eff, const CandidateSet& reads,
                    const Belief& belief, const char* tag) {
        double p_lo = 1.0, p_hi = 0.0;
        for (double p : belief.uncertainty) {
            p_lo = std::min(p_lo, p);
            p_hi = std::max(p_hi, p);
        }
        record_.events.push_back({round, member, t_eff, reads.min_energy(),
                                  std::string(tag) + " p=[" + fmt(p_lo) + "," + fmt(p_hi) + "]"});
    }

    void finish_round(int round) {
        record_.best_by_round.push_back(record_.best_energy);
        record_.rounds_executed = round + 1;
    }

    bool stalled(int round) const { return round - last_improvement_ >= patience_; }

    void run_traditional() {
        const Belief belief = f_init(clusters_, problem_.n);
        auto reads = sample({belief}, 0, 0);
        note_candidates(reads[0], 0);
        log_sample(0, 0, 0.0, reads[0], belief, "sample");
        const Belief post = apply_heuristic(graph_.post, {{reads[0]}}, clusters_, problem_.n);
        record_.events.push_back(
            {0, 0, 0.0, record_.best_energy, "post fn=" + graph_.post.fn});
        (void)post;
        finish_round(0);
    }

    void run_local_search() {
        Belief belief = f_init(clusters_, problem_.n);
        auto reads = sample({belief}, 0, 0);
        note_candidates(reads[0], 0);
        log_sample(0, 0, 0.0, reads[0], belief, "sample");
        finish_round(0);
        for (int r = 0; r < graph_.rounds; ++r) {
            belief = f_local_search(reads[0], clusters_, graph_.p_ladder[r]);
            reads = sample({belief}, r + 1, 0);
            note_candidates(reads[0], r + 1);
            log_sample(r + 1, 0, 0.0, reads[0], belief, "sample");
            finish_round(r + 1);
            if (stalled(r + 1)) {
                record_.events.push_back({r + 1, 0, 0.0, record_.best_energy, "stop patience"});
                break;
            }
        }
    }

    double ladder_at(int round) const {
        const int last = static_cast<int>(graph_.t_ladder.size()) - 1;
        return graph_.t_ladder[std::min(round, last)];
    }

    void run_population() {
        const int pop = graph_.population;
        PoolState pool;
        pool.lanes = 1;
        pool.members.resize(pop);
        std::vector<Belief> beliefs(pop, f_init(clusters_, problem_.n));
        for (int r = 0; r < graph_.rounds; ++r) {
            pool.round = r;
            const double t_eff = ladder_at(r);
            for (auto& m : pool.members) m.t_eff = t_eff;
            auto reads = sample(beliefs, r, 0);
            bool improved = false;
            for (int k = 0; k < pop; ++k) {
                pool.members[k].belief = beliefs[k];
                pool.members[k].candidates = reads[k];
                pool.members[k].min_energy = reads[k].min_energy();
                improved = note_candidates(reads[k], r) || improved;
                log_sample(r, k, t_eff, reads[k], beliefs[k], "sample");
            }
            finish_round(r);
            if (r + 1 >= graph_.rounds) break;
            if (stalled(r)) {
                record_.events.push_back({r, -1, t_eff, record_.best_energy, "stop patience"});
                break;
            }

            // Boltzmann resampling toward the next rung of the ladder; the
            // genetic slots breed two parents each, keeping the population
            // size fixed.
            const double t_next = ladder_at(r + 1);
            const double p_next = uncertainty_for_t(t_next);
            std::vector<double> energies(pop);
            for (int k = 0; k < pop; ++k) energies[k] = pool.members[k].min_energy;
            std::vector<Belief> next;
            next.reserve(pop);
            for (int j = 0; j < graph_.genetic_count; ++j) {
                const auto parents = pa_select_parents(energies, t_next, 2, serial_rng_);
                CandidateCollection pair;
                pair.sets = {pool.members[parents[0]].candidates,
                             pool.members[parents[1]].candidates};
                next.push_back(genetic_agreement(pair, clusters_, graph_.p_agree));
                record_.events.push_back({r, j, t_next, energies[parents[0]],
                                          "genetic parents=" + std::to_string(parents[0]) + "," +
                                              std::to_string(parents[1])});
            }
            for (int k = graph_.genetic_count; k < pop; ++k) {
                const int parent = pa_select_parents(energies, t_next, 1, serial_rng_)[0];
                next.push_back(
                    f_local_search(pool.members[parent].candidates, clusters_, p_next));
                record_.events.push_back({r, k, t_next, energies[parent],
                                          "resample parent=" + std::to_string(parent)});
            }
            beliefs = std::move(next);
        }
    }

    void run_tempering() {
        const int rungs = static_cast<int>(graph_.t_ladder.size());
        const int lanes = graph_.genetic ? 2 : 1;
        const int m = rungs * lanes;
        PoolState pool;
        pool.lanes = lanes;
        pool.members.resize(m);
        for (int r = 0; r < rungs; ++r)
            for (int l = 0; l < lanes; ++l) pool.members[r * lanes + l].t_eff = graph_.t_ladder[r];

        std::vector<Belief> beliefs(m, f_init(clusters_, problem_.n));
        for (int round = 0; round < graph_.rounds; ++round) {
            pool.round = round;
            auto reads = sample(beliefs, round, 0);
            for (int k = 0; k < m; ++k) {
                pool.members[k].belief = beliefs[k];
                pool.members[k].candidates = reads[k];
                pool.members[k].min_energy = reads[k].min_energy();
                note_candidates(reads[k], round);
                log_sample(round, k, pool.members[k].t_eff, reads[k], beliefs[k], "sample");
            }

            if (graph_.genetic) {
                // hybridization pool: one breeding call per rung, then the
                // printed replacement rule, then swaps
                std::vector<Belief> hybrid_beliefs;
                hybrid_beliefs.reserve(rungs);
                for (int r = 0; r < rungs; ++r) {
                    CandidateCollection pair;
                    pair.sets = {pool.members[r * lanes].candidates,
                                 pool.members[r * lanes + 1].candidates};
                    hybrid_beliefs.push_back(genetic_agreement(pair, clusters_, graph_.p_agree));
                }
                auto hybrid_reads = sample(hybrid_beliefs, round, m);
                for (int r = 0; r < rungs; ++r) {
                    note_candidates(hybrid_reads[r], round);
                    log_sample(round, m + r, graph_.t_ladder[r], hybrid_reads[r],
                               hybrid_beliefs[r], "hybrid");
                }
                hybrid_replace(pool, hybrid_reads, graph_.pex, serial_rng_, &record_);
            }
            pt_swap(pool, serial_rng_, &record_);

            finish_round(round);
            if (round + 1 >= graph_.rounds) break;
            if (stalled(round)) {
                record_.events.push_back({round, -1, 0.0, record_.best_energy, "stop patience"});
                break;
            }
            for (int k = 0; k < m; ++k) {
                const double p = uncertainty_for_t(pool.members[k].t_eff);
                beliefs[k] = f_local_search(pool.members[k].candidates, clusters_, p);
            }
        }
    }
};

}  // namespace

RunRecord run_protocol(const ProtocolGraph& graph, const IsingProblem& problem) {
    Executor ex(graph, problem);
    return ex.run();
}

std::string RunRecord::event_log() const {
    std::ostringstream out;
    out.precision(17);
    out << "seed " << seed << "\n";
    for (const auto& e : events) {
        out << "round=" << e.round << " member=" << e.member << " T_eff=" << e.t_eff
            << " min_energy=" << e.min_energy << " " << e.event << "\n";
    }
    out << "best_energy " << best_energy << "\n";
    out << "best_config";
    for (int s : best_config) out << " " << s;
    out << "\n";
    return out.str();
}

std::string RunRecord::summary_csv() const {
    std::ostringstream out;
    out.precision(17);
    out << "round,member,T_eff,min_energy,event\n";
    for (const auto& e : events) {
        std::string quoted = e.event;
        for (char& c : quoted)
            if (c == ',') c = ';';
        out << e.round << "," << e.member << "," << e.t_eff << "," << e.min_energy << ","
            << quoted << "\n";
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// protocol files

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& ctx) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ParseError(ctx + ": unknown key '" + it.key() + "'");
}

HeuristicSpec parse_heuristic(const json& j, const std::string& ctx) {
    if (!j.is_object()) throw ParseError(ctx + ": heuristic must be an object");
    check_keys(j, {"fn", "T", "E_elite", "p", "p_agree"}, ctx);
    HeuristicSpec h;
    h.fn = j.value("fn", std::string("raw"));
    if (j.contains("T")) h.temperature = j["T"].get<double>();
    if (j.contains("E_elite")) h.elite_threshold = j["E_elite"].get<double>();
    if (j.contains("p")) h.p = j["p"].get<double>();
    if (j.contains("p_agree")) h.p_agree = j["p_agree"].get<double>();
    h.validate();
    return h;
}

json heuristic_to_json(const HeuristicSpec& h) {
    json j;
    j["fn"] = h.fn;
    if (h.fn == "thermal") j["T"] = h.temperature;
    if (h.fn == "elite" || h.fn == "fix") j["E_elite"] = h.elite_threshold;
    if (h.fn == "local_search") j["p"] = h.p;
    if (h.fn == "genetic_agreement") j["p_agree"] = h.p_agree;
    return j;
}

TemplateKind template_from_name(const std::string& name) {
    if (name == "traditional") return TemplateKind::Traditional;
    if (name == "local_search") return TemplateKind::LocalSearch;
    if (name == "population_annealing") return TemplateKind::PopulationAnnealing;
    if (name == "parallel_tempering") return TemplateKind::ParallelTempering;
    throw ParseError("unknown template '" + name + "'");
}

const char* template_name(TemplateKind kind) {
    switch (kind) {
        case TemplateKind::Traditional: return "traditional";
        case TemplateKind::LocalSearch: return "local_search";
        case TemplateKind::PopulationAnnealing: return "population_annealing";
        case TemplateKind::ParallelTempering: return "parallel_tempering";
    }
    return "?";
}

// Recognizes explicit node/edge documents that spell out one of the chain
// templates; pooled topologies must use the template form.
void classify_explicit(ProtocolGraph& g) {
    std::map<std::string, const ProtocolNode*> by_id;
    for (const auto& n : g.nodes) by_id[n.id] = &n;
    std::map<std::string, std::vector<std::string>> succ;
    std::map<std::string, int> indegree;
    for (const auto& [a, b] : g.edges) {
        succ[a].push_back(b);
        ++indegree[b];
    }
    const ProtocolNode* init = nullptr;
    for (const auto& n : g.nodes) {
        if (!n.is_primitive && n.heuristic.arity() == 0) {
            if (init) throw ParseError("explicit graph has more than one init node");
            init = &n;
        }
    }
    if (!init) throw ParseError("explicit graph needs exactly one init processing node");

    std::vector<double> ladder;
    HeuristicSpec post = ls_spec(0.0);
    bool have_post = false;
    std::string backend_name_seen;
    const ProtocolNode* cur = init;
    int visited = 1;
    while (true) {
        auto it = succ.find(cur->id);
        if (it == succ.end()) break;
        if (have_post)
            throw ParseError("unsupported explicit topology: post-processing node '" + cur->id +
                             "' must terminate the chain");
        if (it->second.size() != 1)
            throw ParseError("unsupported explicit topology: node '" + cur->id +
                             "' fans out; use a template for pooled protocols");
        const ProtocolNode* next = by_id[it->second[0]];
        ++visited;
        if (next->is_primitive) {
            if (backend_name_seen.empty())
                backend_name_seen = next->backend;
            else if (backend_name_seen != next->backend)
                throw ParseError("explicit graph mixes backends");
        } else if (next->heuristic.fn == "local_search") {
            ladder.push_back(next->heuristic.p);
        } else {
            post = next->heuristic;
            have_post = true;
        }
        cur = next;
    }
    if (visited != static_cast<int>(g.nodes.size()))
        throw ParseError("unsupported explicit topology: disconnected nodes present");
    if (backend_name_seen.empty())
        throw ParseError("explicit graph needs at least one primitive node");
    if (!have_post && !cur->is_primitive)
        throw ParseError("unsupported explicit topology: chain must end with a primitive call "
                         "or one post-processing node");
    if (have_post && !ladder.empty())
        throw ParseError("unsupported explicit topology: local-search chains take no trailing "
                         "post node");

    g.backend = backend_from_name(backend_name_seen);
    if (ladder.empty()) {
        g.kind = TemplateKind::Traditional;
        g.rounds = 1;
        g.post = post;
    } else {
        g.kind = TemplateKind::LocalSearch;
        g.p_ladder = ladder;
        g.rounds = static_cast<int>(ladder.size());
    }
    rebuild_topology(g);
}

}  // namespace

ProtocolGraph parse_protocol_text(const std::string& text, const std::string& name) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(name + ": " + e.what());
    }
    if (!doc.is_object()) throw ParseError(name + ": protocol document must be a JSON object");
    check_keys(doc,
               {"template", "nodes", "edges", "backend", "anneal_params", "bp_params", "schedule",
                "rounds", "p_ladder", "pools", "post", "pex_convention", "seed", "workers",
                "patience"},
               name);

    ProtocolGraph g;
    try {
        if (doc.contains("backend")) g.backend = backend_from_name(doc["backend"].get<std::string>());
        if (doc.contains("anneal_params")) {
            const json& a = doc["anneal_params"];
            check_keys(a, {"T", "tau", "trotter_slices", "reads", "seed"}, name + ".anneal_params");
            if (a.contains("T")) g.anneal.temperature = a["T"].get<double>();
            if (a.contains("tau")) g.anneal.tau = a["tau"].get<int>();
            if (a.contains("trotter_slices")) g.anneal.trotter_slices = a["trotter_slices"].get<int>();
            if (a.contains("reads")) g.anneal.reads = a["reads"].get<int>();
            if (a.contains("seed")) g.anneal.seed = a["seed"].get<std::uint64_t>();
        }
        if (doc.contains("bp_params")) {
            const json& b = doc["bp_params"];
            check_keys(b, {"T", "max_iters", "damping", "tolerance"}, name + ".bp_params");
            if (b.contains("T")) g.bp.temperature = b["T"].get<double>();
            if (b.contains("max_iters")) g.bp.max_iters = b["max_iters"].get<int>();
            if (b.contains("damping")) g.bp.damping = b["damping"].get<double>();
            if (b.contains("tolerance")) g.bp.tolerance = b["tolerance"].get<double>();
        }
        if (doc.contains("schedule")) {
            const json& s = doc["schedule"];
            check_keys(s, {"schedule", "gamma0", "T_phys", "a_file", "b_file"}, name + ".schedule");
            const std::string family = s.value("schedule", std::string("linear"));
            if (family == "tabulated") {
                g.schedule_a_file = s.at("a_file").get<std::string>();
                g.schedule_b_file = s.at("b_file").get<std::string>();
            } else if (family != "linear") {
                throw ParseError(name + ": unknown schedule family '" + family + "'");
            }
            if (s.contains("gamma0")) g.schedule_gamma0 = s["gamma0"].get<double>();
            if (s.contains("T_phys")) g.schedule_t_phys = s["T_phys"].get<double>();
        }
        if (doc.contains("rounds")) g.rounds = doc["rounds"].get<int>();
        if (doc.contains("p_ladder")) g.p_ladder = doc["p_ladder"].get<std::vector<double>>();
        if (doc.contains("pools")) {
            const json& p = doc["pools"];
            check_keys(p, {"population", "T_ladder", "genetic_count", "genetic", "p_agree"},
                       name + ".pools");
            if (p.contains("population")) g.population = p["population"].get<int>();
            if (p.contains("T_ladder")) g.t_ladder = p["T_ladder"].get<std::vector<double>>();
            if (p.contains("genetic_count")) g.genetic_count = p["genetic_count"].get<int>();
            if (p.contains("genetic")) g.genetic = p["genetic"].get<bool>();
            if (p.contains("p_agree")) g.p_agree = p["p_agree"].get<double>();
        }
        if (doc.contains("post")) g.post = parse_heuristic(doc["post"], name + ".post");
        if (doc.contains("pex_convention")) {
            const std::string conv = doc["pex_convention"].get<std::string>();
            if (conv == "paper")
                g.pex = PexConvention::Paper;
            else if (conv == "metropolis")
                g.pex = PexConvention::Metropolis;
            else
                throw ParseError(name + ": pex_convention must be 'paper' or 'metropolis'");
        }
        if (doc.contains("seed")) g.seed = doc["seed"].get<std::uint64_t>();
        if (doc.contains("workers")) g.workers = doc["workers"].get<int>();
        if (doc.contains("patience")) g.patience = doc["patience"].get<int>();

        if (doc.contains("template") == doc.contains("nodes"))
            throw ParseError(name + ": provide either 'template' or explicit 'nodes'/'edges'");

        if (doc.contains("template")) {
            g.kind = template_from_name(doc["template"].get<std::string>());
            if (g.kind == TemplateKind::Traditional && !doc.contains("post")) g.post = ls_spec(0.0);
            if (g.kind == TemplateKind::LocalSearch && !doc.contains("rounds"))
                g.rounds = static_cast<int>(g.p_ladder.size());
            if (g.kind == TemplateKind::PopulationAnnealing && !doc.contains("rounds"))
                g.rounds = static_cast<int>(g.t_ladder.size());
            rebuild_topology(g);
        } else {
            if (!doc.contains("edges")) throw ParseError(name + ": explicit graph needs 'edges'");
            for (const json& jn : doc["nodes"]) {
                check_keys(jn, {"id", "kind", "backend", "fn", "T", "E_elite", "p", "p_agree"},
                           name + ".nodes");
                ProtocolNode n;
                n.id = jn.at("id").get<std::string>();
                const std::string kind = jn.at("kind").get<std::string>();
                if (kind == "primitive") {
                    n.is_primitive = true;
                    n.backend = jn.value("backend", std::string("piqa"));
                } else if (kind == "processing") {
                    json h = jn;
                    h.erase("id");
                    h.erase("kind");
                    n.heuristic = parse_heuristic(h, name + ".nodes." + n.id);
                } else {
                    throw ParseError(name + ": node kind must be 'primitive' or 'processing'");
                }
                g.nodes.push_back(std::move(n));
            }
            for (const json& je : doc["edges"]) {
                if (!je.is_array() || je.size() != 2)
                    throw ParseError(name + ": each edge must be a [from, to] pair");
                g.edges.push_back({je[0].get<std::string>(), je[1].get<std::string>()});
            }
            validate_topology(g.nodes, g.edges);
            classify_explicit(g);
        }
        g.validate();
    } catch (const json::exception& e) {
        throw ParseError(name + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw ParseError(name + ": " + e.what());
    } catch (const std::domain_error& e) {
        throw ParseError(name + ": " + e.what());
    }
    return g;
}

ProtocolGraph parse_protocol(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open protocol file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_protocol_text(buf.str(), path);
}

std::string serialize_protocol(const ProtocolGraph& graph) {
    json doc;
    doc["template"] = template_name(graph.kind);
    doc["backend"] = backend_name(graph.backend);
    doc["anneal_params"] = {{"T", graph.anneal.temperature},
                            {"tau", graph.anneal.tau},
                            {"trotter_slices", graph.anneal.trotter_slices},
                            {"reads", graph.anneal.reads},
                            {"seed", graph.anneal.seed}};
    doc["bp_params"] = {{"T", graph.bp.temperature},
                        {"max_iters", graph.bp.max_iters},
                        {"damping", graph.bp.damping},
                        {"tolerance", graph.bp.tolerance}};
    json sched;
    if (!graph.schedule_a_file.empty()) {
        sched["schedule"] = "tabulated";
        sched["a_file"] = graph.schedule_a_file;
        sched["b_file"] = graph.schedule_b_file;
    } else {
        sched["schedule"] = "linear";
        sched["gamma0"] = graph.schedule_gamma0;
    }
    sched["T_phys"] = graph.schedule_t_phys;
    doc["schedule"] = sched;
    doc["rounds"] = graph.rounds;
    if (!graph.p_ladder.empty()) doc["p_ladder"] = graph.p_ladder;
    if (graph.kind == TemplateKind::PopulationAnnealing ||
        graph.kind == TemplateKind::ParallelTempering) {
        json pools;
        if (graph.population > 0) pools["population"] = graph.population;
        pools["T_ladder"] = graph.t_ladder;
        if (graph.kind == TemplateKind::PopulationAnnealing)
            pools["genetic_count"] = graph.genetic_count;
        else
            pools["genetic"] = graph.genetic;
        pools["p_agree"] = graph.p_agree;
        doc["pools"] = pools;
    }
    if (graph.kind == TemplateKind::Traditional) doc["post"] = heuristic_to_json(graph.post);
    doc["pex_convention"] = graph.pex == PexConvention::Paper ? "paper" : "metropolis";
    doc["seed"] = graph.seed;
    doc["workers"] = graph.workers;
    doc["patience"] = graph.patience;
    return doc.dump(2) + "\n";
}

}  // namespace infprim
