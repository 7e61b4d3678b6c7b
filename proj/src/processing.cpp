#include "infprim/processing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "infprim/errors.hpp"
#include "infprim/rng.hpp"

namespace infprim {

namespace {

constexpr double kEnergyTol = 1e-9;

int sign_or_plus(double x) { return x < 0.0 ? -1 : 1; }

void require_nonempty(const CandidateSet& g) {
    if (g.configs.empty()) throw std::invalid_argument("empty candidate list");
    g.validate();
}

// Shared core of the majority-style beliefs: S by weighted sign per bit,
// singleton P by weighted disagreement fraction, multi-spin clusters via the
// overlap-weighted formula.
Belief weighted_belief(const std::vector<SpinConfig>& configs, const std::vector<double>& energies,
                       const std::vector<double>& weights, const ClusterSet& clusters,
                       const WeightingFactor& wf) {
    const int n = static_cast<int>(configs.front().size());
    clusters.validate(n);

    double total_w = 0.0;
    for (double w : weights) total_w += w;
    if (total_w <= 0.0) throw DegenerateWeightError("all candidate weights are zero");

    Belief out;
    out.clusters = clusters;
    out.values.assign(n, 1);
    for (int i = 0; i < n; ++i) {
        double m = 0.0;
        for (std::size_t j = 0; j < configs.size(); ++j) m += weights[j] * configs[j][i];
        out.values[i] = sign_or_plus(m);
    }
    out.uncertainty.resize(clusters.size());
    for (int k = 0; k < clusters.size(); ++k) {
        const auto& cluster = clusters.clusters[k];
        if (cluster.size() == 1) {
            const int i = cluster[0];
            double disagree = 0.0;
            for (std::size_t j = 0; j < configs.size(); ++j)
                if (configs[j][i] == -out.values[i]) disagree += weights[j];
            out.uncertainty[k] = std::min(disagree / total_w, 0.5);
        } else {
            out.uncertainty[k] = cluster_uncertainty(configs, energies, out.values, cluster, wf);
        }
    }
    return out;
}

CandidateSet elite_subset(const CandidateSet& g, double elite_threshold) {
    require_nonempty(g);
    CandidateSet sub;
    for (int j = 0; j < g.size(); ++j) {
        if (g.energies[j] < elite_threshold) {
            sub.configs.push_back(g.configs[j]);
            sub.energies.push_back(g.energies[j]);
        }
    }
    if (sub.configs.empty())
        throw EmptyEliteSetError("elite threshold excludes every candidate");
    return sub;
}

}  // namespace

WeightingFactor WeightingFactor::thermal(double t) {
    if (!(t > 0.0)) throw std::domain_error("thermal weighting needs T > 0");
    WeightingFactor w;
    w.kind = Kind::Thermal;
    w.temperature = t;
    return w;
}

WeightingFactor WeightingFactor::elite(double threshold) {
    WeightingFactor w;
    w.kind = Kind::Elite;
    w.elite_threshold = threshold;
    return w;
}

double WeightingFactor::energy_weight(double e, double e_shift) const {
    switch (kind) {
        case Kind::Uniform: return 1.0;
        case Kind::Thermal: return std::exp(-(e - e_shift) / temperature);
        case Kind::Elite: return e < elite_threshold ? 1.0 : 0.0;
    }
    return 1.0;
}

double binomial_weight(int cluster_size, int distance) {
    if (cluster_size < 1) throw std::domain_error("cluster size must be >= 1");
    if (distance < 0 || distance > cluster_size)
        throw std::domain_error("distance must lie in [0, cluster_size]");
    double binom = 1.0;
    for (int d = 1; d <= distance; ++d)
        binom = binom * (cluster_size - d + 1) / d;
    return 1.0 / binom;
}

std::pair<std::vector<SpinConfig>, std::vector<double>> flatten(const CandidateCollection& c) {
    std::vector<SpinConfig> configs;
    std::vector<double> energies;
    std::size_t n_out = c.sets.empty() ? 0 : c.sets.front().configs.size();
    for (const auto& set : c.sets) {
        set.validate();
        if (set.configs.size() != n_out)
            throw std::invalid_argument("ragged candidate collection: sets differ in length");
        configs.insert(configs.end(), set.configs.begin(), set.configs.end());
        energies.insert(energies.end(), set.energies.begin(), set.energies.end());
    }
    return {std::move(configs), std::move(energies)};
}

std::pair<std::vector<SpinConfig>, std::vector<double>> unique_candidates(
    const std::vector<SpinConfig>& configs, const std::vector<double>& energies) {
    if (configs.size() != energies.size())
        throw std::invalid_argument("candidate and energy lists must have equal length");
    std::vector<SpinConfig> uc;
    std::vector<double> ue;
    std::map<SpinConfig, double> seen;
    for (std::size_t j = 0; j < configs.size(); ++j) {
        auto [it, inserted] = seen.insert({configs[j], energies[j]});
        if (inserted) {
            uc.push_back(configs[j]);
            ue.push_back(energies[j]);
        } else if (std::abs(it->second - energies[j]) > kEnergyTol * (1.0 + std::abs(it->second))) {
            throw std::invalid_argument("identical candidates carry conflicting energies");
        }
    }
    return {std::move(uc), std::move(ue)};
}

Belief f_init(const ClusterSet& clusters, int n_bits) {
    clusters.validate(n_bits);
    Belief b;
    b.clusters = clusters;
    b.values.assign(n_bits, 1);
    b.uncertainty.assign(clusters.size(), 0.5);
    return b;
}

Belief belief_raw(const CandidateSet& g, const ClusterSet& clusters) {
    require_nonempty(g);
    const std::vector<double> weights(g.configs.size(), 1.0);
    return weighted_belief(g.configs, g.energies, weights, clusters, WeightingFactor::uniform());
}

Belief belief_elite(const CandidateSet& g, const ClusterSet& clusters, double elite_threshold) {
    return belief_raw(elite_subset(g, elite_threshold), clusters);
}

std::vector<double> elite_agreement_fractions(const CandidateSet& g, const ClusterSet& clusters,
                                              double elite_threshold) {
    const CandidateSet sub = elite_subset(g, elite_threshold);
    const Belief b = belief_raw(sub, clusters);
    std::vector<double> out(b.uncertainty.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = 1.0 - b.uncertainty[k];
    return out;
}

Belief belief_thermal(const CandidateSet& g, const ClusterSet& clusters, double t) {
    if (!(t > 0.0)) throw std::domain_error("thermal belief needs T > 0");
    require_nonempty(g);
    auto [uc, ue] = unique_candidates(g.configs, g.energies);
    const double e_min = *std::min_element(ue.begin(), ue.end());
    std::vector<double> weights(uc.size());
    for (std::size_t j = 0; j < uc.size(); ++j) weights[j] = std::exp(-(ue[j] - e_min) / t);
    return weighted_belief(uc, ue, weights, clusters, WeightingFactor::thermal(t));
}

double cluster_uncertainty(const std::vector<SpinConfig>& configs,
                           const std::vector<double>& energies, const SpinConfig& values,
                           const std::vector<int>& cluster, const WeightingFactor& w) {
    if (configs.empty()) throw std::invalid_argument("empty candidate list");
    if (configs.size() != energies.size())
        throw std::invalid_argument("candidate and energy lists must have equal length");
    if (cluster.empty()) throw std::invalid_argument("empty cluster");
    const int size = static_cast<int>(cluster.size());
    const double e_shift = *std::min_element(energies.begin(), energies.end());

    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < configs.size(); ++j) {
        int agree_sum = 0;
        int distance = 0;
        for (int k : cluster) {
            agree_sum += values[k] * configs[j][k];
            if (values[k] != configs[j][k]) ++distance;
        }
        const double wj = w.energy_weight(energies[j], e_shift) * binomial_weight(size, distance);
        den += wj;
        if (agree_sum < 0) num += wj;
    }
    if (den <= 0.0) throw DegenerateWeightError("all candidate weights are zero");
    return std::min(num / den, 0.5);
}

Belief f_fix(const CandidateSet& g, const ClusterSet& clusters, double elite_threshold) {
    Belief b = belief_elite(g, clusters, elite_threshold);
    for (double& p : b.uncertainty) p = (p == 0.0) ? 0.0 : 0.5;
    return b;
}

Belief f_local_search(const CandidateSet& g, const ClusterSet& clusters, double p_next) {
    require_nonempty(g);
    if (!(p_next >= 0.0 && p_next <= 0.5))
        throw std::domain_error("local search uncertainty must lie in [0, 0.5]");
    const SpinConfig& best = g.configs[g.best_index()];
    clusters.validate(static_cast<int>(best.size()));
    Belief b;
    b.clusters = clusters;
    b.values = best;
    b.uncertainty.assign(clusters.size(), p_next);
    return b;
}

Belief genetic_agreement(const CandidateCollection& c, const ClusterSet& clusters,
                         double p_agree) {
    if (c.n_inputs() < 2)
        throw std::invalid_argument("agreement combination needs at least two parent sets");
    if (!(p_agree > 0.0 && p_agree < 0.5))
        throw std::domain_error("agreement uncertainty must lie in (0, 0.5)");

    std::vector<const SpinConfig*> parents;
    int winner = 0;
    double winner_e = std::numeric_limits<double>::infinity();
    for (int r = 0; r < c.n_inputs(); ++r) {
        const auto& set = c.sets[r];
        require_nonempty(set);
        const int j = set.best_index();
        parents.push_back(&set.configs[j]);
        if (set.energies[j] < winner_e) {
            winner_e = set.energies[j];
            winner = r;
        }
    }
    const int n = static_cast<int>(parents.front()->size());
    clusters.validate(n);

    std::vector<bool> agrees(n);
    Belief b;
    b.clusters = clusters;
    b.values.resize(n);
    for (int i = 0; i < n; ++i) {
        bool same = true;
        for (const auto* g : parents)
            if ((*g)[i] != (*parents.front())[i]) same = false;
        agrees[i] = same;
        b.values[i] = same ? (*parents.front())[i] : (*parents[winner])[i];
    }
    b.uncertainty.resize(clusters.size());
    for (int k = 0; k < clusters.size(); ++k) {
        bool cluster_agrees = true;
        for (int i : clusters.clusters[k])
            if (!agrees[i]) cluster_agrees = false;
        b.uncertainty[k] = cluster_agrees ? p_agree : 0.5;
    }
    return b;
}

namespace {

double inversion_objective(const std::vector<int>& pattern,
                           const std::vector<std::vector<double>>& corr) {
    const int m = static_cast<int>(pattern.size());
    double obj = 0.0;
    for (int r = 0; r < m; ++r)
        for (int q = r + 1; q < m; ++q) obj += pattern[r] * pattern[q] * corr[r][q];
    return obj;
}

}  // namespace

CandidateCollection align_inversions(const CandidateCollection& c, const IsingProblem& problem,
                                     AlignMode mode, std::uint64_t seed) {
    if (problem.has_fields()) return c;  // no Z2 symmetry to resolve
    const int m = c.n_inputs();
    if (m == 0) return c;

    std::vector<int> pattern(m, 1);
    if (mode == AlignMode::Majority) {
        for (int r = 0; r < m; ++r) {
            long long sum = 0;
            for (const auto& g : c.sets[r].configs)
                for (int s : g) sum += s;
            if (sum < 0) pattern[r] = -1;
        }
    } else {
        // Pairwise correlations of the best candidates.
        std::vector<const SpinConfig*> best(m);
        for (int r = 0; r < m; ++r) best[r] = &c.sets[r].configs[c.sets[r].best_index()];
        std::vector<std::vector<double>> corr(m, std::vector<double>(m, 0.0));
        for (int r = 0; r < m; ++r)
            for (int q = r + 1; q < m; ++q) {
                double dot = 0.0;
                for (std::size_t i = 0; i < best[r]->size(); ++i)
                    dot += (*best[r])[i] * (*best[q])[i];
                corr[r][q] = dot;
            }

        if (m <= 12) {
            double best_obj = -std::numeric_limits<double>::infinity();
            for (std::uint64_t mask = 0; mask < (1ULL << m); ++mask) {
                std::vector<int> cand(m);
                for (int r = 0; r < m; ++r) cand[r] = (mask >> r) & 1 ? -1 : 1;
                const double obj = inversion_objective(cand, corr);
                if (obj > best_obj) {
                    best_obj = obj;
                    pattern = cand;
                }
            }
        } else {
            auto rng = make_rng(seed, 0x616c69676eULL);
            std::uniform_int_distribution<int> pick(0, m - 1);
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            double cmax = 1.0;
            for (int r = 0; r < m; ++r)
                for (int q = r + 1; q < m; ++q) cmax = std::max(cmax, std::abs(corr[r][q]));
            double obj = inversion_objective(pattern, corr);
            std::vector<int> best_pat = pattern;
            double best_obj = obj;
            const int steps = 400 * m;
            for (int step = 0; step < steps; ++step) {
                const double t = 2.0 * cmax * std::pow(0.01, static_cast<double>(step) / steps);
                const int r = pick(rng);
                double delta = 0.0;
                for (int q = 0; q < m; ++q) {
                    if (q == r) continue;
                    const double cv = q < r ? corr[q][r] : corr[r][q];
                    delta += -2.0 * pattern[r] * pattern[q] * cv;
                }
                if (delta >= 0.0 || unit(rng) < std::exp(delta / t)) {
                    pattern[r] = -pattern[r];
                    obj += delta;
                    if (obj > best_obj) {
                        best_obj = obj;
                        best_pat = pattern;
                    }
                }
            }
            pattern = best_pat;
        }
    }

    CandidateCollection out = c;
    for (int r = 0; r < m; ++r) {
        if (pattern[r] != -1) continue;
        for (auto& g : out.sets[r].configs) g = global_flip(g);
        // energies unchanged: field-free problems are flip invariant
    }
    return out;
}

}  // namespace infprim
