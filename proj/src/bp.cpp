#include "infprim/bp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "infprim/rng.hpp"

namespace infprim {

void BPParams::validate() const {
    if (!(temperature > 0.0)) throw std::domain_error("BP temperature must be > 0");
    if (max_iters < 1) throw std::invalid_argument("BP needs max_iters >= 1");
    if (!(damping >= 0.0 && damping < 1.0)) throw std::invalid_argument("damping must lie in [0, 1)");
    if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be > 0");
}

// Messages are kept as effective fields u_{i->j}: on the +-1 alphabet the
// sum-product update collapses to
//   u_{i->j} = atanh( tanh(beta J_ij) tanh(beta h_i + sum_{k != j} u_{k->i}) ),
// which stays bounded since |tanh(beta J)| < 1.
Marginals bp_run(const IsingProblem& problem, const BPParams& params) {
    problem.validate();
    params.validate();
    const double beta = 1.0 / params.temperature;
    const int n = problem.n;

    // directed edges: 2 per coupler
    const int m = static_cast<int>(problem.couplers.size());
    std::vector<int> src(2 * m), dst(2 * m);
    std::vector<double> tj(2 * m);
    std::vector<std::vector<int>> in_edges(n);  // edges arriving at each spin
    for (int e = 0; e < m; ++e) {
        const auto& c = problem.couplers[e];
        src[2 * e] = c.i; dst[2 * e] = c.j;
        src[2 * e + 1] = c.j; dst[2 * e + 1] = c.i;
        tj[2 * e] = tj[2 * e + 1] = std::tanh(beta * c.value);
        in_edges[c.j].push_back(2 * e);
        in_edges[c.i].push_back(2 * e + 1);
    }

    std::vector<double> u(2 * m, 0.0), u_next(2 * m, 0.0);
    std::vector<double> field(n, 0.0);
    Marginals out;
    out.b.resize(n);

    for (int it = 0; it < params.max_iters; ++it) {
        for (int i = 0; i < n; ++i) {
            field[i] = beta * problem.fields[i];
            for (int e : in_edges[i]) field[i] += u[e];
        }
        double max_change = 0.0;
        for (int e = 0; e < 2 * m; ++e) {
            const int i = src[e];
            const int reverse = e ^ 1;  // dst -> src partner of the same coupler
            const double cavity = field[i] - u[reverse];
            const double fresh = std::atanh(tj[e] * std::tanh(cavity));
            max_change = std::max(max_change, std::abs(fresh - u[e]));
            u_next[e] = params.damping * u[e] + (1.0 - params.damping) * fresh;
        }
        u.swap(u_next);
        out.iterations = it + 1;
        if (max_change < params.tolerance) {
            out.converged = true;
            break;
        }
    }

    for (int i = 0; i < n; ++i) {
        double f = beta * problem.fields[i];
        for (int e : in_edges[i]) f += u[e];
        const double t = std::tanh(f);
        out.b[i] = {0.5 * (1.0 + t), 0.5 * (1.0 - t)};
    }
    return out;
}

Belief marginal_to_belief(const Marginals& m, const ClusterSet& clusters) {
    const int n = m.n_bits();
    clusters.validate(n);
    for (const auto& c : clusters.clusters)
        if (c.size() != 1)
            throw std::invalid_argument("marginal conversion supports singleton clusters only");
    for (const auto& b : m.b)
        if (!(b[0] + b[1] > 0.0)) throw std::invalid_argument("marginal with zero mass");

    Belief out;
    out.clusters = clusters;
    out.values.resize(n);
    out.uncertainty.resize(clusters.size());
    for (int i = 0; i < n; ++i) {
        const double diff = m.b[i][0] - m.b[i][1];
        out.values[i] = diff < 0.0 ? -1 : 1;
    }
    for (int k = 0; k < clusters.size(); ++k) {
        const int i = clusters.clusters[k][0];
        const double diff = m.b[i][0] - m.b[i][1];
        const double sum = m.b[i][0] + m.b[i][1];
        out.uncertainty[k] = 0.5 * (1.0 - std::abs(diff) / sum);
    }
    return out;
}

CandidateSet bp_as_primitive(const IsingProblem& problem, const Belief& belief_in,
                             const BPParams& params, int reads, std::uint64_t seed) {
    problem.validate();
    belief_in.validate();
    params.validate();
    if (reads < 1) throw std::invalid_argument("reads must be >= 1");
    if (belief_in.n_bits() != problem.n)
        throw std::invalid_argument("belief size does not match problem");

    // Bits with P = 0 are pinned; the rest receive Nishimori-consistent prior
    // fields (T/2) ln((1-P)/P) S_i, zero at P = 0.5.
    const auto singleton = belief_in.clusters.singleton_of_spin(problem.n);
    SpinConfig pinned(problem.n, 0);
    for (int k = 0; k < belief_in.clusters.size(); ++k) {
        if (belief_in.uncertainty[k] > 0.0) continue;
        const auto& cluster = belief_in.clusters.clusters[k];
        if (cluster.size() != 1)
            throw std::invalid_argument("multi-spin cluster with P = 0 is unsupported");
        pinned[cluster[0]] = belief_in.values[cluster[0]];
    }
    ReducedProblem red = reduce_problem(problem, pinned);
    for (int k = 0; k < red.problem.n; ++k) {
        const int orig = red.kept[k];
        const int ci = singleton[orig];
        if (ci < 0) continue;
        const double p = belief_in.uncertainty[ci];
        if (p >= 0.5) continue;
        red.problem.fields[k] += belief_in.values[orig] * 0.5 * params.temperature *
                                 std::log((1.0 - p) / p);
    }

    const Marginals marg = bp_run(red.problem, params);

    CandidateSet out;
    out.configs.reserve(reads);
    out.energies.reserve(reads);
    for (int r = 0; r < reads; ++r) {
        auto rng = make_rng(seed, static_cast<std::uint64_t>(r));
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        SpinConfig reduced(red.problem.n);
        for (int k = 0; k < red.problem.n; ++k)
            reduced[k] = unit(rng) < marg.b[k][0] ? 1 : -1;
        SpinConfig full = lift_config(red, reduced);
        out.energies.push_back(energy(problem, full));
        out.configs.push_back(std::move(full));
    }
    return out;
}

Belief dynamic_update(const Marginals& m, const Belief& belief) {
    return marginal_to_belief(m, belief.clusters);
}

}  // namespace infprim
