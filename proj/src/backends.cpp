#include "infprim/backends.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "infprim/errors.hpp"
#include "infprim/rng.hpp"

namespace infprim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Adjacency {
    // per spin: (neighbor index, coupler index)
    std::vector<std::vector<std::pair<int, int>>> at;

    explicit Adjacency(const IsingProblem& p) : at(p.n) {
        for (int e = 0; e < static_cast<int>(p.couplers.size()); ++e) {
            at[p.couplers[e].i].push_back({p.couplers[e].j, e});
            at[p.couplers[e].j].push_back({p.couplers[e].i, e});
        }
    }
};

// Per-spin reverse-anneal targets and offsets extracted from the per-cluster
// schedule; every spin must appear as a singleton cluster.
struct PerSpinSchedule {
    std::vector<double> s_prime;
    std::vector<double> offset;

    PerSpinSchedule(const ScheduleSpec& sched, int n) {
        const auto singleton = sched.clusters.singleton_of_spin(n);
        s_prime.resize(n);
        offset.resize(n);
        for (int i = 0; i < n; ++i) {
            if (singleton[i] < 0)
                throw std::invalid_argument("schedule does not cover every spin with a singleton cluster");
            s_prime[i] = sched.s_prime[singleton[i]];
            offset[i] = sched.offset_of(singleton[i]);
        }
    }
};

}  // namespace

void AnnealParams::validate() const {
    if (!(temperature > 0.0)) throw std::domain_error("anneal temperature must be > 0");
    if (tau < 1) throw std::invalid_argument("tau must be >= 1");
    if (trotter_slices < 1) throw std::invalid_argument("trotter slice count must be >= 1");
    if (reads < 1) throw std::invalid_argument("reads must be >= 1");
}

double ScheduleSpec::s_min() const {
    if (s_prime.empty()) throw std::invalid_argument("empty schedule");
    return *std::min_element(s_prime.begin(), s_prime.end());
}

double ScheduleSpec::offset_of(int cluster_index) const {
    return offsets.empty() ? 0.0 : offsets[cluster_index];
}

void ScheduleSpec::validate() const {
    if (s_prime.empty()) throw std::invalid_argument("empty schedule");
    if (s_prime.size() != clusters.clusters.size())
        throw std::invalid_argument("schedule target count must equal cluster count");
    for (double s : s_prime)
        if (!(s >= 0.0 && s <= 1.0)) throw std::domain_error("s' targets must lie in [0, 1]");
    if (!offsets.empty() && offsets.size() != s_prime.size())
        throw std::invalid_argument("offset count must equal cluster count");
}

double schedule_s_global(const ScheduleSpec& sched, double t, int tau) {
    const double lo = sched.s_min();
    const double tc = std::clamp(t, 0.0, 2.0 * tau);
    const double s = tc <= tau ? 1.0 - (1.0 - lo) * tc / tau : lo + (1.0 - lo) * (tc - tau) / tau;
    return std::clamp(s, lo, 1.0);  // keep the endpoints exact under rounding
}

double schedule_s_at(const ScheduleSpec& sched, double t, int cluster_index, int tau) {
    return std::max(schedule_s_global(sched, t - sched.offset_of(cluster_index), tau),
                    sched.s_prime[cluster_index]);
}

ScheduleSpec build_schedule(const Belief& belief, const ScheduleFunctions& heuristic,
                            const std::vector<double>& offsets) {
    belief.validate();
    ScheduleSpec sched;
    sched.functions = heuristic;
    sched.clusters = belief.clusters;
    sched.s_prime.resize(belief.uncertainty.size());
    for (std::size_t k = 0; k < belief.uncertainty.size(); ++k)
        sched.s_prime[k] = s_from_uncertainty(belief.uncertainty[k], heuristic);
    sched.offsets = offsets;
    sched.validate();
    return sched;
}

CandidateSet piqa_sample(const IsingProblem& problem, const SpinConfig& initial,
                         const ScheduleSpec& sched, const AnnealParams& params) {
    problem.validate();
    params.validate();
    sched.validate();
    const int n = problem.n;
    if (static_cast<int>(initial.size()) != n)
        throw std::invalid_argument("initial configuration length does not match problem");
    const PerSpinSchedule spin_sched(sched, n);

    const int slices = params.trotter_slices;
    const double pt = slices * params.temperature;  // simulation temperature of the slice stack
    const Adjacency adj(problem);

    double max_offset = 0.0;
    for (double d : spin_sched.offset) max_offset = std::max(max_offset, d);
    const int total_sweeps = 2 * params.tau + static_cast<int>(std::ceil(max_offset));

    CandidateSet out;
    out.configs.reserve(params.reads);
    out.energies.reserve(params.reads);

    std::vector<double> gamma(n), bscale(n), jperp(n), bh(n);
    std::vector<double> jscaled(problem.couplers.size());
    // worldlines: spins[m*n + i], slice-major
    std::vector<int> spins(static_cast<std::size_t>(slices) * n);

    for (int read = 0; read < params.reads; ++read) {
        auto rng = make_rng(params.seed, static_cast<std::uint64_t>(read));
        std::uniform_real_distribution<double> unit(0.0, 1.0);

        // All slices start from the caller's configuration; spins annealed
        // all the way back (s' = 0) carry no information and start random.
        SpinConfig start = initial;
        for (int i = 0; i < n; ++i)
            if (spin_sched.s_prime[i] == 0.0) start[i] = unit(rng) < 0.5 ? 1 : -1;
        for (int m = 0; m < slices; ++m)
            for (int i = 0; i < n; ++i) spins[static_cast<std::size_t>(m) * n + i] = start[i];

        for (int sweep = 0; sweep < total_sweeps; ++sweep) {
            const double t = sweep + 0.5;
            for (int i = 0; i < n; ++i) {
                const double s =
                    std::max(schedule_s_global(sched, t - spin_sched.offset[i], params.tau),
                             spin_sched.s_prime[i]);
                gamma[i] = sched.functions.a(s);
                bscale[i] = sched.functions.b(s);
                jperp[i] = gamma[i] <= 0.0 ? kInf : -(pt / 2.0) * std::log(std::tanh(gamma[i] / pt));
                bh[i] = bscale[i] * problem.fields[i];
            }
            for (std::size_t e = 0; e < problem.couplers.size(); ++e) {
                const auto& c = problem.couplers[e];
                jscaled[e] = std::sqrt(bscale[c.i] * bscale[c.j]) * c.value;
            }

            for (int m = 0; m < slices; ++m) {
                int* slice = spins.data() + static_cast<std::size_t>(m) * n;
                const int* prev =
                    spins.data() + static_cast<std::size_t>((m + slices - 1) % slices) * n;
                const int* next = spins.data() + static_cast<std::size_t>((m + 1) % slices) * n;
                for (int i = 0; i < n; ++i) {
                    if (spin_sched.s_prime[i] >= 1.0) continue;  // held fixed
                    const int s = slice[i];
                    double local = bh[i];
                    for (const auto& [j, e] : adj.at[i]) local += jscaled[e] * slice[j];
                    double d_energy = 2.0 * s * local;
                    if (slices > 1) {
                        const int ksum = s * (prev[i] + next[i]);
                        if (ksum != 0) d_energy += 2.0 * jperp[i] * ksum;
                    }
                    if (d_energy <= 0.0 || unit(rng) < std::exp(-d_energy / pt)) slice[i] = -s;
                }
            }

            // Whole-worldline flips: the inter-slice term cancels, leaving a
            // classical Metropolis move at temperature T on the B-scaled
            // problem. Local slice moves alone mix worldlines far too slowly.
            for (int i = 0; i < n; ++i) {
                if (spin_sched.s_prime[i] >= 1.0) continue;
                double d_energy = 0.0;
                for (int m = 0; m < slices; ++m) {
                    const int* slice = spins.data() + static_cast<std::size_t>(m) * n;
                    double local = bh[i];
                    for (const auto& [j, e] : adj.at[i]) local += jscaled[e] * slice[j];
                    d_energy += 2.0 * slice[i] * local;
                }
                if (d_energy <= 0.0 || unit(rng) < std::exp(-d_energy / pt)) {
                    for (int m = 0; m < slices; ++m)
                        spins[static_cast<std::size_t>(m) * n + i] *= -1;
                }
            }
        }

        // Project the final state: report the lowest-energy slice.
        int best_m = 0;
        double best_e = kInf;
        SpinConfig cfg(n);
        for (int m = 0; m < slices; ++m) {
            for (int i = 0; i < n; ++i) cfg[i] = spins[static_cast<std::size_t>(m) * n + i];
            const double e = energy(problem, cfg);
            if (e < best_e) {
                best_e = e;
                best_m = m;
            }
        }
        for (int i = 0; i < n; ++i) cfg[i] = spins[static_cast<std::size_t>(best_m) * n + i];
        out.configs.push_back(std::move(cfg));
        out.energies.push_back(best_e);
    }
    return out;
}

CandidateSet sa_sample(const IsingProblem& problem, const SpinConfig& initial,
                       const Belief& belief, const AnnealParams& params) {
    problem.validate();
    params.validate();
    belief.validate();
    const int n = problem.n;
    if (static_cast<int>(initial.size()) != n)
        throw std::invalid_argument("initial configuration length does not match problem");
    if (belief.n_bits() != n) throw std::invalid_argument("belief size does not match problem");

    const auto singleton = belief.clusters.singleton_of_spin(n);
    std::vector<double> spin_p(n);
    for (int i = 0; i < n; ++i) {
        if (singleton[i] < 0)
            throw std::invalid_argument("belief does not cover every spin with a singleton cluster");
        spin_p[i] = belief.uncertainty[singleton[i]];
    }
    std::vector<std::pair<const std::vector<int>*, double>> multi;  // cluster, uncertainty
    for (int k = 0; k < belief.clusters.size(); ++k)
        if (belief.clusters.clusters[k].size() > 1 && belief.uncertainty[k] > 0.0)
            multi.push_back({&belief.clusters.clusters[k], belief.uncertainty[k]});

    const Adjacency adj(problem);
    const int total_sweeps = 2 * params.tau;  // same budget as the quantum backend
    const double t_hot = params.temperature;
    const double t_cold = params.temperature / 50.0;

    CandidateSet out;
    out.configs.reserve(params.reads);
    out.energies.reserve(params.reads);

    for (int read = 0; read < params.reads; ++read) {
        auto rng = make_rng(params.seed, static_cast<std::uint64_t>(read));
        std::uniform_real_distribution<double> unit(0.0, 1.0);

        SpinConfig s = initial;
        for (int i = 0; i < n; ++i)
            if (spin_p[i] >= 0.5) s[i] = unit(rng) < 0.5 ? 1 : -1;

        for (int sweep = 0; sweep < total_sweeps; ++sweep) {
            const double frac = total_sweeps > 1
                                    ? static_cast<double>(sweep) / (total_sweeps - 1)
                                    : 1.0;
            const double t_base = t_hot * std::pow(t_cold / t_hot, frac);
            for (int i = 0; i < n; ++i) {
                if (spin_p[i] <= 0.0) continue;  // certain spins never move
                double local = problem.fields[i];
                for (const auto& [j, e] : adj.at[i]) local += problem.couplers[e].value * s[j];
                const double d_energy = 2.0 * s[i] * local;
                const double t_eff = 2.0 * spin_p[i] * t_base;
                if (d_energy <= 0.0 || unit(rng) < std::exp(-d_energy / t_eff)) s[i] = -s[i];
            }
            for (const auto& [cluster, p] : multi) {
                // collective flip of the whole cluster
                SpinConfig trial = s;
                for (int i : *cluster) trial[i] = -trial[i];
                const double d_energy = energy(problem, trial) - energy(problem, s);
                const double t_eff = 2.0 * p * t_base;
                if (d_energy <= 0.0 || unit(rng) < std::exp(-d_energy / t_eff)) s = trial;
            }
        }
        out.energies.push_back(energy(problem, s));
        out.configs.push_back(std::move(s));
    }
    return out;
}

FixedSpinReduction apply_fixed_spins(const IsingProblem& problem, const Belief& belief) {
    problem.validate();
    belief.validate();
    if (belief.n_bits() != problem.n)
        throw std::invalid_argument("belief size does not match problem");

    SpinConfig pinned(problem.n, 0);
    for (int k = 0; k < belief.clusters.size(); ++k) {
        if (belief.uncertainty[k] > 0.0) continue;
        const auto& cluster = belief.clusters.clusters[k];
        if (cluster.size() != 1)
            throw std::invalid_argument("multi-spin cluster with P = 0 is unsupported");
        pinned[cluster[0]] = belief.values[cluster[0]];
    }

    FixedSpinReduction out;
    out.reduction = reduce_problem(problem, pinned);
    std::vector<int> new_spin(problem.n, -1);
    for (std::size_t k = 0; k < out.reduction.kept.size(); ++k)
        new_spin[out.reduction.kept[k]] = static_cast<int>(k);

    out.belief.values.resize(out.reduction.problem.n);
    for (int k = 0; k < out.reduction.problem.n; ++k)
        out.belief.values[k] = belief.values[out.reduction.kept[k]];
    out.cluster_map.assign(belief.clusters.size(), -1);
    for (int k = 0; k < belief.clusters.size(); ++k) {
        std::vector<int> remapped;
        for (int i : belief.clusters.clusters[k])
            if (pinned[i] == 0) remapped.push_back(new_spin[i]);
        if (remapped.empty()) continue;  // fully pinned cluster drops out
        if (remapped.size() < belief.clusters.clusters[k].size() && remapped.size() == 1) {
            // multi-spin cluster reduced to one survivor: its singleton
            // already represents it
            continue;
        }
        out.cluster_map[k] = static_cast<int>(out.belief.clusters.clusters.size());
        out.belief.clusters.clusters.push_back(std::move(remapped));
        out.belief.uncertainty.push_back(belief.uncertainty[k]);
    }
    out.belief.validate();
    return out;
}

BackendKind backend_from_name(const std::string& name) {
    if (name == "piqa") return BackendKind::Piqa;
    if (name == "sa") return BackendKind::Sa;
    if (name == "bp") return BackendKind::Bp;
    throw std::invalid_argument("unknown backend '" + name + "'");
}

const char* backend_name(BackendKind kind) {
    switch (kind) {
        case BackendKind::Piqa: return "piqa";
        case BackendKind::Sa: return "sa";
        case BackendKind::Bp: return "bp";
    }
    return "?";
}

CandidateSet infer(BackendKind backend, const Belief& belief, const IsingProblem& problem,
                   const AnnealParams& params, const InferOptions& opts) {
    params.validate();
    if (backend == BackendKind::Bp)
        return bp_as_primitive(problem, belief, opts.bp, params.reads, params.seed);

    FixedSpinReduction fx = apply_fixed_spins(problem, belief);
    const IsingProblem& red = fx.reduction.problem;

    CandidateSet out;
    if (red.n == 0) {
        // everything pinned: the belief already is the answer
        SpinConfig full = fx.reduction.pinned;
        const double e = energy(problem, full);
        for (int r = 0; r < params.reads; ++r) {
            out.configs.push_back(full);
            out.energies.push_back(e);
        }
        return out;
    }

    std::vector<double> offsets;
    if (!opts.offsets.empty()) {
        if (opts.offsets.size() != static_cast<std::size_t>(belief.clusters.size()))
            throw std::invalid_argument("offset count must equal cluster count");
        offsets.assign(fx.belief.clusters.clusters.size(), 0.0);
        for (std::size_t k = 0; k < fx.cluster_map.size(); ++k)
            if (fx.cluster_map[k] >= 0) offsets[fx.cluster_map[k]] = opts.offsets[k];
    }

    CandidateSet reduced_reads;
    const SpinConfig initial = fx.belief.values;
    if (backend == BackendKind::Piqa) {
        const ScheduleSpec sched = build_schedule(fx.belief, opts.schedule, offsets);
        reduced_reads = piqa_sample(red, initial, sched, params);
    } else {
        reduced_reads = sa_sample(red, initial, fx.belief, params);
    }

    for (auto& cfg : reduced_reads.configs) {
        SpinConfig full = lift_config(fx.reduction, cfg);
        out.energies.push_back(energy(problem, full));
        out.configs.push_back(std::move(full));
    }
    return out;
}

std::string format_reads_csv(const CandidateSet& reads) {
    reads.validate();
    std::ostringstream out;
    out.precision(17);
    const int n = reads.configs.empty() ? 0 : static_cast<int>(reads.configs.front().size());
    out << "read,energy";
    for (int i = 0; i < n; ++i) out << ",s" << i;
    out << "\n";
    for (int j = 0; j < reads.size(); ++j) {
        out << j << "," << reads.energies[j];
        for (int i = 0; i < n; ++i) out << "," << reads.configs[j][i];
        out << "\n";
    }
    return out.str();
}

void write_reads_csv(const CandidateSet& reads, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open file for writing: " + path);
    f << format_reads_csv(reads);
    if (!f) throw IoError("failed writing file: " + path);
}

}  // namespace infprim
