#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <cmath>
#include <random>

#include "infprim/backends.hpp"
#include "infprim/experiments.hpp"
#include "infprim/processing.hpp"

using namespace infprim;

namespace {

Belief uniform_belief(int n, double p) {
    Belief b = f_init(ClusterSet::singletons(n), n);
    for (double& u : b.uncertainty) u = p;
    return b;
}

}  // namespace

TEST_CASE("build_schedule endpoints") {
    const auto lin = ScheduleFunctions::linear();
    const ScheduleSpec open = build_schedule(uniform_belief(3, 0.5), lin);
    for (double s : open.s_prime) CHECK(s == doctest::Approx(0.0));

    const ScheduleSpec closed = build_schedule(uniform_belief(3, 0.0), lin);
    for (double s : closed.s_prime) CHECK(s == doctest::Approx(1.0));

    Belief bad = uniform_belief(2, 0.5);
    bad.uncertainty[0] = 0.7;
    CHECK_THROWS_AS(build_schedule(bad, lin), std::domain_error);
}

TEST_CASE("build_schedule matches the pointwise inverse") {
    const auto lin = ScheduleFunctions::linear();
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unit(0.0, 0.5);
    Belief b = uniform_belief(6, 0.5);
    for (double& p : b.uncertainty) p = unit(rng);
    const ScheduleSpec sched = build_schedule(b, lin);
    for (int k = 0; k < 6; ++k)
        CHECK(sched.s_prime[k] == doctest::Approx(s_from_uncertainty(b.uncertainty[k], lin)));
}

TEST_CASE("per-spin path law") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int tau = 20;
    for (int trial = 0; trial < 20; ++trial) {
        ScheduleSpec sched;
        sched.clusters = ClusterSet::singletons(5);
        for (int k = 0; k < 5; ++k) sched.s_prime.push_back(unit(rng));
        const bool with_offsets = trial % 2 == 0;
        if (with_offsets)
            for (int k = 0; k < 5; ++k) sched.offsets.push_back(4.0 * unit(rng));
        sched.validate();

        const double s_max = *std::max_element(sched.s_prime.begin(), sched.s_prime.end());
        for (double t = -2.0; t <= 2.0 * tau + 6.0; t += 0.25) {
            const double sg = schedule_s_global(sched, t, tau);
            CHECK(sg >= sched.s_min());
            CHECK(sg <= 1.0);
            for (int k = 0; k < 5; ++k) {
                const double s = schedule_s_at(sched, t, k, tau);
                CHECK(s >= sched.s_prime[k]);  // never below the spin's own target
                if (!with_offsets && sg >= s_max) CHECK(s == doctest::Approx(sg));
            }
        }
    }
}

TEST_CASE("piqa holds fully certain schedules fixed") {
    const IsingProblem p = generate_sk(6, 31);
    const SpinConfig initial = {1, -1, 1, 1, -1, -1};
    AnnealParams params;
    params.reads = 8;
    params.tau = 10;
    params.trotter_slices = 5;
    params.seed = 3;

    const ScheduleSpec sched = build_schedule(uniform_belief(6, 0.0), ScheduleFunctions::linear());
    const CandidateSet out = piqa_sample(p, initial, sched, params);
    REQUIRE(out.size() == 8);
    for (int j = 0; j < out.size(); ++j) {
        CHECK(out.configs[j] == initial);
        CHECK(out.energies[j] == doctest::Approx(energy(p, initial)));
    }
}

TEST_CASE("piqa respects per-spin freezing") {
    const IsingProblem p = generate_sk(6, 32);
    const SpinConfig initial = {1, 1, -1, -1, 1, -1};
    AnnealParams params;
    params.reads = 10;
    params.tau = 15;
    params.trotter_slices = 8;
    params.seed = 4;

    Belief b = uniform_belief(6, 0.5);
    b.values = initial;
    b.uncertainty[1] = 0.0;  // frozen
    b.uncertainty[4] = 0.0;  // frozen
    const ScheduleSpec sched = build_schedule(b, ScheduleFunctions::linear());
    const CandidateSet out = piqa_sample(p, initial, sched, params);
    for (const auto& g : out.configs) {
        CHECK(g[1] == initial[1]);
        CHECK(g[4] == initial[4]);
    }
}

TEST_CASE("piqa finds the ferromagnetic pair ground state in most reads") {
    IsingProblem p;
    p.n = 2;
    p.fields = {0.0, 0.0};
    p.couplers = {{0, 1, 1.0}};

    AnnealParams params;
    params.temperature = 0.4;  // generous budget, frozen after one calibration
    params.tau = 50;
    params.trotter_slices = 20;
    params.reads = 200;
    params.seed = 9;

    const ScheduleSpec sched = build_schedule(uniform_belief(2, 0.5), ScheduleFunctions::linear());
    const CandidateSet out = piqa_sample(p, {1, 1}, sched, params);
    int hits = 0;
    for (int j = 0; j < out.size(); ++j)
        if (out.energies[j] == doctest::Approx(-1.0)) ++hits;
    CHECK(hits > 180);  // > 90%
}

TEST_CASE("piqa output contract and determinism") {
    const IsingProblem p = generate_sk(5, 33);
    AnnealParams params;
    params.reads = 12;
    params.tau = 8;
    params.trotter_slices = 6;
    params.seed = 77;
    const ScheduleSpec sched = build_schedule(uniform_belief(5, 0.3), ScheduleFunctions::linear());

    const CandidateSet a = piqa_sample(p, {1, 1, 1, 1, 1}, sched, params);
    const CandidateSet b = piqa_sample(p, {1, 1, 1, 1, 1}, sched, params);
    REQUIRE(a.size() == 12);
    CHECK(a.configs == b.configs);
    CHECK(a.energies == b.energies);
    for (int j = 0; j < a.size(); ++j)
        CHECK(a.energies[j] == doctest::Approx(energy(p, a.configs[j])).epsilon(1e-12));

    AnnealParams zero_reads = params;
    zero_reads.reads = 0;
    CHECK_THROWS_AS(piqa_sample(p, {1, 1, 1, 1, 1}, sched, zero_reads), std::invalid_argument);

    ScheduleSpec empty;
    CHECK_THROWS_AS(piqa_sample(p, {1, 1, 1, 1, 1}, empty, params), std::invalid_argument);
}

TEST_CASE("sa with full certainty returns the initial configuration") {
    const IsingProblem p = generate_sk(5, 34);
    const SpinConfig initial = {1, -1, -1, 1, 1};
    AnnealParams params;
    params.reads = 6;
    params.tau = 10;
    params.seed = 5;
    const CandidateSet out = sa_sample(p, initial, uniform_belief(5, 0.0), params);
    for (const auto& g : out.configs) CHECK(g == initial);
}

TEST_CASE("sa finds ground states of a small symmetry-broken instance") {
    const IsingProblem p = generate_sk_fixed(10, 8);
    const GroundStates oracle = exhaustive_solve(p);

    AnnealParams params;
    params.temperature = 2.0;
    params.tau = 120;
    params.reads = 60;
    params.seed = 10;
    const SpinConfig initial(p.n, 1);
    const CandidateSet out = sa_sample(p, initial, uniform_belief(p.n, 0.5), params);
    int hits = 0;
    for (int j = 0; j < out.size(); ++j)
        if (std::abs(out.energies[j] - oracle.energy) < 1e-9) ++hits;
    INFO("sa ground-state hit rate: ", hits, "/", out.size());
    CHECK(hits > 0);
    for (int j = 0; j < out.size(); ++j)
        CHECK(out.energies[j] == doctest::Approx(energy(p, out.configs[j])).epsilon(1e-12));
}

TEST_CASE("sa collective cluster moves keep P=0 clusters intact") {
    const IsingProblem p = generate_sk(6, 35);
    Belief b = uniform_belief(6, 0.4);
    b.clusters.clusters.push_back({0, 1, 2});
    b.uncertainty.push_back(0.4);
    const SpinConfig initial = {1, 1, 1, -1, -1, -1};
    b.values = initial;
    AnnealParams params;
    params.reads = 4;
    params.tau = 12;
    params.seed = 6;
    const CandidateSet out = sa_sample(p, initial, b, params);
    CHECK(out.size() == 4);  // smoke: cluster proposals execute
}

TEST_CASE("apply_fixed_spins") {
    const IsingProblem p = generate_sk(6, 36);

    // no pins: identity reduction
    const FixedSpinReduction none = apply_fixed_spins(p, uniform_belief(6, 0.3));
    CHECK(none.reduction.problem.n == 6);
    CHECK(none.belief.clusters.size() == 6);

    // all pinned: empty problem, lift returns S exactly
    Belief all = uniform_belief(6, 0.0);
    all.values = {1, -1, 1, -1, 1, -1};
    const FixedSpinReduction full = apply_fixed_spins(p, all);
    CHECK(full.reduction.problem.n == 0);
    CHECK(lift_config(full.reduction, {}) == all.values);

    // multi-spin cluster with P = 0 is unsupported
    Belief multi = uniform_belief(6, 0.3);
    multi.clusters.clusters.push_back({0, 1});
    multi.uncertainty.push_back(0.0);
    CHECK_THROWS_AS(apply_fixed_spins(p, multi), std::invalid_argument);
}

TEST_CASE("half-pinned reduction matches the constrained oracle") {
    const IsingProblem p = generate_sk(12, 37);
    Belief b = uniform_belief(12, 0.5);
    std::mt19937_64 rng(38);
    for (int i = 0; i < 6; ++i) {
        b.uncertainty[i] = 0.0;
        b.values[i] = rng() % 2 ? 1 : -1;
    }
    const FixedSpinReduction fx = apply_fixed_spins(p, b);
    REQUIRE(fx.reduction.problem.n == 6);
    const GroundStates reduced = exhaustive_solve(fx.reduction.problem);

    // constrained enumeration over the free spins of the original problem
    double best = 1e300;
    for (std::uint64_t bits = 0; bits < (1u << 6); ++bits) {
        SpinConfig full = fx.reduction.pinned;
        for (int k = 0; k < 6; ++k)
            full[fx.reduction.kept[k]] = (bits >> k) & 1 ? 1 : -1;
        best = std::min(best, energy(p, full));
    }
    CHECK(reduced.energy == doctest::Approx(best).epsilon(1e-12));

    const SpinConfig lifted = lift_config(fx.reduction, reduced.configs[0]);
    CHECK(energy(p, lifted) == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("infer recomputes energies on the full problem") {
    const IsingProblem p = generate_sk_fixed(8, 40);
    Belief b = uniform_belief(p.n, 0.5);
    b.uncertainty[0] = 0.0;
    b.uncertainty[3] = 0.0;
    b.values[0] = -1;
    b.values[3] = 1;

    AnnealParams params;
    params.reads = 9;
    params.tau = 10;
    params.trotter_slices = 6;
    params.seed = 41;
    for (BackendKind backend : {BackendKind::Piqa, BackendKind::Sa, BackendKind::Bp}) {
        const CandidateSet out = infer(backend, b, p, params);
        REQUIRE(out.size() == 9);
        for (int j = 0; j < out.size(); ++j) {
            CHECK(out.energies[j] == doctest::Approx(energy(p, out.configs[j])).epsilon(1e-12));
            CHECK(out.configs[j][0] == -1);  // pinned bits survive the lift
            CHECK(out.configs[j][3] == 1);
        }
    }
}

TEST_CASE("infer with the init belief searches globally") {
    const IsingProblem p = generate_sk_fixed(6, 42);
    AnnealParams params;
    params.reads = 30;
    params.tau = 12;
    params.trotter_slices = 8;
    params.seed = 43;
    const Belief init = f_init(ClusterSet::singletons(p.n), p.n);
    const CandidateSet out = infer(BackendKind::Piqa, init, p, params);
    // a global search should produce at least two distinct candidates
    const auto [uniq, ue] = unique_candidates(out.configs, out.energies);
    CHECK(uniq.size() >= 2);
}

TEST_CASE("monotone freezing: s'=1 spins always report their S value") {
    std::mt19937_64 rng(44);
    const IsingProblem p = generate_sk(7, 45);
    for (int trial = 0; trial < 10; ++trial) {
        Belief b = uniform_belief(7, 0.5);
        std::uniform_real_distribution<double> unit(0.0, 0.5);
        for (int i = 0; i < 7; ++i) {
            b.uncertainty[i] = (rng() % 3 == 0) ? 0.0 : unit(rng);
            b.values[i] = rng() % 2 ? 1 : -1;
        }
        AnnealParams params;
        params.reads = 5;
        params.tau = 6;
        params.trotter_slices = 4;
        params.seed = rng();
        const CandidateSet out = infer(BackendKind::Piqa, b, p, params);
        for (const auto& g : out.configs)
            for (int i = 0; i < 7; ++i)
                if (b.uncertainty[i] == 0.0) CHECK(g[i] == b.values[i]);
    }
}

TEST_CASE("infer threads schedule offsets through the reduction") {
    const IsingProblem p = generate_sk(6, 46);
    Belief b = uniform_belief(6, 0.3);
    b.uncertainty[2] = 0.0;  // pinned, so offsets must be remapped around it
    AnnealParams params;
    params.reads = 5;
    params.tau = 8;
    params.trotter_slices = 4;
    params.seed = 47;
    InferOptions opts;
    opts.offsets = {0.0, 2.0, 0.0, 1.0, 3.0, 0.0};
    const CandidateSet a = infer(BackendKind::Piqa, b, p, params, opts);
    const CandidateSet again = infer(BackendKind::Piqa, b, p, params, opts);
    CHECK(a.configs == again.configs);
    for (const auto& g : a.configs) CHECK(g[2] == b.values[2]);

    opts.offsets.pop_back();
    CHECK_THROWS_AS(infer(BackendKind::Piqa, b, p, params, opts), std::invalid_argument);
}

TEST_CASE("reads csv dump") {
    CandidateSet reads;
    reads.configs = {{1, -1}, {-1, 1}};
    reads.energies = {0.5, -0.5};
    const std::string csv = format_reads_csv(reads);
    CHECK(csv == "read,energy,s0,s1\n0,0.5,1,-1\n1,-0.5,-1,1\n");
}
