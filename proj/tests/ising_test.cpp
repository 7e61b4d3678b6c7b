#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "infprim/errors.hpp"
#include "infprim/ising.hpp"

using namespace infprim;

namespace {

// Independent oracle: term-by-term summation straight off the definition,
// kept separate from energy() on purpose.
double energy_by_terms(const IsingProblem& p, const SpinConfig& s) {
    double field_part = 0.0;
    for (int i = 0; i < p.n; ++i) field_part += p.fields[i] * s[i];
    double coupler_part = 0.0;
    for (const auto& c : p.couplers) coupler_part += c.value * s[c.i] * s[c.j];
    return p.offset - field_part - coupler_part;
}

SpinConfig config_from_bits(std::uint64_t bits, int n) {
    SpinConfig s(n);
    for (int i = 0; i < n; ++i) s[i] = (bits >> i) & 1 ? 1 : -1;
    return s;
}

}  // namespace

TEST_CASE("energy of simple instances") {
    IsingProblem pair;
    pair.n = 2;
    pair.fields = {0.0, 0.0};
    pair.couplers = {{0, 1, 1.0}};
    CHECK(energy(pair, {1, 1}) == doctest::Approx(-1.0));
    CHECK(energy(pair, {1, -1}) == doctest::Approx(1.0));

    IsingProblem single;
    single.n = 1;
    single.fields = {1.0};
    CHECK(energy(single, {1}) == doctest::Approx(-1.0));

    CHECK_THROWS_AS(energy(pair, {1}), std::invalid_argument);
}

TEST_CASE("energy matches the term-summation oracle on random instances") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> val(-2.0, 2.0);
    for (int trial = 0; trial < 50; ++trial) {
        IsingProblem p = generate_sk(4, rng());
        for (double& h : p.fields) h = val(rng);
        p.offset = val(rng);
        const SpinConfig s = config_from_bits(rng(), 4);
        CHECK(energy(p, s) == doctest::Approx(energy_by_terms(p, s)).epsilon(1e-12));
    }
}

TEST_CASE("SK generator") {
    const IsingProblem p = generate_sk(17, 123);
    CHECK(p.n == 17);
    CHECK(p.couplers.size() == 136);  // n(n-1)/2
    CHECK_FALSE(p.has_fields());

    const IsingProblem q = generate_sk(17, 123);
    REQUIRE(q.couplers.size() == p.couplers.size());
    for (std::size_t k = 0; k < p.couplers.size(); ++k)
        CHECK(p.couplers[k].value == q.couplers[k].value);

    CHECK_THROWS_AS(generate_sk(1, 0), std::invalid_argument);
}

TEST_CASE("SK coupler distribution sanity") {
    // ~1e5 draws across many instances: all in [-1, 1], mean near 0
    double sum = 0.0;
    long count = 0;
    for (int rep = 0; rep < 149; ++rep) {
        const IsingProblem p = generate_sk(38, 1000 + rep);  // 703 couplers each
        for (const auto& c : p.couplers) {
            CHECK(c.value >= -1.0);
            CHECK(c.value <= 1.0);
            sum += c.value;
            ++count;
        }
    }
    CHECK(count > 100000);
    CHECK(std::abs(sum / count) < 0.02);
}

TEST_CASE("fix_spin folds couplers into fields") {
    const IsingProblem sk = generate_sk(3, 42);
    const IsingProblem reduced = fix_spin(sk, 2, -1);
    REQUIRE(reduced.n == 2);
    // fixing spin k at v turns J_ik into a field contribution v*J_ik under the
    // energy(s) = -sum h s - sum J ss convention
    double j02 = 0.0, j12 = 0.0;
    for (const auto& c : sk.couplers) {
        if (c.i == 0 && c.j == 2) j02 = c.value;
        if (c.i == 1 && c.j == 2) j12 = c.value;
    }
    CHECK(reduced.fields[0] == doctest::Approx(-j02));
    CHECK(reduced.fields[1] == doctest::Approx(-j12));
    CHECK(reduced.couplers.size() == 1);

    CHECK_THROWS_AS(fix_spin(sk, 3, -1), std::out_of_range);
    CHECK_THROWS_AS(fix_spin(sk, 0, 2), std::invalid_argument);
}

TEST_CASE("fix_spin with no couplers to the index leaves fields unchanged") {
    IsingProblem p;
    p.n = 3;
    p.fields = {0.25, -0.5, 1.5};
    p.couplers = {{0, 1, 0.7}};
    const IsingProblem r = fix_spin(p, 2, 1);
    CHECK(r.fields[0] == doctest::Approx(0.25));
    CHECK(r.fields[1] == doctest::Approx(-0.5));
    CHECK(r.offset == doctest::Approx(-1.5));  // the fixed spin's own field term
}

TEST_CASE("fix_spin preserves energies exactly") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 5; ++trial) {
        IsingProblem p = generate_sk(10, rng());
        std::uniform_real_distribution<double> val(-1.0, 1.0);
        for (double& h : p.fields) h = val(rng);
        const int index = static_cast<int>(rng() % 10);
        const int value = rng() % 2 ? 1 : -1;

        SpinConfig pinned(p.n, 0);
        pinned[index] = value;
        const ReducedProblem red = reduce_problem(p, pinned);
        for (std::uint64_t bits = 0; bits < (1u << red.problem.n); ++bits) {
            const SpinConfig rc = config_from_bits(bits, red.problem.n);
            const SpinConfig full = lift_config(red, rc);
            CHECK(energy(red.problem, rc) ==
                  doctest::Approx(energy(p, full)).epsilon(1e-12));
        }
    }
}

TEST_CASE("fix_spin ground energy equals constrained ground energy") {
    const IsingProblem p = generate_sk(12, 5);
    const IsingProblem r = fix_spin(p, 11, -1);
    const GroundStates gr = exhaustive_solve(r);

    // constrained enumeration of the original problem
    double best = 1e300;
    for (std::uint64_t bits = 0; bits < (1u << 11); ++bits) {
        SpinConfig s = config_from_bits(bits, 11);
        s.push_back(-1);
        best = std::min(best, energy(p, s));
    }
    CHECK(gr.energy == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("exhaustive_solve basics") {
    IsingProblem single;
    single.n = 1;
    single.fields = {1.0};
    const GroundStates g1 = exhaustive_solve(single);
    CHECK(g1.energy == doctest::Approx(-1.0));
    REQUIRE(g1.configs.size() == 1);
    CHECK(g1.configs[0][0] == 1);

    IsingProblem pair;
    pair.n = 2;
    pair.fields = {0.0, 0.0};
    pair.couplers = {{0, 1, 1.0}};
    const GroundStates g2 = exhaustive_solve(pair);
    CHECK(g2.energy == doctest::Approx(-1.0));
    CHECK(g2.configs.size() == 2);  // degenerate flip pair

    IsingProblem big;
    big.n = 30;
    big.fields.assign(30, 0.0);
    CHECK_THROWS_WITH_AS(exhaustive_solve(big), doctest::Contains("exceeds cap"),
                         std::invalid_argument);
}

TEST_CASE("exhaustive_solve on a generic SK_fix instance") {
    const IsingProblem p = fix_spin(generate_sk(11, 21), 10, -1);
    const GroundStates gs = exhaustive_solve(p);
    CHECK(gs.configs.size() == 1);  // unique in the generic continuous case

    std::mt19937_64 rng(3);
    for (int k = 0; k < 1000; ++k) {
        const SpinConfig s = config_from_bits(rng(), p.n);
        CHECK(gs.energy <= energy(p, s) + 1e-12);
    }
}

TEST_CASE("global_flip") {
    CHECK(global_flip({1, -1}) == SpinConfig{-1, 1});
    const SpinConfig x = {1, -1, -1, 1};
    CHECK(global_flip(global_flip(x)) == x);
}

TEST_CASE("field-free energy is invariant under global flip, exhaustively") {
    const IsingProblem p = generate_sk(10, 31);
    for (std::uint64_t bits = 0; bits < (1u << 10); ++bits) {
        const SpinConfig s = config_from_bits(bits, 10);
        CHECK(energy(p, s) == doctest::Approx(energy(p, global_flip(s))).epsilon(1e-12));
    }
}

TEST_CASE("hamming_distance") {
    CHECK(hamming_distance({1, 1, 1}, {1, -1, 1}) == 1);
    const SpinConfig x = {1, -1, 1, 1};
    CHECK(hamming_distance(x, x) == 0);
    CHECK(hamming_distance(x, global_flip(x)) == 4);
    CHECK_THROWS_AS(hamming_distance({1}, {1, 1}), std::invalid_argument);
}

TEST_CASE("instance file round trip") {
    IsingProblem p = generate_sk(6, 77);
    p.fields[2] = 0.125;
    p.offset = -0.75;
    const std::string text = format_instance(p);
    std::istringstream in(text);
    const IsingProblem q = parse_instance(in);
    CHECK(q.n == p.n);
    CHECK(q.offset == doctest::Approx(p.offset));
    CHECK(q.fields[2] == doctest::Approx(0.125));
    REQUIRE(q.couplers.size() == p.couplers.size());
    for (std::size_t k = 0; k < p.couplers.size(); ++k) {
        CHECK(q.couplers[k].i == p.couplers[k].i);
        CHECK(q.couplers[k].j == p.couplers[k].j);
        CHECK(q.couplers[k].value == p.couplers[k].value);
    }
}

TEST_CASE("instance parser rejects malformed input") {
    auto parse = [](const std::string& text) {
        std::istringstream in(text);
        return parse_instance(in);
    };
    CHECK_THROWS_AS(parse("not a header\n"), ParseError);
    CHECK_THROWS_AS(parse("ising v1 n=2\nJ 0 1 0.5\nJ 0 1 0.25\n"), ParseError);
    CHECK_THROWS_AS(parse("ising v1 n=2\nJ 1 0 0.5\n"), ParseError);
    CHECK_THROWS_AS(parse("ising v1 n=2\nh 5 0.5\n"), ParseError);
    CHECK_THROWS_AS(parse("ising v1 n=2\nh 0 0.5\nh 0 0.25\n"), ParseError);
    CHECK_THROWS_AS(parse("ising v1 n=2\nQ 0 1\n"), ParseError);
    CHECK_THROWS_AS(parse(""), ParseError);
    // comments and blank lines are fine
    CHECK_NOTHROW(parse("# leading comment\n\nising v1 n=2\n# mid comment\nJ 0 1 0.5\n"));
}
