#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <limits>
#include <random>

#include "infprim/uncertainty.hpp"

using namespace infprim;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Long-double re-evaluation of the closed forms, as an independent check of
// the double-precision implementation.
long double ratio_ld(long double a, long double b) {
    const long double r = (std::sqrt(a * a + b * b) + b) / a;
    return r * r;
}

}  // namespace

TEST_CASE("effective temperature endpoints and A=B point") {
    const auto lin = ScheduleFunctions::linear();
    CHECK(effective_temperature(0.0, lin) == kInf);  // B = 0
    CHECK(effective_temperature(1.0, lin) == 0.0);   // A = 0
    // A = B at s' = 0.5 for the linear family: T' = 2/ln((sqrt(2)+1)^2)
    CHECK(effective_temperature(0.5, lin) == doctest::Approx(1.1345927).epsilon(1e-6));
}

TEST_CASE("degenerate schedule is rejected") {
    const auto tab = ScheduleFunctions::tabulated({{0.0, 1.0}, {0.5, 0.0}, {1.0, 0.0}},
                                                  {{0.0, 0.0}, {0.5, 0.0}, {1.0, 1.0}});
    CHECK_THROWS_AS(effective_temperature(0.5, tab), std::domain_error);
    CHECK_THROWS_AS(uncertainty_from_s(0.5, tab), std::domain_error);
    CHECK_THROWS_AS(uncertainty_from_s_thermal(0.5, tab), std::domain_error);
}

TEST_CASE("nishimori temperature") {
    CHECK(nishimori_temperature(0.5) == kInf);
    const double p_for_t1 = 1.0 / (1.0 + std::exp(2.0));
    CHECK(nishimori_temperature(p_for_t1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(nishimori_temperature(0.0), std::domain_error);
    CHECK_THROWS_AS(nishimori_temperature(0.6), std::domain_error);

    double prev = nishimori_temperature(0.01);
    for (double p = 0.02; p < 0.5; p += 0.01) {
        const double t = nishimori_temperature(p);
        CHECK(t > prev);
        prev = t;
    }
}

TEST_CASE("uncertainty from s endpoints and direct value") {
    const auto lin = ScheduleFunctions::linear();
    CHECK(uncertainty_from_s(0.0, lin) == doctest::Approx(0.5));
    CHECK(uncertainty_from_s(1.0, lin) == doctest::Approx(0.0));
    // A = B: P = 1/(1 + (sqrt(2)+1)^2)
    CHECK(uncertainty_from_s(0.5, lin) == doctest::Approx(0.14644661).epsilon(1e-7));
}

TEST_CASE("thermal uncertainty reduces to the quantum-only form at T_phys = 0") {
    const auto lin = ScheduleFunctions::linear();
    for (double s = 0.0; s <= 1.0; s += 0.05)
        CHECK(uncertainty_from_s_thermal(s, lin) ==
              doctest::Approx(uncertainty_from_s(s, lin)).epsilon(1e-12));
}

TEST_CASE("thermal uncertainty limits and ordering") {
    const auto hot = ScheduleFunctions::linear(1.0, 1e9);
    for (double s = 0.1; s <= 1.0; s += 0.1)
        CHECK(uncertainty_from_s_thermal(s, hot) == doctest::Approx(0.5).epsilon(1e-6));

    const auto warm = ScheduleFunctions::linear(1.0, 0.8246);
    const auto cold = ScheduleFunctions::linear(1.0, 0.0);
    for (double s = 0.0; s <= 1.0; s += 0.05)
        CHECK(uncertainty_from_s_thermal(s, warm) >= uncertainty_from_s_thermal(s, cold));
    // s' = 1 with thermal noise keeps residual uncertainty
    CHECK(uncertainty_from_s_thermal(1.0, warm) > 0.0);
}

TEST_CASE("thermal uncertainty against a long-double re-evaluation") {
    const double t_phys = 0.8246;
    const auto sf = ScheduleFunctions::linear(1.0, t_phys);
    const double s = 0.5;
    const long double a = 1.0L - 0.5L, b = 0.5L;
    const long double t_eff = 2.0L / std::log(ratio_ld(a, b));
    const long double width =
        std::sqrt(t_eff * t_eff + ((long double)t_phys / b) * ((long double)t_phys / b));
    const long double expected = 1.0L / (1.0L + std::exp(2.0L / width));
    CHECK(uncertainty_from_s_thermal(s, sf) ==
          doctest::Approx(static_cast<double>(expected)).epsilon(1e-12));
}

TEST_CASE("strict monotonicity of the uncertainty maps") {
    for (double t_phys : {0.0, 0.5, 2.0}) {
        const auto sf = ScheduleFunctions::linear(1.0, t_phys);
        double prev = 1.0;
        for (int k = 0; k <= 100; ++k) {
            const double p = uncertainty_from_s_thermal(k / 100.0, sf);
            CHECK(p < prev);
            CHECK(p >= 0.0);
            CHECK(p <= 0.5);
            prev = p;
        }
    }
}

TEST_CASE("s_from_uncertainty endpoints and roundtrip") {
    const auto lin = ScheduleFunctions::linear();
    CHECK(s_from_uncertainty(0.5, lin) == doctest::Approx(0.0));
    CHECK(s_from_uncertainty(0.0, lin) == doctest::Approx(1.0));

    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> unit(0.001, 0.499);
    for (int k = 0; k < 100; ++k) {
        const double p = unit(rng);
        const double s = s_from_uncertainty(p, lin);
        CHECK(uncertainty_from_s(s, lin) == doctest::Approx(p).epsilon(1e-6));
    }

    const auto warm = ScheduleFunctions::linear(1.0, 0.5);
    for (int k = 0; k < 20; ++k) {
        const double p = unit(rng);
        const double s = s_from_uncertainty(p, warm);
        CHECK(uncertainty_from_s_thermal(s, warm) == doctest::Approx(p).epsilon(1e-6));
    }
}

TEST_CASE("consistency identity: T_N(P(s')) equals T'(s')") {
    const auto lin = ScheduleFunctions::linear();
    for (int k = 1; k < 100; ++k) {
        const double s = k / 100.0;
        const double tn = nishimori_temperature(uncertainty_from_s(s, lin));
        const double te = effective_temperature(s, lin);
        CHECK(tn == doctest::Approx(te).epsilon(1e-9));
    }
}

TEST_CASE("tabulated schedules interpolate and validate") {
    const auto tab = ScheduleFunctions::tabulated(
        {{0.0, 2.0}, {0.5, 1.0}, {1.0, 0.0}}, {{0.0, 0.0}, {1.0, 1.0}});
    CHECK(tab.a(0.25) == doctest::Approx(1.5));
    CHECK(tab.a(1.0) == doctest::Approx(0.0));
    CHECK(tab.b(0.5) == doctest::Approx(0.5));

    // A must be non-increasing
    CHECK_THROWS_AS(ScheduleFunctions::tabulated({{0.0, 1.0}, {1.0, 2.0}},
                                                 {{0.0, 0.0}, {1.0, 1.0}}),
                    std::invalid_argument);
    // endpoint separation
    CHECK_THROWS_AS(ScheduleFunctions::tabulated({{0.0, 1.0}, {1.0, 0.9}},
                                                 {{0.0, 0.5}, {1.0, 1.0}}),
                    std::invalid_argument);
    // non-monotone uncertainty map has no inverse; a flat-A schedule keeps
    // P constant near s=0 only if B is also flat, so force a plateau
    const auto flat = ScheduleFunctions::tabulated(
        {{0.0, 1.0}, {0.4, 1.0}, {1.0, 0.0}}, {{0.0, 0.0}, {0.4, 0.0}, {1.0, 1.0}});
    CHECK_THROWS_AS(s_from_uncertainty(0.25, flat), std::invalid_argument);
}
