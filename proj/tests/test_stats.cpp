#include "doctest.h"

#include <numbers>

#include "specprior/random.hpp"
#include "specprior/stats.hpp"

using namespace specprior;

TEST_CASE("speed limit bounds") {
    CHECK(tau_weakest({1.0, 1.0, 0.724}) == 0.0);
    CHECK(std::abs(tau_weakest({0.0, 1.0, 0.724}) - 1 / 0.724) < 1e-12);
    CHECK(tau_save(0.0, 1.0) == 0.0);
    CHECK(std::abs(tau_save(std::numbers::pi / 2, 1.0, 0.724) - 1 / 0.724) < 1e-12);

    double prev = 1e300;
    for (int i = 0; i <= 100; ++i) {
        const double f = i / 100.0;
        const double w = tau_weakest({f, 2.0, 0.724});
        CHECK(w >= 0);
        CHECK(w <= prev);
        prev = w;
        CHECK(std::abs(tau_save(std::acos(std::sqrt(f)), 2.0, 0.724) - w) < 1e-12);
    }
    CHECK_THROWS_AS(tau_weakest({1.5, 1.0, 0.724}), Error);
    CHECK_THROWS_AS(tau_weakest({0.5, 0.0, 0.724}), Error);
    CHECK_THROWS_AS(tau_save(2.0, 1.0), Error);
    CHECK_THROWS_AS(tau_save(0.5, -1.0), Error);
}

TEST_CASE("Mann-Kendall") {
    const MannKendallResult up = mann_kendall({1, 2, 3, 4, 5});
    CHECK(up.tau == 1.0);
    CHECK(up.s == 10);
    CHECK(up.variance == doctest::Approx(5 * 4 * 15 / 18.0));
    // z = (S - 1) / sqrt(var) with continuity correction.
    CHECK(up.z == doctest::Approx(9 / std::sqrt(50.0 / 3)));
    CHECK(up.p_value < 0.05);
    CHECK(up.p_value == doctest::Approx(std::erfc(up.z / std::sqrt(2.0))));

    const MannKendallResult flat = mann_kendall({3, 3, 3, 3, 3});
    CHECK(flat.tau == 0.0);
    CHECK(flat.p_value == 1.0);

    try {
        mann_kendall({1, 2, 3});
        FAIL("expected TooShort");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::TooShort);
    }

    // Exact distribution: for n = 4 strictly increasing, P(|S| >= 6) = 2/24.
    const MannKendallResult ex = mann_kendall({1, 2, 3, 4}, MannKendallMode::Exact);
    CHECK(ex.exact);
    CHECK(ex.p_value == doctest::Approx(2.0 / 24));
    // Ties fall back to the normal approximation.
    CHECK_FALSE(mann_kendall({1, 1, 2, 3}, MannKendallMode::Exact).exact);
}

TEST_CASE("Mann-Kendall properties") {
    SplitMix64 rng(5);
    for (int t = 0; t < 50; ++t) {
        std::vector<double> x(4 + rng.below(8));
        for (auto& v : x) v = std::floor(rng.uniform(0, 5));
        const MannKendallResult a = mann_kendall(x);
        std::vector<double> r(x.rbegin(), x.rend());
        const MannKendallResult b = mann_kendall(r);
        CHECK(a.tau >= -1);
        CHECK(a.tau <= 1);
        CHECK(b.tau == doctest::Approx(-a.tau));
        CHECK(a.p_value >= 0);
        CHECK(a.p_value <= 1);
    }
}

TEST_CASE("Fisher score") {
    RealMatrix f(6, 3);
    // Column 0 constant, column 1 separated with zero spread, column 2 mixed.
    f << 1, 0, 0.1,
         1, 0, 0.9,
         1, 0, 0.4,
         1, 5, 0.2,
         1, 5, 0.7,
         1, 5, 0.6;
    const std::vector<int> labels{0, 0, 0, 1, 1, 1};
    const FisherScores s = fisher_score(f, labels);
    CHECK(s.score[0] == 0.0);
    CHECK_FALSE(s.infinite[0]);
    CHECK(s.infinite[1]);
    CHECK(std::isinf(s.score[1]));
    CHECK(s.ranking[0] == 1);

    // Shift and scale invariance on the finite column.
    RealMatrix g = f;
    g.col(2) = 3.5 * g.col(2).array() + 7.0;
    CHECK(fisher_score(g, labels).score[2] == doctest::Approx(s.score[2]).epsilon(1e-12));

    try {
        fisher_score(f, {0, 0, 0, 0, 0, 0});
        FAIL("expected DegenerateLabels");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DegenerateLabels);
    }
    try {
        fisher_score(f, {0, 0, 0, 0, 0, 1});
        FAIL("expected DegenerateLabels");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DegenerateLabels);
    }
}
