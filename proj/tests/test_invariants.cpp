#include "nlwave/invariants.hpp"

#include <gtest/gtest.h>

using namespace nlwave;

TEST(ParallelWorst, IndependentOfJobCount) {
    auto draw = [](std::mt19937_64& rng, std::size_t i) {
        return std::uniform_real_distribution<double>(0.0, 1.0)(rng) + 1e-3 * static_cast<double>(i % 7);
    };
    const double one = parallel_worst(1000, 1, 11, 0, draw);
    for (unsigned j : {2u, 3u, 8u}) EXPECT_EQ(parallel_worst(1000, j, 11, 0, draw), one) << j;
    EXPECT_NE(parallel_worst(1000, 1, 12, 0, draw), one);
    EXPECT_NE(parallel_worst(1000, 1, 11, 1, draw), one);
}

TEST(ParallelWorst, CaseIndicesCoverTheRangeOnce) {
    std::vector<int> seen(103, 0);
    parallel_worst(103, 4, 1, 0, [&](std::mt19937_64&, std::size_t i) {
        ++seen[i];
        return 0.0;
    });
    for (int s : seen) EXPECT_EQ(s, 1);
}

TEST(ParallelWorst, NanAndExceptionsSurface) {
    const double w = parallel_worst(50, 2, 1, 0, [](std::mt19937_64&, std::size_t i) {
        return i == 31 ? std::numeric_limits<double>::quiet_NaN() : 1.0;
    });
    EXPECT_TRUE(std::isnan(w));
    EXPECT_FALSE(detail::finish("x", 50, w, 1.0).passed);
    EXPECT_THROW(parallel_worst(50, 3, 1, 0,
                                [](std::mt19937_64&, std::size_t i) -> double {
                                    if (i == 40) throw ConvergenceError("boom");
                                    return 0.0;
                                }),
                 ConvergenceError);
}

TEST(RandomMedium, AdmissibleOnTheUnitBall) {
    std::mt19937_64 rng(5);
    for (int k = 0; k < 20; ++k) {
        const IsotropicMedium m = parse_medium_text(random_medium_text(rng));
        std::vector<Vec3> pts;
        for (std::size_t i = 0; i < 200; ++i) pts.push_back(fibonacci_sphere(i, 200) * std::cbrt((i + 0.5) / 200.0));
        EXPECT_TRUE(validate_medium(m, pts).passed);
        for (const Vec3& x : pts) {
            const Moduli mo = m.moduli(x);
            EXPECT_GT(mo.lambda + mo.mu, 0.0);
        }
        EXPECT_FALSE(m.is_homogeneous());
    }
}

TEST(RandomMedium, SameSeedSameText) {
    std::mt19937_64 a(9), b(9);
    EXPECT_EQ(random_medium_text(a), random_medium_text(b));
}

TEST(Suite, PassesAndNamesItsChecks) {
    const auto r = run_invariant_suite(1, 2);
    ASSERT_EQ(r.size(), 5u);
    for (const auto& c : r) EXPECT_TRUE(c.passed) << c.name << " " << c.worst;
}

TEST(Suite, TractionOfAnUnbalancedReflectionIsLarge) {
    const Moduli m{2.0, 1.0, 1.0, 0.0, 0.0, 0.0};
    auto r = solve_p_incidence(1.0, Vec3(std::sin(0.4), 0.0, std::cos(0.4)) / m.cP(), m);
    EXPECT_LT(traction_ratio(r, m), 1e-12);
    r.A_P_minus *= 1.01;
    EXPECT_GT(traction_ratio(r, m), 1e-3);
}
